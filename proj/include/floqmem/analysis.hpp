#pragma once

#include "floqmem/bath.hpp"
#include "floqmem/floquet.hpp"
#include "floqmem/heom.hpp"
#include "floqmem/lindblad.hpp"
#include "floqmem/qcore.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace floqmem {

struct TraceDistanceCurve {
  std::vector<double> times;
  std::vector<double> values;
  DensityMatrix a;
  DensityMatrix b;
};

TraceDistanceCurve trace_distance_curve(const ProcessFamily& maps, const DensityMatrix& a,
                                        const DensityMatrix& b);

// Discrete sum of positive increments of a trace-distance curve.
double blp_measure(std::span<const double> values);
double blp_measure(const TraceDistanceCurve& curve);

// Trace distance of the antipodal pure pair along `axis`, for every map of
// the family: D_t = |M_t axis| with M_t the Bloch linear part.
std::vector<double> pair_distances(const ProcessFamily& maps, const Eigen::Vector3d& axis);

struct NonMarkovianityResult {
  double value = 0.0;
  Eigen::Vector3d best_axis = Eigen::Vector3d::UnitZ();
  std::size_t best_index = 0;
  std::size_t samples = 0;

  OrthogonalPair best_pair() const { return orthogonal_pair(best_axis); }
};

// Random antipodal pairs drawn from Rng(seed); the first k draws coincide
// for every n_pairs >= k. Ties keep the lowest pair index.
NonMarkovianityResult maximize_nonmarkovianity(const ProcessFamily& maps, int n_pairs,
                                               std::uint64_t seed);
NonMarkovianityResult maximize_nonmarkovianity(const std::vector<Eigen::Matrix3d>& bloch_maps,
                                               int n_pairs, std::uint64_t seed);

struct EnvelopeOptions {
  double floor = 1e-6;           // samples at or below are ignored
  double prominence = 1e-4;      // relative to the peak height
  std::size_t window = 0;        // fallback window in samples, 0 disables
  std::size_t min_peaks = 3;
};

struct EnvelopeFit {
  bool ok = false;
  double tau = 0.0;
  double r2 = 0.0;
  std::size_t peaks = 0;
  std::string diagnostic;
};

// Strict local maxima with sufficient prominence serve as envelope samples.
// If fewer than min_peaks exist, per-window maxima are used instead. ln of
// the envelope is fitted linearly against t.
EnvelopeFit fit_envelope(std::span<const double> times, std::span<const double> deviation,
                         const EnvelopeOptions& options = {});

struct ElementFit {
  std::string frame;    // "floquet" or "lab"
  std::string element;  // "pop", "re_coh", "im_coh"
  EnvelopeFit fit;
};

struct RelaxationFit {
  std::vector<ElementFit> elements;
  double tau = 0.0;  // max over Floquet-frame elements with r2 >= min_fit_r2
  std::string tau_element;
  double tau_lab = 0.0;  // max over fitted lab-frame elements
};

class RelaxationFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int reference_periods = 5;
inline constexpr double min_fit_r2 = 0.9;

// Residuals x(t) - x_ss(t) against the periodic reference built by averaging
// the last reference_periods periods per phase. Samples must lie on the
// uniform grid k T / samples_per_period starting at 0.
std::vector<double> periodic_residual(std::span<const double> series, int samples_per_period);
std::vector<cplx> periodic_residual(std::span<const cplx> series, int samples_per_period);

// Noise floor from the largest deviation inside the reference window.
double deviation_floor(std::span<const double> deviation, int samples_per_period);

// Deviation |rho_ij(t) - rho_ij^ss(t)| of one matrix element.
struct ElementSeries {
  std::string frame;    // "floquet" or "lab"
  std::string element;  // "pop", "re_coh", "im_coh"
  std::vector<double> deviation;
};

RelaxationFit fit_relaxation_time(std::span<const double> times, const std::vector<ElementSeries>& series,
                                  int samples_per_period);

// Deviations of a lab-frame trajectory sampled at k T / P. Floquet-frame
// residuals are rotated to the interaction picture before splitting the
// coherence into real and imaginary parts.
std::vector<ElementSeries> trajectory_elements(const FloquetSolution& solution,
                                               std::span<const double> times,
                                               const std::vector<Mat2>& lab_states, int samples_per_period);
// Deviations of a trajectory already expressed in the interaction picture
// with a time-independent generator.
std::vector<ElementSeries> floquet_elements(const std::vector<Mat2>& states, int samples_per_period);

// Analytic estimate 1 / (2 |c^1_11|^2 gamma_z) used to cap the horizon.
double tau_re_estimate(const CoefficientTable& table, const BathSpec& bath, double omega);

// Lab-frame Bloch axis of the upper eigenvector of the zero-harmonic coupling
// operator restricted to Floquet coherences, c^0_12 |u1><u2| + h.c.
Eigen::Vector3d sigma_x_axis(const FloquetSolution& solution, const CoefficientTable& table);

// Angle in degrees between two lines through the origin.
double axis_angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

struct AnalysisSettings {
  int n_pairs = 1000;
  std::uint64_t seed = 1;
  int samples_per_period = 40;
  double horizon_factor = 10.0;
  double nm_threshold = 1e-3;   // D bound ending the non-Markovianity horizon
  double fit_threshold = 1e-5;  // deviation bound ending the fit horizon
  int max_periods = 2000;

  void validate() const;
};

struct SweepConfig {
  DriveSpec drive;  // amplitude ignored
  std::vector<double> amplitudes;
  double step = 0.1;
  BathSpec bath;
  HeomSettings heom;
  FloquetOptions floquet;
  int n_max = 32;
  AnalysisSettings analysis;
};

struct PointResult {
  std::size_t index = 0;
  double amplitude = 0.0;
  bool ok = false;
  std::string error;
  double nm = 0.0;
  double tau = 0.0;
  double tau_lab = 0.0;
  std::string tau_element;
  double gap = 0.0;
  double nm_horizon = 0.0;
  double horizon = 0.0;
  double tau_estimate = 0.0;
  double top_tier_ratio = 0.0;
  double sigma_x_angle = 0.0;
  NonMarkovianityResult best;
  RelaxationFit fit;
  std::vector<double> best_curve;  // D_t of the best pair on the grid k T / P
  std::vector<std::string> warnings;
};

// One point of the sweep pipeline; `task` selects the RNG substream.
PointResult analyze_point(const SweepConfig& config, double amplitude, std::size_t task);

// Local maxima above median + 2 MAD; NaN entries are skipped.
std::vector<std::size_t> detect_peaks(std::span<const double> values);

struct SweepResult {
  std::vector<PointResult> points;
  std::vector<double> crossings;
  std::vector<std::size_t> nm_peaks;   // indices into points
  std::vector<std::size_t> tau_peaks;  // indices into points
  double step = 0.1;

  std::vector<double> amplitudes() const;
  std::size_t failures() const;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total, const PointResult&)>;

SweepResult sweep(const SweepConfig& config, int jobs, const ProgressFn& progress = {});

struct CorrespondenceRow {
  double crossing = 0.0;
  std::optional<double> nm_peak;
  std::optional<double> tau_peak;
};

struct Correspondence {
  std::vector<CorrespondenceRow> rows;
  std::vector<double> unmatched_nm;
  std::vector<double> unmatched_tau;
  std::vector<double> unmatched_crossings;
  double max_distance = 0.0;

  bool complete() const;
};

// Greedy nearest matching of crossings to each peak family, within max_distance.
Correspondence correspondence(std::span<const double> crossings, std::span<const double> nm_peaks,
                              std::span<const double> tau_peaks, double max_distance);
Correspondence correspondence_report(const SweepResult& result);

}  // namespace floqmem

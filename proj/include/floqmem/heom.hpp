#pragma once

#include "floqmem/bath.hpp"
#include "floqmem/floquet.hpp"
#include "floqmem/ode.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace floqmem {

struct HeomSettings {
  int tier = 6;
  double rtol = 1e-8;
  double atol = 1e-10;
  // Weight of the bath correlation function inside the hierarchy. With 0.5
  // the weak-coupling limit reproduces the transition rates of rate().
  double correlation_scale = 0.5;
  std::size_t max_ados = 100000;
  std::size_t max_monodromy_dim = 3000;
  double top_tier_warning = 1e-4;

  void validate() const;
};

class HierarchyTooLarge : public std::length_error {
 public:
  HierarchyTooLarge(const std::string& what, double count) : std::length_error(what), count(count) {}
  double count;
};

// Auxiliary density operator index set with nearest-neighbour couplings.
class Hierarchy {
 public:
  struct Link {
    std::size_t target;
    int mode;
    double weight;
  };

  Hierarchy(const ExponentialSeries& series, int tier, std::size_t max_ados);

  static double count(int modes, int tier);

  std::size_t size() const { return indices_.size(); }
  int modes() const { return static_cast<int>(eta_.size()); }
  int tier() const { return tier_; }
  const std::vector<int>& index(std::size_t a) const { return indices_[a]; }
  int level(std::size_t a) const { return levels_[a]; }
  const std::vector<Link>& up(std::size_t a) const { return up_[a]; }
  const std::vector<Link>& down(std::size_t a) const { return down_[a]; }
  cplx damping(std::size_t a) const { return damping_[a]; }
  cplx eta(int mode) const { return eta_[mode]; }

 private:
  int tier_;
  std::vector<cplx> eta_;
  std::vector<cplx> gamma_;
  std::vector<std::vector<int>> indices_;
  std::vector<int> levels_;
  std::vector<cplx> damping_;
  std::vector<std::vector<Link>> up_;
  std::vector<std::vector<Link>> down_;
};

// Generator of the hierarchy for H_S(t) with coupling operator sigma_x.
//
// States are stored as a (batch x 4 N) matrix: each row is one full
// hierarchy vector, ADO a occupying columns 4a..4a+3 in row-major order.
class HeomGenerator {
 public:
  HeomGenerator(const DriveSpec& drive, const BathSpec& bath, const HeomSettings& settings);

  const Hierarchy& hierarchy() const { return hierarchy_; }
  std::size_t dimension() const { return 4 * hierarchy_.size(); }
  void apply(double t, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy) const;
  // Largest top-tier ADO norm relative to the root norm, per batch row.
  double top_tier_ratio(const Eigen::MatrixXcd& y) const;

 private:
  DriveSpec drive_;
  Hierarchy hierarchy_;
};

struct HeomTrajectory {
  std::vector<double> times;
  std::vector<Mat2> states;  // lab frame
  std::size_t ado_count = 0;
  double top_tier_ratio = 0.0;
  double rejection_rate = 0.0;
  std::size_t rhs_calls = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

HeomTrajectory heom_evolve(const DriveSpec& drive, const BathSpec& bath, const DensityMatrix& rho0,
                           const HeomSettings& settings, std::span<const double> times);

// Dynamical maps from one period of the hierarchy generator. Maps are
// available at t = m T + s_k for the phases supplied at construction.
class PeriodicHeomPropagator {
 public:
  PeriodicHeomPropagator(const DriveSpec& drive, const BathSpec& bath, const HeomSettings& settings,
                         std::vector<double> phases);

  const std::vector<double>& phases() const { return phases_; }
  // Map at t = period_index * T + phases()[phase_index].
  Mat4 map(std::size_t period_index, std::size_t phase_index);
  double period() const { return period_; }
  std::size_t dimension() const { return dim_; }

 private:
  double period_;
  std::size_t dim_;
  std::vector<double> phases_;
  Eigen::MatrixXcd monodromy_;             // D x D, row-vector convention
  std::vector<Eigen::MatrixXcd> root_cols_;  // D x 4 per phase
  std::vector<Eigen::MatrixXcd> root_rows_;  // 4 x D at the start of each period
};

// Dynamical maps streamed one period at a time by integrating the four root
// basis states through the hierarchy.
class HeomMapStream {
 public:
  HeomMapStream(const DriveSpec& drive, const BathSpec& bath, const HeomSettings& settings,
                int phases_per_period);

  // Maps at t = m T + k T / P for k = 1..P of the next period m.
  std::vector<Mat4> advance();
  double time() const { return time_; }
  double period() const { return period_; }
  double top_tier_ratio() const { return top_tier_ratio_; }
  double rejection_rate() const;

 private:
  HeomGenerator gen_;
  HeomSettings settings_;
  double period_;
  int phases_;
  double time_ = 0.0;
  std::size_t periods_done_ = 0;
  Eigen::MatrixXcd state_;
  double top_tier_ratio_ = 0.0;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

enum class PropagatorMethod { automatic, monodromy, direct };

ProcessFamily heom_propagator(const DriveSpec& drive, const BathSpec& bath,
                              const HeomSettings& settings, std::span<const double> times,
                              PropagatorMethod method = PropagatorMethod::automatic);

}  // namespace floqmem

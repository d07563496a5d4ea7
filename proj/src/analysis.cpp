#include "floqmem/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace floqmem {

TraceDistanceCurve trace_distance_curve(const ProcessFamily& maps, const DensityMatrix& a,
                                        const DensityMatrix& b) {
  TraceDistanceCurve curve{maps.times, {}, a, b};
  curve.values.reserve(maps.maps.size());
  for (const Mat4& m : maps.maps) {
    curve.values.push_back(trace_distance(apply_map(m, a.matrix()), apply_map(m, b.matrix())));
  }
  return curve;
}

double blp_measure(std::span<const double> values) {
  double sum = 0.0;
  for (std::size_t k = 1; k < values.size(); ++k) sum += std::max(values[k] - values[k - 1], 0.0);
  return sum;
}

double blp_measure(const TraceDistanceCurve& curve) { return blp_measure(curve.values); }

namespace {

std::vector<Eigen::Matrix3d> bloch_family(const ProcessFamily& maps) {
  std::vector<Eigen::Matrix3d> out;
  out.reserve(maps.maps.size());
  for (const Mat4& m : maps.maps) out.push_back(bloch_linear_part(m));
  return out;
}

double pair_measure(const std::vector<Eigen::Matrix3d>& bloch_maps, const Eigen::Vector3d& axis) {
  double sum = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < bloch_maps.size(); ++k) {
    const double d = (bloch_maps[k] * axis).norm();
    if (k > 0) sum += std::max(d - prev, 0.0);
    prev = d;
  }
  return sum;
}

double wrap_difference(double x, double omega) { return x - omega * std::round(x / omega); }

}  // namespace

std::vector<double> pair_distances(const ProcessFamily& maps, const Eigen::Vector3d& axis) {
  const Eigen::Vector3d n = axis.normalized();
  std::vector<double> out;
  out.reserve(maps.maps.size());
  for (const Mat4& m : maps.maps) out.push_back((bloch_linear_part(m) * n).norm());
  return out;
}

NonMarkovianityResult maximize_nonmarkovianity(const std::vector<Eigen::Matrix3d>& bloch_maps,
                                               int n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw ValidationError("n_pairs must be >= 1");
  Rng rng(seed);
  NonMarkovianityResult best;
  best.value = -1.0;
  for (int i = 0; i < n_pairs; ++i) {
    const Eigen::Vector3d axis = random_unit_vector(rng);
    const double v = pair_measure(bloch_maps, axis);
    if (v > best.value) {
      best.value = v;
      best.best_axis = axis;
      best.best_index = static_cast<std::size_t>(i);
    }
  }
  best.samples = static_cast<std::size_t>(n_pairs);
  return best;
}

NonMarkovianityResult maximize_nonmarkovianity(const ProcessFamily& maps, int n_pairs,
                                               std::uint64_t seed) {
  return maximize_nonmarkovianity(bloch_family(maps), n_pairs, seed);
}

EnvelopeFit fit_envelope(std::span<const double> times, std::span<const double> deviation,
                         const EnvelopeOptions& options) {
  if (times.size() != deviation.size()) throw ValidationError("times and deviation differ in length");
  const std::size_t n = deviation.size();
  std::vector<std::size_t> picks;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double d = deviation[k];
    if (!(d > options.floor) || !(d > deviation[k - 1]) || !(d > deviation[k + 1])) continue;
    double left = d;
    for (std::size_t j = k; j-- > 0;) {
      if (deviation[j] > d) break;
      left = std::min(left, deviation[j]);
    }
    double right = d;
    for (std::size_t j = k + 1; j < n; ++j) {
      if (deviation[j] > d) break;
      right = std::min(right, deviation[j]);
    }
    if (d - std::max(left, right) >= options.prominence * d) picks.push_back(k);
  }

  EnvelopeFit fit;
  if (picks.size() < options.min_peaks && options.window > 0) {
    picks.clear();
    for (std::size_t start = 0; start < n; start += options.window) {
      const std::size_t end = std::min(n, start + options.window);
      std::size_t arg = start;
      for (std::size_t k = start; k < end; ++k)
        if (deviation[k] > deviation[arg]) arg = k;
      if (deviation[arg] > options.floor) picks.push_back(arg);
    }
  }
  fit.peaks = picks.size();
  if (picks.size() < options.min_peaks) {
    std::ostringstream os;
    os << "only " << picks.size() << " envelope samples above the noise floor " << options.floor;
    fit.diagnostic = os.str();
    return fit;
  }

  double mx = 0.0, my = 0.0;
  for (std::size_t k : picks) {
    mx += times[k];
    my += std::log(deviation[k]);
  }
  mx /= static_cast<double>(picks.size());
  my /= static_cast<double>(picks.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k : picks) {
    const double dx = times[k] - mx;
    const double dy = std::log(deviation[k]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) {
    fit.diagnostic = "envelope samples share one time";
    return fit;
  }
  const double slope = sxy / sxx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  if (!(slope < 0.0)) {
    fit.diagnostic = "envelope does not decay";
    return fit;
  }
  fit.tau = -1.0 / slope;
  fit.ok = true;
  return fit;
}

namespace {

template <class T>
std::vector<T> residual_impl(std::span<const T> series, int samples_per_period) {
  const std::size_t p = static_cast<std::size_t>(samples_per_period);
  const std::size_t window = reference_periods * p;
  if (p == 0 || series.size() < window + 1) {
    throw RelaxationFitError("trajectory shorter than the periodic reference window");
  }
  const std::size_t start = series.size() - window;
  std::vector<T> ref(p, T(0.0));
  for (std::size_t k = start; k < series.size(); ++k) ref[k % p] += series[k];
  for (T& r : ref) r /= static_cast<double>(reference_periods);
  std::vector<T> out(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) out[k] = series[k] - ref[k % p];
  return out;
}

std::vector<double> magnitudes(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::abs(x); });
  return out;
}

}  // namespace

std::vector<double> periodic_residual(std::span<const double> series, int samples_per_period) {
  return residual_impl(series, samples_per_period);
}

std::vector<cplx> periodic_residual(std::span<const cplx> series, int samples_per_period) {
  return residual_impl(series, samples_per_period);
}

double deviation_floor(std::span<const double> deviation, int samples_per_period) {
  const std::size_t window = reference_periods * static_cast<std::size_t>(samples_per_period);
  double spread = 0.0;
  for (std::size_t k = deviation.size() - std::min(window, deviation.size()); k < deviation.size(); ++k) {
    spread = std::max(spread, deviation[k]);
  }
  return std::max(1e-6, 100.0 * spread);
}

RelaxationFit fit_relaxation_time(std::span<const double> times, const std::vector<ElementSeries>& series,
                                  int samples_per_period) {
  RelaxationFit out;
  const std::size_t window = reference_periods * static_cast<std::size_t>(samples_per_period);
  for (const ElementSeries& s : series) {
    if (s.deviation.size() != times.size()) throw ValidationError("element series length mismatch");
    if (s.deviation.size() <= window) throw RelaxationFitError("trajectory shorter than the reference window");
    EnvelopeOptions opt;
    opt.floor = deviation_floor(s.deviation, samples_per_period);
    opt.window = static_cast<std::size_t>(samples_per_period);
    const std::size_t used = s.deviation.size() - window;
    ElementFit ef{s.frame, s.element,
                  fit_envelope(times.first(used), std::span<const double>(s.deviation).first(used), opt)};
    out.elements.push_back(std::move(ef));
  }
  // Elements whose envelope is not a clean exponential only enter the
  // maximum when no element passes the quality gate.
  for (const bool gated : {true, false}) {
    for (const ElementFit& ef : out.elements) {
      if (!ef.fit.ok || (gated && ef.fit.r2 < min_fit_r2)) continue;
      if (ef.frame == "lab") {
        out.tau_lab = std::max(out.tau_lab, ef.fit.tau);
      } else if (ef.fit.tau > out.tau) {
        out.tau = ef.fit.tau;
        out.tau_element = ef.element;
      }
    }
    if (!out.tau_element.empty()) break;
  }
  if (out.tau_element.empty()) throw RelaxationFitError("no matrix element could be fitted");
  return out;
}

namespace {

std::vector<ElementSeries> split_elements(const std::string& frame, const std::vector<double>& pop,
                                          const std::vector<cplx>& coh) {
  std::vector<double> re(coh.size()), im(coh.size());
  for (std::size_t k = 0; k < coh.size(); ++k) {
    re[k] = std::abs(coh[k].real());
    im[k] = std::abs(coh[k].imag());
  }
  return {{frame, "pop", magnitudes(pop)}, {frame, "re_coh", std::move(re)}, {frame, "im_coh", std::move(im)}};
}

}  // namespace

std::vector<ElementSeries> trajectory_elements(const FloquetSolution& solution,
                                               std::span<const double> times,
                                               const std::vector<Mat2>& lab_states, int samples_per_period) {
  if (times.size() != lab_states.size()) throw ValidationError("times and states differ in length");
  const double w = solution.drive.omega;
  const double period = solution.drive.period();
  const double dphase = wrap_difference(solution.quasienergies[0] - solution.quasienergies[1], w);
  std::vector<Mat2> frames;
  for (int k = 0; k < samples_per_period; ++k) {
    const double t = period * k / samples_per_period;
    Mat2 u;
    u.col(0) = solution.mode(0, t);
    u.col(1) = solution.mode(1, t);
    frames.push_back(u);
  }
  const std::size_t n = times.size();
  std::vector<double> fpop(n), lpop(n);
  std::vector<cplx> fcoh(n), lcoh(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Mat2& u = frames[k % frames.size()];
    const Mat2 f = u.adjoint() * lab_states[k] * u;
    fpop[k] = f(0, 0).real();
    fcoh[k] = f(0, 1);
    lpop[k] = lab_states[k](0, 0).real();
    lcoh[k] = lab_states[k](0, 1);
  }
  std::vector<cplx> frot = periodic_residual(fcoh, samples_per_period);
  for (std::size_t k = 0; k < n; ++k) frot[k] *= std::exp(cplx(0.0, dphase * times[k]));
  std::vector<ElementSeries> out =
      split_elements("floquet", periodic_residual(fpop, samples_per_period), frot);
  std::vector<ElementSeries> lab = split_elements("lab", periodic_residual(lpop, samples_per_period),
                                                  periodic_residual(lcoh, samples_per_period));
  out.insert(out.end(), lab.begin(), lab.end());
  return out;
}

std::vector<ElementSeries> floquet_elements(const std::vector<Mat2>& states, int samples_per_period) {
  std::vector<double> pop;
  std::vector<cplx> coh;
  for (const Mat2& s : states) {
    pop.push_back(s(0, 0).real());
    coh.push_back(s(0, 1));
  }
  return split_elements("floquet", periodic_residual(pop, samples_per_period),
                        periodic_residual(coh, samples_per_period));
}

double tau_re_estimate(const CoefficientTable& table, const BathSpec& bath, double omega) {
  const double c = std::abs(table(1, 0, 0));
  const double gz = rate(bath, omega) + rate(bath, -omega);
  if (c == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * c * c * gz);
}

Eigen::Vector3d sigma_x_axis(const FloquetSolution& solution, const CoefficientTable& table) {
  const cplx c = table(0, 0, 1);
  Mat2 a = Mat2::Zero();
  a(0, 1) = c;
  a(1, 0) = std::conj(c);
  if (std::abs(c) == 0.0) a = pauli::x();
  const Vec2 v = eigh(a).vectors.col(1);
  Mat2 u;
  u.col(0) = solution.mode0(0);
  u.col(1) = solution.mode0(1);
  const Vec2 psi = u * v;
  return bloch_components(psi * psi.adjoint());
}

double axis_angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
  return std::acos(c) * 180.0 / M_PI;
}

void AnalysisSettings::validate() const {
  if (n_pairs < 1) throw ValidationError("analysis.n_pairs must be >= 1");
  if (samples_per_period < 4) throw ValidationError("analysis.dt_factor must be >= 4");
  if (!(horizon_factor > 0.0)) throw ValidationError("analysis.horizon_factor must be > 0");
  if (!(nm_threshold > 0.0) || !(fit_threshold > 0.0)) throw ValidationError("analysis thresholds must be > 0");
  if (max_periods < 2 * reference_periods) {
    throw ValidationError("analysis.max_periods must allow two reference windows");
  }
}

PointResult analyze_point(const SweepConfig& config, double amplitude, std::size_t task) {
  PointResult out;
  out.index = task;
  out.amplitude = amplitude;
  DriveSpec drive = config.drive;
  drive.amplitude = amplitude;
  drive.validate();
  config.analysis.validate();
  const AnalysisSettings& an = config.analysis;
  const int p = an.samples_per_period;
  const double period = drive.period();

  const FloquetSolution sol = floquet_solve(drive, config.floquet);
  const CoefficientTable table = fourier_coefficients(sol, config.n_max);
  if (table.aliasing) out.warnings.push_back("Fourier table aliasing: raise n_max or N_t");
  out.gap = quasienergy_gap(drive);
  out.tau_estimate = tau_re_estimate(table, config.bath, drive.omega);

  double cap = an.horizon_factor * out.tau_estimate / period;
  const int max_periods = std::isfinite(cap) ? std::clamp(static_cast<int>(std::ceil(cap)),
                                                          2 * reference_periods, an.max_periods)
                                             : an.max_periods;

  HeomMapStream stream(drive, config.bath, config.heom, p);
  std::vector<double> times{0.0};
  std::vector<Mat4> maps{Mat4::Identity()};
  std::vector<Eigen::Matrix3d> bloch{Eigen::Matrix3d::Identity()};
  std::size_t nm_end = 0;
  bool settled = false;
  for (int m = 0; m < max_periods; ++m) {
    std::vector<Mat4> chunk = stream.advance();
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      times.push_back(period * m + period * static_cast<double>(k + 1) / p);
      bloch.push_back(bloch_linear_part(chunk[k]));
      maps.push_back(std::move(chunk[k]));
    }
    const double smax = Eigen::JacobiSVD<Eigen::Matrix3d>(bloch.back()).singularValues()(0);
    if (nm_end == 0 && smax < an.nm_threshold) nm_end = bloch.size();
    if (smax < an.fit_threshold && m + 1 >= 2 * reference_periods) {
      settled = true;
      break;
    }
  }
  if (!settled) out.warnings.push_back("horizon cap reached before the deviation threshold");
  if (nm_end == 0) nm_end = bloch.size();
  out.horizon = times.back();
  out.nm_horizon = times[nm_end - 1];
  out.top_tier_ratio = stream.top_tier_ratio();
  if (out.top_tier_ratio > config.heom.top_tier_warning) {
    std::ostringstream os;
    os << "top-tier ADO ratio " << out.top_tier_ratio << " exceeds " << config.heom.top_tier_warning;
    out.warnings.push_back(os.str());
  }

  const std::vector<Eigen::Matrix3d> prefix(bloch.begin(), bloch.begin() + static_cast<std::ptrdiff_t>(nm_end));
  out.best = maximize_nonmarkovianity(prefix, an.n_pairs, Rng::substream(an.seed, task).next());
  out.nm = out.best.value;
  out.best_curve.reserve(nm_end);
  for (const auto& b : prefix) out.best_curve.push_back((b * out.best.best_axis).norm());
  out.sigma_x_angle = axis_angle_deg(out.best.best_axis, sigma_x_axis(sol, table));

  // Initial state with equal weight on population and both coherences in the Floquet basis.
  const Eigen::Vector3d r0 = Eigen::Vector3d::Ones().normalized();
  Mat2 u;
  u.col(0) = sol.mode0(0);
  u.col(1) = sol.mode0(1);
  const Mat2 rho0 = u * from_bloch_components(r0) * u.adjoint();
  std::vector<Mat2> states;
  states.reserve(maps.size());
  for (const Mat4& m : maps) states.push_back(apply_map(m, rho0));
  out.fit = fit_relaxation_time(times, trajectory_elements(sol, times, states, p), p);
  out.tau = out.fit.tau;
  out.tau_lab = out.fit.tau_lab;
  out.tau_element = out.fit.tau_element;
  out.ok = true;
  return out;
}

std::vector<std::size_t> detect_peaks(std::span<const double> values) {
  std::vector<double> finite;
  for (double v : values)
    if (std::isfinite(v)) finite.push_back(v);
  std::vector<std::size_t> peaks;
  if (finite.size() < 3) return peaks;
  auto median = [](std::vector<double> v) {
    const std::size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
    const double hi = v[h];
    if (v.size() % 2 == 1) return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)));
  };
  const double med = median(finite);
  std::vector<double> dev;
  for (double v : finite) dev.push_back(std::abs(v - med));
  const double threshold = med + 2.0 * median(dev);
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v) || !std::isfinite(values[i - 1]) || !std::isfinite(values[i + 1])) continue;
    if (v > values[i - 1] && v >= values[i + 1] && v > threshold) peaks.push_back(i);
  }
  return peaks;
}

std::vector<double> SweepResult::amplitudes() const {
  std::vector<double> out;
  for (const auto& p : points) out.push_back(p.amplitude);
  return out;
}

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& p) { return !p.ok; }));
}

SweepResult sweep(const SweepConfig& config, int jobs, const ProgressFn& progress) {
  config.bath.validate();
  config.heom.validate();
  config.analysis.validate();
  if (config.amplitudes.empty()) throw ValidationError("sweep needs at least one amplitude");
  SweepResult result;
  result.step = config.step;
  result.points.resize(config.amplitudes.size());

  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < config.amplitudes.size(); i = next++) {
      PointResult r;
      try {
        r = analyze_point(config, config.amplitudes[i], i);
      } catch (const std::exception& e) {
        r = PointResult{};
        r.index = i;
        r.amplitude = config.amplitudes[i];
        r.error = e.what();
        r.nm = r.tau = r.tau_lab = r.gap = std::numeric_limits<double>::quiet_NaN();
      }
      std::lock_guard lock(mutex);
      result.points[i] = std::move(r);
      ++done;
      if (progress) progress(done, config.amplitudes.size(), result.points[i]);
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(config.amplitudes.size()));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  const auto [lo, hi] = std::minmax_element(config.amplitudes.begin(), config.amplitudes.end());
  if (*hi > *lo) {
    DriveSpec d = config.drive;
    result.crossings = find_crossings(d, *lo, *hi);
  }
  std::vector<double> nm, tau;
  for (const auto& p : result.points) {
    nm.push_back(p.ok ? p.nm : std::numeric_limits<double>::quiet_NaN());
    tau.push_back(p.ok ? p.tau : std::numeric_limits<double>::quiet_NaN());
  }
  result.nm_peaks = detect_peaks(nm);
  result.tau_peaks = detect_peaks(tau);
  return result;
}

bool Correspondence::complete() const {
  if (!unmatched_nm.empty() || !unmatched_tau.empty() || !unmatched_crossings.empty()) return false;
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.nm_peak && r.tau_peak; });
}

namespace {

std::vector<std::optional<double>> greedy_match(std::span<const double> crossings, std::span<const double> peaks,
                                                double max_distance, std::vector<double>& unmatched) {
  struct Candidate {
    double distance;
    std::size_t c;
    std::size_t p;
  };
  std::vector<Candidate> cand;
  for (std::size_t c = 0; c < crossings.size(); ++c)
    for (std::size_t p = 0; p < peaks.size(); ++p) {
      const double d = std::abs(crossings[c] - peaks[p]);
      if (d <= max_distance) cand.push_back({d, c, p});
    }
  std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.distance < b.distance; });
  std::vector<std::optional<double>> out(crossings.size());
  std::vector<bool> used(peaks.size(), false);
  for (const auto& k : cand) {
    if (out[k.c] || used[k.p]) continue;
    out[k.c] = peaks[k.p];
    used[k.p] = true;
  }
  for (std::size_t p = 0; p < peaks.size(); ++p)
    if (!used[p]) unmatched.push_back(peaks[p]);
  return out;
}

}  // namespace

Correspondence correspondence(std::span<const double> crossings, std::span<const double> nm_peaks,
                              std::span<const double> tau_peaks, double max_distance) {
  Correspondence out;
  out.max_distance = max_distance;
  const auto nm = greedy_match(crossings, nm_peaks, max_distance, out.unmatched_nm);
  const auto tau = greedy_match(crossings, tau_peaks, max_distance, out.unmatched_tau);
  for (std::size_t c = 0; c < crossings.size(); ++c) {
    out.rows.push_back({crossings[c], nm[c], tau[c]});
    if (!nm[c] && !tau[c]) out.unmatched_crossings.push_back(crossings[c]);
  }
  return out;
}

Correspondence correspondence_report(const SweepResult& result) {
  std::vector<double> nm, tau;
  for (std::size_t i : result.nm_peaks) nm.push_back(result.points[i].amplitude);
  for (std::size_t i : result.tau_peaks) tau.push_back(result.points[i].amplitude);
  return correspondence(result.crossings, nm, tau, 2.0 * result.step);
}

}  // namespace floqmem

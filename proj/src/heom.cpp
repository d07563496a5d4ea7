#include "floqmem/heom.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace floqmem {

void HeomSettings::validate() const {
  if (tier < 0) throw ValidationError("HEOM tier must be >= 0");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ValidationError("HEOM tolerances must be > 0");
  if (!(correlation_scale > 0.0)) throw ValidationError("correlation_scale must be > 0");
}

double Hierarchy::count(int modes, int tier) {
  // C(tier + modes, tier) in floating point to detect overflow early.
  double c = 1.0;
  for (int k = 1; k <= tier; ++k) c = c * (modes + k) / k;
  return std::round(c);
}

Hierarchy::Hierarchy(const ExponentialSeries& series, int tier, std::size_t max_ados) : tier_(tier) {
  for (const auto& term : series.terms) {
    if (std::abs(term.eta) == 0.0) continue;
    eta_.push_back(term.eta);
    gamma_.push_back(term.gamma);
  }
  const int m = modes();
  const double expected = count(m, tier);
  if (expected > static_cast<double>(max_ados)) {
    std::ostringstream os;
    os << "hierarchy with " << m << " modes at tier " << tier << " needs " << expected
       << " auxiliary density operators (limit " << max_ados << ")";
    throw HierarchyTooLarge(os.str(), expected);
  }

  // Enumerate by tier, lexicographic within a tier.
  std::map<std::vector<int>, std::size_t> lookup;
  std::vector<int> idx(m, 0);
  indices_.push_back(idx);
  levels_.push_back(0);
  lookup[idx] = 0;
  std::size_t begin = 0;
  for (int level = 1; level <= tier && m > 0; ++level) {
    const std::size_t end = indices_.size();
    for (std::size_t a = begin; a < end; ++a) {
      for (int l = 0; l < m; ++l) {
        std::vector<int> next = indices_[a];
        ++next[l];
        if (lookup.count(next)) continue;
        lookup[next] = indices_.size();
        indices_.push_back(next);
        levels_.push_back(level);
      }
    }
    begin = end;
  }
  // Stable canonical order: sort within each tier.
  std::vector<std::size_t> order(indices_.size());
  for (std::size_t a = 0; a < order.size(); ++a) order[a] = a;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (levels_[x] != levels_[y]) return levels_[x] < levels_[y];
    return indices_[x] > indices_[y];
  });
  std::vector<std::vector<int>> sorted;
  std::vector<int> sorted_levels;
  for (std::size_t a : order) {
    sorted.push_back(indices_[a]);
    sorted_levels.push_back(levels_[a]);
  }
  indices_ = std::move(sorted);
  levels_ = std::move(sorted_levels);
  lookup.clear();
  for (std::size_t a = 0; a < indices_.size(); ++a) lookup[indices_[a]] = a;

  const std::size_t n = indices_.size();
  damping_.assign(n, 0.0);
  up_.assign(n, {});
  down_.assign(n, {});
  for (std::size_t a = 0; a < n; ++a) {
    const auto& id = indices_[a];
    for (int l = 0; l < m; ++l) {
      damping_[a] += static_cast<double>(id[l]) * gamma_[l];
      const double mag = std::abs(eta_[l]);
      if (levels_[a] < tier) {
        std::vector<int> next = id;
        ++next[l];
        up_[a].push_back({lookup.at(next), l, std::sqrt((id[l] + 1.0) * mag)});
      }
      if (id[l] > 0) {
        std::vector<int> prev = id;
        --prev[l];
        down_[a].push_back({lookup.at(prev), l, std::sqrt(id[l] / mag)});
      }
    }
  }
}

namespace {

ExponentialSeries scaled_series(const DriveSpec& drive, const BathSpec& bath,
                                const HeomSettings& settings) {
  drive.validate();
  bath.validate();
  settings.validate();
  ExponentialSeries s;
  if (bath.alpha == 0.0) return s;
  s = pade_series(bath, bath.pade_terms);
  for (auto& term : s.terms) term.eta *= settings.correlation_scale;
  return s;
}

}  // namespace

HeomGenerator::HeomGenerator(const DriveSpec& drive, const BathSpec& bath,
                             const HeomSettings& settings)
    : drive_(drive),
      hierarchy_(scaled_series(drive, bath, settings), settings.tier, settings.max_ados) {}

void HeomGenerator::apply(double t, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy) const {
  const Eigen::Index rows = y.rows();
  const cplx mi(0.0, -1.0);
  const double f = -drive_.amplitude * std::cos(drive_.omega * t);
  const double w0 = drive_.omega0;
  const cplx* src = y.data();
  cplx* dst = dy.data();
  const std::size_t n = hierarchy_.size();

  for (std::size_t a = 0; a < n; ++a) {
    const cplx* r0 = src + (4 * a) * rows;
    const cplx* r1 = r0 + rows;
    const cplx* r2 = r1 + rows;
    const cplx* r3 = r2 + rows;
    cplx* d0 = dst + (4 * a) * rows;
    cplx* d1 = d0 + rows;
    cplx* d2 = d1 + rows;
    cplx* d3 = d2 + rows;
    const cplx damp = hierarchy_.damping(a);
    for (Eigen::Index b = 0; b < rows; ++b) {
      const cplx q0 = r2[b] - r1[b];
      const cplx q1 = r3[b] - r0[b];
      d0[b] = mi * (f * q0) - damp * r0[b];
      d1[b] = mi * (f * q1 + w0 * r1[b]) - damp * r1[b];
      d2[b] = mi * (-f * q1 - w0 * r2[b]) - damp * r2[b];
      d3[b] = mi * (-f * q0) - damp * r3[b];
    }
    for (const auto& link : hierarchy_.up(a)) {
      const cplx* s0 = src + (4 * link.target) * rows;
      const cplx* s1 = s0 + rows;
      const cplx* s2 = s1 + rows;
      const cplx* s3 = s2 + rows;
      const cplx c = mi * link.weight;
      for (Eigen::Index b = 0; b < rows; ++b) {
        const cplx q0 = c * (s2[b] - s1[b]);
        const cplx q1 = c * (s3[b] - s0[b]);
        d0[b] += q0;
        d1[b] += q1;
        d2[b] -= q1;
        d3[b] -= q0;
      }
    }
    for (const auto& link : hierarchy_.down(a)) {
      const cplx* s0 = src + (4 * link.target) * rows;
      const cplx* s1 = s0 + rows;
      const cplx* s2 = s1 + rows;
      const cplx* s3 = s2 + rows;
      const cplx e = mi * link.weight * hierarchy_.eta(link.mode);
      const cplx ec = mi * link.weight * std::conj(hierarchy_.eta(link.mode));
      for (Eigen::Index b = 0; b < rows; ++b) {
        d0[b] += e * s2[b] - ec * s1[b];
        d1[b] += e * s3[b] - ec * s0[b];
        d2[b] += e * s0[b] - ec * s3[b];
        d3[b] += e * s1[b] - ec * s2[b];
      }
    }
  }
}

double HeomGenerator::top_tier_ratio(const Eigen::MatrixXcd& y) const {
  const int tier = hierarchy_.tier();
  if (tier == 0) return 0.0;
  double worst = 0.0;
  for (Eigen::Index b = 0; b < y.rows(); ++b) {
    const double root = y.row(b).segment(0, 4).norm();
    if (root == 0.0) continue;
    double top = 0.0;
    for (std::size_t a = 0; a < hierarchy_.size(); ++a) {
      if (hierarchy_.level(a) == tier) top = std::max(top, y.row(b).segment(4 * a, 4).norm());
    }
    worst = std::max(worst, top / root);
  }
  return worst;
}

namespace {

OdeOptions ode_options(const HeomSettings& s) {
  OdeOptions opt;
  opt.rtol = s.rtol;
  opt.atol = s.atol;
  return opt;
}

std::vector<double> with_origin(std::span<const double> times, bool& prepended) {
  if (times.empty()) throw ValidationError("time grid is empty");
  if (times.front() < 0.0) throw ValidationError("time grid must start at t >= 0");
  std::vector<double> grid;
  prepended = times.front() > 0.0;
  if (prepended) grid.push_back(0.0);
  grid.insert(grid.end(), times.begin(), times.end());
  return grid;
}

void record_warnings(HeomTrajectory& tr, const OdeStats& stats, const HeomSettings& settings) {
  tr.rejection_rate = stats.rejection_rate();
  tr.rhs_calls = stats.rhs_calls;
  if (tr.top_tier_ratio > settings.top_tier_warning) {
    std::ostringstream os;
    os << "top-tier auxiliary norm reaches " << tr.top_tier_ratio
       << " of the root norm; increase the tier";
    tr.warnings.push_back(os.str());
  }
  if (tr.rejection_rate > 0.5) {
    std::ostringstream os;
    os << "step rejection rate " << tr.rejection_rate << " exceeds 50%; the hierarchy is stiff";
    tr.warnings.push_back(os.str());
  }
}

}  // namespace

HeomTrajectory heom_evolve(const DriveSpec& drive, const BathSpec& bath, const DensityMatrix& rho0,
                           const HeomSettings& settings, std::span<const double> times) {
  const auto start = std::chrono::steady_clock::now();
  const HeomGenerator gen(drive, bath, settings);
  bool prepended = false;
  const std::vector<double> grid = with_origin(times, prepended);

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(1, static_cast<Eigen::Index>(gen.dimension()));
  const Vec4 v0 = vectorize(rho0.matrix());
  for (int k = 0; k < 4; ++k) y(0, k) = v0(k);

  HeomTrajectory tr;
  tr.ado_count = gen.hierarchy().size();
  const OdeStats stats = integrate_dp45(
      [&](double t, const Eigen::MatrixXcd& s, Eigen::MatrixXcd& ds) { gen.apply(t, s, ds); }, y,
      std::span<const double>(grid), ode_options(settings),
      [&](std::size_t i, double t, const Eigen::MatrixXcd& s) {
        if (prepended && i == 0) return;
        tr.times.push_back(t);
        Mat2 rho;
        rho << s(0, 0), s(0, 1), s(0, 2), s(0, 3);
        tr.states.push_back(rho);
        tr.top_tier_ratio = std::max(tr.top_tier_ratio, gen.top_tier_ratio(s));
      });
  record_warnings(tr, stats, settings);
  tr.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return tr;
}

PeriodicHeomPropagator::PeriodicHeomPropagator(const DriveSpec& drive, const BathSpec& bath,
                                               const HeomSettings& settings,
                                               std::vector<double> phases)
    : period_(drive.period()) {
  const HeomGenerator gen(drive, bath, settings);
  dim_ = gen.dimension();
  if (dim_ > settings.max_monodromy_dim) {
    std::ostringstream os;
    os << "hierarchy dimension " << dim_ << " exceeds the monodromy limit "
       << settings.max_monodromy_dim;
    throw HierarchyTooLarge(os.str(), static_cast<double>(dim_));
  }
  std::sort(phases.begin(), phases.end());
  for (double s : phases) {
    if (s < 0.0 || s >= period_) throw ValidationError("phases must lie in [0, T)");
  }
  phases.erase(std::unique(phases.begin(), phases.end()), phases.end());
  phases_ = phases;

  std::vector<double> grid{0.0};
  for (double s : phases_) {
    if (s > 0.0) grid.push_back(s);
  }
  grid.push_back(period_);

  const Eigen::Index d = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Identity(d, d);
  std::vector<Eigen::MatrixXcd> snapshots(grid.size());
  integrate_dp45(
      [&](double t, const Eigen::MatrixXcd& s, Eigen::MatrixXcd& ds) { gen.apply(t, s, ds); }, y,
      std::span<const double>(grid), ode_options(settings),
      [&](std::size_t i, double, const Eigen::MatrixXcd& s) {
        if (i + 1 < grid.size()) snapshots[i] = s.leftCols(4);
      });
  monodromy_ = std::move(y);

  root_cols_.resize(phases_.size());
  std::size_t gi = 0;
  for (std::size_t k = 0; k < phases_.size(); ++k) {
    while (grid[gi] < phases_[k]) ++gi;
    root_cols_[k] = snapshots[gi];
  }
  root_rows_.push_back(Eigen::MatrixXcd::Identity(4, d));
}

Mat4 PeriodicHeomPropagator::map(std::size_t period_index, std::size_t phase_index) {
  while (root_rows_.size() <= period_index) root_rows_.push_back(root_rows_.back() * monodromy_);
  const Eigen::MatrixXcd r = root_rows_[period_index] * root_cols_.at(phase_index);
  return r.transpose();
}

HeomMapStream::HeomMapStream(const DriveSpec& drive, const BathSpec& bath,
                             const HeomSettings& settings, int phases_per_period)
    : gen_(drive, bath, settings), settings_(settings), period_(drive.period()), phases_(phases_per_period) {
  if (phases_per_period < 1) throw ValidationError("phases per period must be >= 1");
  state_ = Eigen::MatrixXcd::Zero(4, static_cast<Eigen::Index>(gen_.dimension()));
  state_.leftCols(4) = Eigen::MatrixXcd::Identity(4, 4);
}

std::vector<Mat4> HeomMapStream::advance() {
  const double start = period_ * static_cast<double>(periods_done_);
  std::vector<double> grid(phases_ + 1);
  for (int k = 0; k <= phases_; ++k) grid[k] = start + period_ * k / phases_;
  std::vector<Mat4> maps;
  maps.reserve(phases_);
  const OdeStats stats = integrate_dp45(
      [&](double t, const Eigen::MatrixXcd& s, Eigen::MatrixXcd& ds) { gen_.apply(t, s, ds); }, state_,
      std::span<const double>(grid), ode_options(settings_),
      [&](std::size_t i, double, const Eigen::MatrixXcd& s) {
        if (i == 0) return;
        maps.push_back(s.leftCols(4).transpose());
        if (i == grid.size() - 1) top_tier_ratio_ = std::max(top_tier_ratio_, gen_.top_tier_ratio(s));
      });
  accepted_ += stats.accepted;
  rejected_ += stats.rejected;
  ++periods_done_;
  time_ = grid.back();
  return maps;
}

double HeomMapStream::rejection_rate() const {
  const std::size_t total = accepted_ + rejected_;
  return total == 0 ? 0.0 : static_cast<double>(rejected_) / static_cast<double>(total);
}

ProcessFamily heom_propagator(const DriveSpec& drive, const BathSpec& bath,
                              const HeomSettings& settings, std::span<const double> times,
                              PropagatorMethod method) {
  ProcessFamily family;
  family.times.assign(times.begin(), times.end());
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ValidationError("time grid must be strictly increasing");
  }
  if (times.empty()) return family;
  if (times.front() < 0.0) throw ValidationError("time grid must start at t >= 0");

  const double period = drive.period();
  const double snap = 1e-10 * period;
  std::vector<std::size_t> period_of(times.size());
  std::vector<double> phase_of(times.size());
  std::vector<double> phases;
  for (std::size_t i = 0; i < times.size(); ++i) {
    double m = std::floor(times[i] / period);
    double s = times[i] - m * period;
    if (s > period - snap) {
      s = 0.0;
      m += 1.0;
    }
    if (s < snap) s = 0.0;
    period_of[i] = static_cast<std::size_t>(m);
    phase_of[i] = s;
    phases.push_back(s);
  }
  std::sort(phases.begin(), phases.end());
  std::vector<double> unique;
  for (double s : phases) {
    if (unique.empty() || s - unique.back() > snap) unique.push_back(s);
  }

  if (method == PropagatorMethod::automatic) {
    // One period of the monodromy costs about dim / 4 periods of direct
    // integration of the four root basis states.
    const HeomGenerator probe(drive, bath, settings);
    const double periods = times.back() / period;
    method = (probe.dimension() <= settings.max_monodromy_dim && unique.size() <= 400 &&
              periods > 0.25 * static_cast<double>(probe.dimension()))
                 ? PropagatorMethod::monodromy
                 : PropagatorMethod::direct;
  }

  if (method == PropagatorMethod::monodromy) {
    PeriodicHeomPropagator prop(drive, bath, settings, unique);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto it = std::lower_bound(unique.begin(), unique.end(), phase_of[i] - snap);
      family.maps.push_back(prop.map(period_of[i], static_cast<std::size_t>(it - unique.begin())));
    }
    return family;
  }

  const HeomGenerator gen(drive, bath, settings);
  bool prepended = false;
  const std::vector<double> grid = with_origin(times, prepended);
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(4, static_cast<Eigen::Index>(gen.dimension()));
  y.leftCols(4) = Eigen::MatrixXcd::Identity(4, 4);
  integrate_dp45(
      [&](double t, const Eigen::MatrixXcd& s, Eigen::MatrixXcd& ds) { gen.apply(t, s, ds); }, y,
      std::span<const double>(grid), ode_options(settings),
      [&](std::size_t i, double, const Eigen::MatrixXcd& s) {
        if (prepended && i == 0) return;
        family.maps.push_back(s.leftCols(4).transpose());
      });
  return family;
}

}  // namespace floqmem

#include "floqmem/floquet.hpp"

#include "floqmem/ode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace floqmem {

double DriveSpec::period() const { return 2.0 * std::numbers::pi / omega; }

void DriveSpec::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ValidationError("drive omega must be > 0");
  if (!std::isfinite(omega0)) throw ValidationError("omega0 must be finite");
  if (!std::isfinite(amplitude)) throw ValidationError("drive amplitude must be finite");
}

Mat2 hamiltonian(const DriveSpec& drive, double t) {
  Mat2 h;
  const double half = 0.5 * drive.omega0;
  const double off = -drive.amplitude * std::cos(drive.omega * t);
  h << half, off, off, -half;
  return h;
}

Mat2 propagate(const DriveSpec& drive, double t0, double t1, double tol) {
  Mat2 u = Mat2::Identity();
  if (t1 == t0) return u;
  if (t1 < t0) throw std::invalid_argument("propagate requires t1 >= t0");
  const double grid[2] = {t0, t1};
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  const cplx mi(0.0, -1.0);
  integrate_dp45(
      [&](double t, const Mat2& y, Mat2& dy) { dy.noalias() = mi * hamiltonian(drive, t) * y; }, u,
      std::span<const double>(grid, 2), opt, [](std::size_t, double, const Mat2&) {});
  return u;
}

double fold_quasienergy(double e, double omega) {
  double f = e - omega * std::floor((e + 0.5 * omega) / omega);
  if (f >= 0.5 * omega * (1.0 - 1e-9)) f -= omega;
  if (f < -0.5 * omega * (1.0 + 1e-9)) f += omega;
  return f;
}

double circle_gap(double e1, double e2, double omega) {
  const double d = std::fmod(std::abs(e1 - e2), omega);
  return std::min(d, omega - d);
}

namespace {

struct ParityBasis {
  std::array<Vec2, 2> vectors;
  std::array<cplx, 2> eigenvalues;
  bool degenerate = false;
};

// Eigenbasis of a 2x2 unitary via the Hermitian generator of its SU(2) part.
ParityBasis unitary_eigenbasis(const Mat2& p) {
  ParityBasis out;
  const cplx s = std::sqrt(p.determinant());
  const Mat2 q = p / s;
  const cplx a = 0.5 * q.trace();
  const Mat2 k = cplx(0.0, 1.0) * (q - a * Mat2::Identity());
  const HermitianEigen2 e = eigh(k);
  const double spread = 0.5 * (e.values[1] - e.values[0]);
  if (spread < 1e-9) {
    out.degenerate = true;
    out.vectors = {Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  } else {
    out.vectors = {e.vectors.col(0), e.vectors.col(1)};
  }
  for (int j = 0; j < 2; ++j) out.eigenvalues[j] = out.vectors[j].dot(p * out.vectors[j]);
  return out;
}

void fix_phase(Vec2& v) {
  const int idx = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
  const cplx c = v(idx);
  v *= std::abs(c) / c;
  v(idx) = std::abs(v(idx));
}

std::vector<double> uniform_grid(double period, int samples) {
  std::vector<double> times(samples + 1);
  for (int m = 0; m <= samples; ++m) times[m] = period * m / samples;
  times.back() = period;
  return times;
}

}  // namespace

FloquetSolution floquet_solve(const DriveSpec& drive, const FloquetOptions& options) {
  drive.validate();
  const int nt = options.time_samples;
  if (nt < 4 || nt % 2 != 0) throw ValidationError("time_samples must be an even number >= 4");

  FloquetSolution sol;
  sol.drive = drive;
  const double period = drive.period();
  sol.times = uniform_grid(period, nt);
  sol.propagators.resize(nt + 1);

  Mat2 u = Mat2::Identity();
  OdeOptions opt;
  opt.rtol = options.tol * 1e-2;
  opt.atol = options.tol * 1e-4;
  const cplx mi(0.0, -1.0);
  integrate_dp45(
      [&](double t, const Mat2& y, Mat2& dy) { dy.noalias() = mi * hamiltonian(drive, t) * y; }, u,
      std::span<const double>(sol.times), opt,
      [&](std::size_t i, double, const Mat2& y) { sol.propagators[i] = y; });
  sol.monodromy = sol.propagators.back();

  // sigma_z H(t) sigma_z = H(t + T/2), hence U(T) = (sigma_z U(T/2))^2.
  const Mat2 parity_op = pauli::z() * sol.propagators[nt / 2];
  const ParityBasis basis = unitary_eigenbasis(parity_op);
  sol.parity_degenerate = basis.degenerate;

  std::array<Vec2, 2> u0 = basis.vectors;
  for (int k = 0; k < 2; ++k) {
    const double unfolded = -2.0 * std::arg(basis.eigenvalues[k]) / period;
    const double folded = fold_quasienergy(unfolded, drive.omega);
    const long shift = std::lround((unfolded - folded) / drive.omega);
    sol.quasienergies[k] = folded;
    sol.parity[k] = (shift % 2 == 0) ? 1 : -1;
    fix_phase(u0[k]);
  }
  if (basis.degenerate) {
    sol.quasienergies[1] = sol.quasienergies[0];
    sol.parity[1] = sol.parity[0];
  }
  if (sol.quasienergies[0] > sol.quasienergies[1]) {
    std::swap(sol.quasienergies[0], sol.quasienergies[1]);
    std::swap(sol.parity[0], sol.parity[1]);
    std::swap(u0[0], u0[1]);
  }

  for (int k = 0; k < 2; ++k) {
    const Vec2 residual =
        sol.monodromy * u0[k] - std::exp(cplx(0.0, -sol.quasienergies[k] * period)) * u0[k];
    if (residual.norm() > 1e-7) {
      std::ostringstream os;
      os << "Floquet eigenvector check failed (residual " << residual.norm() << ")";
      throw IntegrationError(os.str(), period);
    }
  }

  sol.modes.resize(nt + 1);
  for (int m = 0; m <= nt; ++m) {
    for (int k = 0; k < 2; ++k) {
      sol.modes[m][k] =
          std::exp(cplx(0.0, sol.quasienergies[k] * sol.times[m])) * (sol.propagators[m] * u0[k]);
    }
  }
  return sol;
}

Vec2 FloquetSolution::mode(int k, double t) const {
  const double period = drive.period();
  double s = t - period * std::floor(t / period);
  const int nt = samples();
  const double dt = period / nt;
  int m = std::clamp(static_cast<int>(std::floor(s / dt)), 0, nt - 1);
  const double ds = s - times[m];
  if (std::abs(ds) < 1e-13) return modes[m][k];
  const Mat2 step = propagate(drive, times[m], s);
  return std::exp(cplx(0.0, quasienergies[k] * ds)) * (step * modes[m][k]);
}

Mat2 FloquetSolution::propagator(double t) const {
  Mat2 u = Mat2::Zero();
  for (int k = 0; k < 2; ++k) {
    u += std::exp(cplx(0.0, -quasienergies[k] * t)) * mode(k, t) * mode0(k).adjoint();
  }
  return u;
}

void FloquetSolution::swap_labels() {
  std::swap(quasienergies[0], quasienergies[1]);
  std::swap(parity[0], parity[1]);
  for (auto& m : modes) std::swap(m[0], m[1]);
}

void label_continuation(std::vector<FloquetSolution>& path) {
  if (path.empty()) return;
  const Vec2 excited(1.0, 0.0);
  if (std::abs(excited.dot(path[0].mode0(1))) > std::abs(excited.dot(path[0].mode0(0)))) {
    path[0].swap_labels();
  }
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto& prev = path[i - 1];
    auto& cur = path[i];
    const double o00 = std::abs(prev.mode0(0).dot(cur.mode0(0)));
    const double o11 = std::abs(prev.mode0(1).dot(cur.mode0(1)));
    const double o01 = std::abs(prev.mode0(0).dot(cur.mode0(1)));
    const double o10 = std::abs(prev.mode0(1).dot(cur.mode0(0)));
    const double keep = std::min(o00, o11);
    const double swap = std::min(o01, o10);
    if (std::max(keep, swap) < std::sqrt(0.5) + 1e-9) {
      std::ostringstream os;
      os << "ambiguous Floquet mode relabeling at path index " << i << " (overlaps " << keep
         << ", " << swap << ")";
      throw std::runtime_error(os.str());
    }
    if (swap > keep) cur.swap_labels();
  }
}

const Mat2& CoefficientTable::at(int n) const {
  if (n < -n_max || n > n_max) throw std::out_of_range("harmonic index outside coefficient table");
  return c[n + n_max];
}

CoefficientTable fourier_coefficients(const FloquetSolution& solution, int n_max) {
  const int nt = solution.samples();
  if (n_max < 0) throw ValidationError("n_max must be >= 0");
  if (nt < 4 * n_max) {
    std::ostringstream os;
    os << "time_samples = " << nt << " too small for n_max = " << n_max << " (need >= 4 n_max)";
    throw ValidationError(os.str());
  }
  const Mat2 sx = pauli::x();
  std::vector<Mat2> f(nt);
  for (int m = 0; m < nt; ++m) {
    Mat2 u;
    u.col(0) = solution.modes[m][0];
    u.col(1) = solution.modes[m][1];
    f[m] = u.adjoint() * sx * u;
  }
  CoefficientTable table;
  table.n_max = n_max;
  table.c.assign(2 * n_max + 1, Mat2::Zero());
  for (int n = -n_max; n <= n_max; ++n) {
    Mat2 acc = Mat2::Zero();
    for (int m = 0; m < nt; ++m) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(n) * m / nt;
      acc += std::polar(1.0, phase) * f[m];
    }
    table.c[n + n_max] = acc / static_cast<double>(nt);
  }
  table.edge_magnitude =
      std::max(table.at(n_max).cwiseAbs().maxCoeff(), table.at(-n_max).cwiseAbs().maxCoeff());
  table.aliasing = table.edge_magnitude > aliasing_threshold;
  return table;
}

double quasienergy_gap(const DriveSpec& drive, double tol) {
  drive.validate();
  const double period = drive.period();
  const Mat2 half = propagate(drive, 0.0, 0.5 * period, tol * 1e-2);
  const ParityBasis basis = unitary_eigenbasis(pauli::z() * half);
  std::array<double, 2> e{};
  for (int k = 0; k < 2; ++k) {
    e[k] = fold_quasienergy(-2.0 * std::arg(basis.eigenvalues[k]) / period, drive.omega);
  }
  return circle_gap(e[0], e[1], drive.omega);
}

std::vector<double> find_crossings(DriveSpec drive, double lo, double hi,
                                   const CrossingOptions& options) {
  if (!(hi > lo)) throw ValidationError("crossing search requires hi > lo");
  if (!(options.grid_step > 0.0)) throw ValidationError("crossing grid step must be > 0");
  const int n = static_cast<int>(std::lround((hi - lo) / options.grid_step));
  std::vector<double> grid(n + 1), gap(n + 1);
  auto gap_at = [&](double amp) {
    drive.amplitude = amp;
    return quasienergy_gap(drive);
  };
  for (int i = 0; i <= n; ++i) {
    grid[i] = lo + (hi - lo) * i / n;
    gap[i] = gap_at(grid[i]);
  }

  std::vector<double> out;
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 1; i < n; ++i) {
    if (!(gap[i] <= gap[i - 1] && gap[i] < gap[i + 1]) || gap[i] > options.max_gap) continue;
    double a = grid[i - 1], b = grid[i + 1];
    double x1 = b - golden * (b - a), x2 = a + golden * (b - a);
    double f1 = gap_at(x1), f2 = gap_at(x2);
    while (b - a > options.refine_tol) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - golden * (b - a);
        f1 = gap_at(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + golden * (b - a);
        f2 = gap_at(x2);
      }
    }
    const double loc = 0.5 * (a + b);
    if (out.empty() || loc - out.back() > options.refine_tol) out.push_back(loc);
  }
  return out;
}

}  // namespace floqmem

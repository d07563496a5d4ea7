#pragma once

#include "floqmem/qcore.hpp"

#include <array>
#include <vector>

namespace floqmem {

// H_S(t) = (omega0 / 2) sigma_z - amplitude * cos(omega t) sigma_x.
struct DriveSpec {
  double omega0 = 1.0;
  double omega = 1.0;
  double amplitude = 0.0;

  double period() const;
  void validate() const;
};

Mat2 hamiltonian(const DriveSpec& drive, double t);

// Time-ordered propagator U(t1, t0).
Mat2 propagate(const DriveSpec& drive, double t0, double t1, double tol = 1e-12);

// Folds a quasienergy into the zone [-omega/2, omega/2).
double fold_quasienergy(double e, double omega);
// Distance on the quasienergy circle of circumference omega.
double circle_gap(double e1, double e2, double omega);

struct FloquetOptions {
  int time_samples = 512;  // samples per period, even
  double tol = 1e-10;      // propagation tolerance
};

struct FloquetSolution {
  DriveSpec drive;
  std::array<double, 2> quasienergies{};  // ascending after floquet_solve
  std::array<int, 2> parity{};            // eigenvalue sign of sigma_z U(T/2)
  bool parity_degenerate = false;
  std::vector<double> times;                // N_t + 1 samples over [0, T]
  std::vector<std::array<Vec2, 2>> modes;   // modes[m][k] = u_k(t_m)
  std::vector<Mat2> propagators;            // U(t_m)
  Mat2 monodromy;

  int samples() const { return static_cast<int>(times.size()) - 1; }
  const Vec2& mode0(int k) const { return modes.front()[k]; }
  // Periodic mode u_k(t) for arbitrary t.
  Vec2 mode(int k, double t) const;
  // U(t) reconstructed from the Floquet decomposition.
  Mat2 propagator(double t) const;
  void swap_labels();
};

FloquetSolution floquet_solve(const DriveSpec& drive, const FloquetOptions& options = {});

// Relabels a sequence of solutions along a parameter path by maximal overlap
// with the previous point. The first element is anchored so that u_1 has the
// larger overlap with |e>.
void label_continuation(std::vector<FloquetSolution>& path);

struct CoefficientTable {
  int n_max = 0;
  std::vector<Mat2> c;  // c[n + n_max](i, j) = c^n_ij
  bool aliasing = false;
  double edge_magnitude = 0.0;  // max |c^{+-n_max}_ij|

  const Mat2& at(int n) const;
  cplx operator()(int n, int i, int j) const { return at(n)(i, j); }
};

// c^n_ij = (1/T) int_0^T e^{-i n omega t} <u_i(t)|sigma_x|u_j(t)> dt (discrete).
CoefficientTable fourier_coefficients(const FloquetSolution& solution, int n_max);

inline constexpr double aliasing_threshold = 1e-3;

double quasienergy_gap(const DriveSpec& drive, double tol = 1e-10);

struct CrossingOptions {
  double grid_step = 0.01;
  double refine_tol = 1e-4;
  double max_gap = 0.05;  // minima above this are not crossings
};

std::vector<double> find_crossings(DriveSpec drive, double lo, double hi,
                                   const CrossingOptions& options = {});

}  // namespace floqmem

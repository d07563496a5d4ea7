#pragma once

#include "floqmem/bath.hpp"
#include "floqmem/floquet.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace floqmem {

enum class DissipatorVariant { generic, nondegenerate, degenerate };

std::string to_string(DissipatorVariant v);

// Jump operator in the Floquet basis {u_1(0), u_2(0)}.
struct JumpChannel {
  std::string label;
  Mat2 op;
  double frequency = 0.0;
  double rate = 0.0;
};

struct DissipatorSpec {
  DissipatorVariant variant = DissipatorVariant::generic;
  std::vector<JumpChannel> channels;
  // Rates of the reduced models; zero where not applicable.
  double gamma_down = 0.0;
  double gamma_up = 0.0;
  double gamma_x = 0.0;
  double gamma_z = 0.0;
  double c11_abs = 0.0;

  // Interaction-picture generator acting on row-major vec(rho).
  Mat4 liouvillian() const;
  nlohmann::json to_json() const;
};

class DegeneracyError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double degeneracy_threshold = 0.01;  // in units of the drive frequency
inline constexpr double frequency_bin_tolerance = 1e-6;

DissipatorSpec build_generic(const CoefficientTable& table, const FloquetSolution& solution,
                             const BathSpec& bath, double bin_tol = frequency_bin_tolerance);

DissipatorSpec build_nondegenerate(const FloquetSolution& solution, const BathSpec& bath,
                                   double c11_abs = 0.2);

DissipatorSpec build_degenerate(const BathSpec& bath, double c11_abs = 0.2, double omega = 1.0);

struct LindbladTrajectory {
  std::vector<double> times;
  std::vector<Mat2> states;  // Floquet basis, interaction picture
};

LindbladTrajectory evolve(const DissipatorSpec& spec, const DensityMatrix& rho0,
                          std::span<const double> times);

// Dynamical maps exp(L t) on row-major vec(rho) in the Floquet basis.
std::vector<Mat4> lindblad_maps(const DissipatorSpec& spec, std::span<const double> times);

// rho_lab(t) = sum_ij rho_ij e^{-i(e_i - e_j)t} |u_i(t)><u_j(t)|.
Mat2 to_lab_frame(const FloquetSolution& solution, const Mat2& interaction, double t);
// Lab-frame state at t = 0 expressed in the Floquet basis.
Mat2 to_floquet_basis(const FloquetSolution& solution, const Mat2& lab);
// <u_i(t)|rho_lab|u_j(t)>.
Mat2 floquet_frame(const FloquetSolution& solution, const Mat2& lab, double t);

struct RelaxationTimes {
  double diag = 0.0;
  double off = 0.0;  // non-degenerate coherence
  double re = 0.0;   // degenerate, real part of the coherence
  double im = 0.0;   // degenerate, imaginary part of the coherence
};

RelaxationTimes relaxation_times(const DissipatorSpec& spec);

}  // namespace floqmem

#include "floqmem/lindblad.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace floqmem {

std::string to_string(DissipatorVariant v) {
  switch (v) {
    case DissipatorVariant::generic:
      return "generic";
    case DissipatorVariant::nondegenerate:
      return "nondegenerate";
    case DissipatorVariant::degenerate:
      return "degenerate";
  }
  return "unknown";
}

namespace {

Mat2 unit(int i, int j) {
  Mat2 m = Mat2::Zero();
  m(i, j) = 1.0;
  return m;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

double zero_frequency_rate(const BathSpec& bath) { return rate(bath, +0.0) + rate(bath, -0.0); }

}  // namespace

Mat4 DissipatorSpec::liouvillian() const {
  Mat4 l = Mat4::Zero();
  const Mat2 id = Mat2::Identity();
  for (const auto& ch : channels) {
    const Mat2& a = ch.op;
    const Mat2 ada = a.adjoint() * a;
    l += ch.rate * (kron(a, a.conjugate()) - 0.5 * kron(ada, id) - 0.5 * kron(id, ada.transpose()));
  }
  return l;
}

nlohmann::json DissipatorSpec::to_json() const {
  nlohmann::json j;
  j["variant"] = to_string(variant);
  j["channels"] = nlohmann::json::array();
  for (const auto& ch : channels) {
    nlohmann::json op = nlohmann::json::array();
    for (int r = 0; r < 2; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < 2; ++c) row.push_back({ch.op(r, c).real(), ch.op(r, c).imag()});
      op.push_back(row);
    }
    j["channels"].push_back(
        {{"label", ch.label}, {"frequency", ch.frequency}, {"rate", ch.rate}, {"operator", op}});
  }
  j["gamma_down"] = gamma_down;
  j["gamma_up"] = gamma_up;
  j["gamma_x"] = gamma_x;
  j["gamma_z"] = gamma_z;
  j["c11_abs"] = c11_abs;
  return j;
}

DissipatorSpec build_generic(const CoefficientTable& table, const FloquetSolution& solution,
                             const BathSpec& bath, double bin_tol) {
  bath.validate();
  if (!(bin_tol > 0.0)) throw ValidationError("frequency bin tolerance must be > 0");
  const double w = solution.drive.omega;

  struct Transition {
    double frequency;
    Mat2 op;
  };
  std::vector<Transition> transitions;
  for (int n = -table.n_max; n <= table.n_max; ++n) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const cplx c = table(n, i, j);
        if (std::abs(c) < 1e-14) continue;
        const double wf = solution.quasienergies[j] - solution.quasienergies[i] - n * w;
        transitions.push_back({wf, c * unit(i, j)});
      }
    }
  }
  std::stable_sort(transitions.begin(), transitions.end(),
                   [](const Transition& a, const Transition& b) { return a.frequency < b.frequency; });

  DissipatorSpec spec;
  spec.variant = DissipatorVariant::generic;
  const double tol = bin_tol * w;
  std::size_t k = 0;
  while (k < transitions.size()) {
    std::size_t end = k + 1;
    while (end < transitions.size() && transitions[end].frequency - transitions[k].frequency <= tol) ++end;
    Mat2 op = Mat2::Zero();
    double mean = 0.0;
    for (std::size_t m = k; m < end; ++m) {
      op += transitions[m].op;
      mean += transitions[m].frequency;
    }
    mean /= static_cast<double>(end - k);
    JumpChannel ch;
    ch.op = op;
    if (std::abs(mean) <= tol) {
      ch.frequency = 0.0;
      ch.rate = zero_frequency_rate(bath);
    } else {
      ch.frequency = mean;
      ch.rate = rate(bath, mean);
    }
    std::ostringstream os;
    os << "A(" << ch.frequency << ")";
    ch.label = os.str();
    if (op.cwiseAbs().maxCoeff() > 1e-14 && ch.rate > 0.0) spec.channels.push_back(ch);
    k = end;
  }
  return spec;
}

DissipatorSpec build_nondegenerate(const FloquetSolution& solution, const BathSpec& bath,
                                   double c11_abs) {
  bath.validate();
  const double w = solution.drive.omega;
  const double e1 = solution.quasienergies[0];
  const double e2 = solution.quasienergies[1];
  const double gap = circle_gap(e1, e2, w);
  if (gap <= degeneracy_threshold * w) {
    std::ostringstream os;
    os << "quasienergy gap " << gap << " is within the degeneracy threshold; use the degenerate model";
    throw DegeneracyError(os.str());
  }
  const double delta = e2 - e1;
  if (!(delta > 0.0)) throw DegeneracyError("non-degenerate model requires e2 > e1");

  DissipatorSpec spec;
  spec.variant = DissipatorVariant::nondegenerate;
  spec.gamma_down = rate(bath, delta);
  spec.gamma_up = rate(bath, -delta);
  spec.gamma_z = rate(bath, w) + rate(bath, -w);
  spec.c11_abs = c11_abs;
  spec.channels.push_back({"down", unit(0, 1), delta, spec.gamma_down});
  spec.channels.push_back({"up", unit(1, 0), -delta, spec.gamma_up});
  spec.channels.push_back({"dephasing", c11_abs * pauli::z(), w, spec.gamma_z});
  return spec;
}

DissipatorSpec build_degenerate(const BathSpec& bath, double c11_abs, double omega) {
  bath.validate();
  DissipatorSpec spec;
  spec.variant = DissipatorVariant::degenerate;
  spec.gamma_x = zero_frequency_rate(bath);
  spec.gamma_z = rate(bath, omega) + rate(bath, -omega);
  spec.c11_abs = c11_abs;
  spec.channels.push_back({"sigma_x", pauli::x(), 0.0, spec.gamma_x});
  spec.channels.push_back({"dephasing", c11_abs * pauli::z(), omega, spec.gamma_z});
  return spec;
}

std::vector<Mat4> lindblad_maps(const DissipatorSpec& spec, std::span<const double> times) {
  const Mat4 l = spec.liouvillian();
  std::vector<Mat4> maps;
  maps.reserve(times.size());
  for (double t : times) maps.push_back((l * t).exp());
  return maps;
}

LindbladTrajectory evolve(const DissipatorSpec& spec, const DensityMatrix& rho0,
                          std::span<const double> times) {
  LindbladTrajectory traj;
  traj.times.assign(times.begin(), times.end());
  const Vec4 v0 = vectorize(rho0.matrix());
  for (const Mat4& m : lindblad_maps(spec, times)) traj.states.push_back(unvectorize(m * v0));
  return traj;
}

Mat2 to_lab_frame(const FloquetSolution& solution, const Mat2& interaction, double t) {
  Mat2 u;
  for (int k = 0; k < 2; ++k) {
    u.col(k) = std::exp(cplx(0.0, -solution.quasienergies[k] * t)) * solution.mode(k, t);
  }
  return u * interaction * u.adjoint();
}

Mat2 to_floquet_basis(const FloquetSolution& solution, const Mat2& lab) {
  return floquet_basis_elements(lab, solution.mode0(0), solution.mode0(1));
}

Mat2 floquet_frame(const FloquetSolution& solution, const Mat2& lab, double t) {
  Mat2 u;
  u.col(0) = solution.mode(0, t);
  u.col(1) = solution.mode(1, t);
  return u.adjoint() * lab * u;
}

RelaxationTimes relaxation_times(const DissipatorSpec& spec) {
  RelaxationTimes out;
  const double c2 = spec.c11_abs * spec.c11_abs;
  switch (spec.variant) {
    case DissipatorVariant::nondegenerate: {
      const double sum = spec.gamma_down + spec.gamma_up;
      out.diag = 1.0 / sum;
      out.off = 1.0 / (0.5 * sum + 2.0 * c2 * spec.gamma_z);
      break;
    }
    case DissipatorVariant::degenerate:
      out.diag = 1.0 / spec.gamma_x;
      out.re = 1.0 / (2.0 * c2 * spec.gamma_z);
      out.im = 1.0 / (2.0 * (spec.gamma_x + c2 * spec.gamma_z));
      break;
    case DissipatorVariant::generic:
      throw std::invalid_argument("closed-form relaxation times exist only for the reduced models");
  }
  return out;
}

}  // namespace floqmem

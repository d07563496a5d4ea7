#include "floqmem/bath.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace floqmem {

void BathSpec::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("bath alpha must be >= 0");
  if (!(omega_c > 0.0) || !std::isfinite(omega_c)) throw ValidationError("bath omega_c must be > 0");
  if (!(beta > 0.0)) throw ValidationError("bath beta must be > 0");
  if (pade_terms < 0) throw ValidationError("pade_terms must be >= 0");
}

double spectral_density(const BathSpec& bath, double w) {
  return bath.alpha * bath.omega_c * w / (w * w + bath.omega_c * bath.omega_c);
}

double bose_occupation(double beta, double w) {
  if (!(w > 0.0)) throw std::domain_error("bose occupation requires w > 0");
  if (std::isinf(beta)) return 0.0;
  return 1.0 / std::expm1(beta * w);
}

double rate(const BathSpec& bath, double w) {
  if (std::isinf(bath.beta)) return w > 0.0 ? spectral_density(bath, w) : 0.0;
  if (std::abs(w) < 1e-12) return bath.alpha / (bath.beta * bath.omega_c);
  return spectral_density(bath, w) / -std::expm1(-bath.beta * w);
}

cplx ExponentialSeries::value(double t) const {
  cplx sum = 0.0;
  for (const auto& term : terms) sum += term.eta * std::exp(-term.gamma * t);
  return sum;
}

BosePade bose_pade(int n_terms) {
  BosePade out;
  if (n_terms <= 0) return out;
  const int n = n_terms;

  auto positive_eigenvalues = [](int dim, int offset) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k + 1 < dim; ++k) {
      const double mm = k + 1;
      const double b = 1.0 / std::sqrt((2.0 * mm + offset) * (2.0 * mm + offset + 2.0));
      m(k, k + 1) = b;
      m(k + 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    std::vector<double> pos;
    for (int k = 0; k < dim; ++k) {
      if (es.eigenvalues()(k) > 1e-10) pos.push_back(2.0 / es.eigenvalues()(k));
    }
    std::sort(pos.begin(), pos.end());
    return pos;
  };

  out.poles = positive_eigenvalues(2 * n, 1);
  const std::vector<double> zeta = positive_eigenvalues(2 * n - 1, 3);
  out.residues.resize(out.poles.size());
  for (std::size_t j = 0; j < out.poles.size(); ++j) {
    const double xj2 = out.poles[j] * out.poles[j];
    double value = 0.5 * n * (2.0 * n + 3.0);
    for (double z : zeta) value *= z * z - xj2;
    for (std::size_t k = 0; k < out.poles.size(); ++k) {
      if (k != j) value /= out.poles[k] * out.poles[k] - xj2;
    }
    out.residues[j] = value;
  }
  return out;
}

ExponentialSeries pade_series(const BathSpec& bath, int n_terms) {
  bath.validate();
  if (!std::isfinite(bath.beta)) {
    throw std::domain_error("Pade decomposition requires a finite inverse temperature");
  }
  const double a = bath.alpha;
  const double wc = bath.omega_c;
  const double b = bath.beta;

  ExponentialSeries series;
  const BosePade pade = bose_pade(n_terms);
  const double cot = 1.0 / std::tan(0.5 * b * wc);
  series.terms.push_back({cplx(0.5 * a * wc * cot, -0.5 * a * wc), cplx(wc, 0.0)});
  for (std::size_t j = 0; j < pade.poles.size(); ++j) {
    const double nu = pade.poles[j] / b;
    const double eta = pade.residues[j] * 2.0 * a * wc * nu / (b * (nu * nu - wc * wc));
    series.terms.push_back({cplx(eta, 0.0), cplx(nu, 0.0)});
  }
  return series;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

cplx bose_factor(cplx z, double beta) {
  if (std::isinf(beta)) return z.real() > 0.0 ? 1.0 : 0.0;
  return 1.0 / (1.0 - std::exp(-beta * z));
}

cplx spectral_density_c(const BathSpec& bath, cplx z) {
  return bath.alpha * bath.omega_c * z / (z * z + bath.omega_c * bath.omega_c);
}

struct Accumulator {
  cplx value = 0.0;
  double error = 0.0;
};

template <typename F>
void integrate_complex(F&& f, double a, double b, double tol, Accumulator& acc) {
  double err_re = 0.0, err_im = 0.0;
  const double re = gauss_kronrod<double, 61>::integrate(
      [&](double x) { return f(x).real(); }, a, b, 15, tol, &err_re);
  const double im = gauss_kronrod<double, 61>::integrate(
      [&](double x) { return f(x).imag(); }, a, b, 15, tol, &err_im);
  acc.value += cplx(re, im);
  acc.error += err_re + err_im;
}

}  // namespace

QuadratureResult correlation_quadrature(const BathSpec& bath, double t, double tol, double cutoff) {
  bath.validate();
  if (t < 0.0) throw std::domain_error("correlation quadrature requires t >= 0");
  if (!(cutoff > 0.0)) throw std::domain_error("quadrature cutoff must be > 0");

  const double zero_limit = std::isinf(bath.beta) ? 0.0 : bath.alpha / (bath.beta * bath.omega_c);
  auto h = [&](double w) -> double {
    if (std::abs(w) < 1e-12) return zero_limit;
    return rate(bath, w);
  };

  Accumulator acc;
  const double panel = std::min(1.0, t > 0.0 ? 0.5 * std::numbers::pi / t : 1.0);
  const int panels = static_cast<int>(std::ceil(cutoff / panel));
  const double width = cutoff / panels;
  for (int side = -1; side <= 1; side += 2) {
    for (int k = 0; k < panels; ++k) {
      double lo = side * k * width;
      double hi = side * (k + 1) * width;
      if (lo > hi) std::swap(lo, hi);
      integrate_complex([&](double w) { return std::exp(cplx(0.0, -w * t)) * h(w); }, lo, hi, tol,
                        acc);
    }
  }

  QuadratureResult result;
  if (t == 0.0) {
    result.value = acc.value / std::numbers::pi;
    result.error_estimate = acc.error / std::numbers::pi;
    result.truncated = true;
    result.converged = result.error_estimate < 1e3 * tol * std::max(1.0, std::abs(result.value));
    return result;
  }

  // Tails beyond +-cutoff along rays rotated into the lower half plane, where
  // e^{-i w t} decays and no poles of the integrand lie.
  auto tail = [&](double w0) {
    return [&, w0](double y) {
      const cplx z(w0, -y);
      return std::exp(-y * t) * spectral_density_c(bath, z) * bose_factor(z, bath.beta);
    };
  };
  Accumulator right, left;
  integrate_complex(tail(cutoff), 0.0, std::numeric_limits<double>::infinity(), tol, right);
  integrate_complex(tail(-cutoff), 0.0, std::numeric_limits<double>::infinity(), tol, left);
  acc.value += cplx(0.0, -1.0) * std::exp(cplx(0.0, -cutoff * t)) * right.value;
  acc.value += cplx(0.0, 1.0) * std::exp(cplx(0.0, cutoff * t)) * left.value;
  acc.error += right.error + left.error;

  result.value = acc.value / std::numbers::pi;
  result.error_estimate = acc.error / std::numbers::pi;
  result.converged = result.error_estimate < 1e3 * tol * std::max(1.0, std::abs(result.value));
  return result;
}

}  // namespace floqmem

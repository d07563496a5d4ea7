#include <doctest.h>

#include "floqmem/bath.hpp"

#include <cmath>

using namespace floqmem;

namespace {
BathSpec reference_bath(int k = 8) { return {0.1, 1.0, 1.0, k}; }
}  // namespace

TEST_CASE("spectral density and occupation") {
  const BathSpec bath = reference_bath();
  CHECK(spectral_density(bath, 1.0) == doctest::Approx(0.05));
  CHECK(spectral_density(bath, -2.0) == doctest::Approx(-spectral_density(bath, 2.0)));
  CHECK(bose_occupation(1.0, 1.0) == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)));
  CHECK(bose_occupation(std::numeric_limits<double>::infinity(), 1.0) == 0.0);
  CHECK_THROWS(bose_occupation(1.0, 0.0));
}

TEST_CASE("rates satisfy detailed balance and the zero-frequency limit") {
  const BathSpec bath = reference_bath();
  const double n1 = bose_occupation(1.0, 1.0);
  CHECK(rate(bath, 1.0) == doctest::Approx(0.05 * (n1 + 1.0)).epsilon(1e-12));
  CHECK(rate(bath, -1.0) == doctest::Approx(0.05 * n1).epsilon(1e-12));
  for (double w : {0.3, 1.0, 2.5}) {
    CHECK(rate(bath, w) / rate(bath, -w) == doctest::Approx(std::exp(bath.beta * w)).epsilon(1e-12));
  }
  CHECK(rate(bath, 0.0) == doctest::Approx(0.1));
  CHECK(rate(bath, 1e-7) == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(rate(bath, -1e-7) == doctest::Approx(0.1).epsilon(1e-6));
  // gamma_z = J(1) (2N(1) + 1) = 0.1082
  CHECK(rate(bath, 1.0) + rate(bath, -1.0) == doctest::Approx(0.1082).epsilon(1e-3));
}

TEST_CASE("bose pade poles and residues") {
  const BosePade one = bose_pade(1);
  REQUIRE(one.poles.size() == 1);
  CHECK(one.poles[0] == doctest::Approx(std::sqrt(60.0)));
  CHECK(one.residues[0] == doctest::Approx(2.5));

  const BosePade two = bose_pade(2);
  REQUIRE(two.poles.size() == 2);
  CHECK(two.poles[0] == doctest::Approx(6.3064).epsilon(1e-4));
  CHECK(two.residues[0] == doctest::Approx(1.0327).epsilon(1e-3));

  // Low poles approach the Matsubara frequencies with unit residues.
  const BosePade eight = bose_pade(8);
  REQUIRE(eight.poles.size() == 8);
  CHECK(eight.poles[0] == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
  CHECK(eight.poles[1] == doctest::Approx(4.0 * M_PI).epsilon(1e-7));
  CHECK(eight.residues[0] == doctest::Approx(1.0).epsilon(1e-9));

  // The approximant reproduces the Bose function at moderate arguments.
  for (double x : {0.3, 1.0, 5.0, 20.0}) {
    double approx = 1.0 / x + 0.5;
    for (std::size_t j = 0; j < eight.poles.size(); ++j) {
      approx += 2.0 * eight.residues[j] * x / (x * x + eight.poles[j] * eight.poles[j]);
    }
    CHECK(approx == doctest::Approx(1.0 / (1.0 - std::exp(-x))).epsilon(1e-10));
  }
}

TEST_CASE("pade series structure") {
  const ExponentialSeries s = pade_series(reference_bath(), 8);
  REQUIRE(s.size() == 9);
  CHECK(s.terms[0].eta.imag() == doctest::Approx(-0.05));
  CHECK(s.terms[0].eta.real() == doctest::Approx(0.05 / std::tan(0.5)));
  CHECK(s.terms[0].gamma.real() == doctest::Approx(1.0));
  for (std::size_t j = 1; j < s.size(); ++j) {
    CHECK(s.terms[j].eta.imag() == 0.0);
    CHECK(s.terms[j].gamma.real() > 0.0);
  }
  CHECK(s.terms[1].gamma.real() == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
  CHECK_THROWS(pade_series({0.1, 1.0, std::numeric_limits<double>::infinity(), 8}, 8));
}

TEST_CASE("pade series obeys the zero-frequency sum rule") {
  for (int k : {3, 4, 8}) {
    const ExponentialSeries s = pade_series(reference_bath(k), k);
    double sum = 0.0;
    for (const auto& term : s.terms) sum += (term.eta / term.gamma).real();
    CHECK(sum == doctest::Approx(0.1).epsilon(1e-10));
  }
  const ExponentialSeries low = pade_series(reference_bath(1), 1);
  double sum1 = 0.0;
  for (const auto& term : low.terms) sum1 += (term.eta / term.gamma).real();
  CHECK(sum1 == doctest::Approx(0.1).epsilon(1e-4));
}

TEST_CASE("imaginary part of the correlation function is exact") {
  const ExponentialSeries s = pade_series(reference_bath(), 8);
  for (double t : {0.0, 0.3, 1.0, 4.0}) {
    CHECK(s.value(t).imag() == doctest::Approx(-0.05 * std::exp(-t)).epsilon(1e-14));
  }
}

TEST_CASE("pade series agrees with direct quadrature") {
  const BathSpec bath = reference_bath();
  const ExponentialSeries s = pade_series(bath, 8);
  for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const QuadratureResult q = correlation_quadrature(bath, t);
    CHECK(q.converged);
    CHECK_FALSE(q.truncated);
    const double rel = std::abs(s.value(t) - q.value) / std::abs(q.value);
    CHECK(rel < 1e-3);
  }
  // Exact imaginary part as an independent check of the quadrature.
  const QuadratureResult q1 = correlation_quadrature(bath, 1.0);
  CHECK(q1.value.imag() == doctest::Approx(-0.05 * std::exp(-1.0)).epsilon(1e-7));
}

TEST_CASE("correlation at t = 0 is flagged as cutoff dependent") {
  const BathSpec bath = reference_bath();
  const QuadratureResult a = correlation_quadrature(bath, 0.0, 1e-10, 50.0);
  const QuadratureResult b = correlation_quadrature(bath, 0.0, 1e-10, 500.0);
  CHECK(a.truncated);
  // Logarithmic growth of Re C(0) with the cutoff.
  CHECK(b.value.real() - a.value.real() ==
        doctest::Approx(0.1 / M_PI * std::log(10.0)).epsilon(1e-2));
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(BathSpec({-1.0, 1.0, 1.0, 8}).validate(), ValidationError);
  CHECK_THROWS_AS(BathSpec({0.1, 0.0, 1.0, 8}).validate(), ValidationError);
  CHECK_THROWS_AS(correlation_quadrature(reference_bath(), -1.0), std::domain_error);
}

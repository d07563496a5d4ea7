#include <doctest.h>

#include "floqmem/heom.hpp"

#include <cmath>

using namespace floqmem;

namespace {

const BathSpec kPaperBath{0.1, 1.0, 1.0, 2};

std::vector<double> grid(double t_end, int n) {
  std::vector<double> t;
  for (int k = 0; k <= n; ++k) t.push_back(t_end * k / n);
  return t;
}

HeomSettings tier(int l) {
  HeomSettings s;
  s.tier = l;
  return s;
}

}  // namespace

TEST_CASE("hierarchy size is the binomial count") {
  const ExponentialSeries series = pade_series(kPaperBath, 2);
  const Hierarchy h(series, 6, 100000);
  CHECK(h.modes() == 3);
  CHECK(h.size() == 84);
  CHECK(Hierarchy::count(3, 6) == doctest::Approx(84.0));
  CHECK(Hierarchy::count(9, 6) == doctest::Approx(5005.0));
  CHECK(h.level(0) == 0);
  for (std::size_t a = 1; a < h.size(); ++a) CHECK(h.level(a) >= h.level(a - 1));
  CHECK_THROWS_AS(Hierarchy(series, 6, 50), HierarchyTooLarge);
}

TEST_CASE("settings validation") {
  HeomSettings s;
  s.tier = -1;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = HeomSettings{};
  s.rtol = 0.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("vanishing coupling reproduces unitary evolution") {
  const DriveSpec drive{1.0, 1.0, 2.2};
  const BathSpec weak{1e-6, 1.0, 1.0, 2};
  const DensityMatrix rho0 = DensityMatrix::from_bloch({0.3, -0.4, 0.5});
  const std::vector<double> t = grid(20.0, 40);
  const HeomTrajectory tr = heom_evolve(drive, weak, rho0, tier(4), t);
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Mat2 u = propagate(drive, 0.0, t[k]);
    worst = std::max(worst, trace_distance(tr.states[k], u * rho0.matrix() * u.adjoint()));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("weak coupling matches the golden-rule rate model") {
  // Static qubit, alpha = 0.01: p_e' = -g_down p_e + g_up (1 - p_e).
  const DriveSpec drive{1.0, 1.0, 0.0};
  const BathSpec weak{0.01, 1.0, 1.0, 2};
  const double down = rate(weak, 1.0);
  const double up = rate(weak, -1.0);
  const std::vector<double> t = grid(60.0, 6);
  const HeomTrajectory tr = heom_evolve(drive, weak, DensityMatrix::pure({1.0, 0.0}), tier(4), t);
  const double eq = up / (up + down);
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double expected = eq + (1.0 - eq) * std::exp(-(up + down) * t[k]);
    CHECK(tr.states[k](0, 0).real() == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("trajectories stay physical at paper parameters") {
  const DriveSpec drive{1.0, 1.0, 4.27};
  const std::vector<double> t = grid(3.0 * drive.period(), 120);
  const HeomTrajectory tr = heom_evolve(drive, kPaperBath, DensityMatrix::from_bloch({0.6, 0.0, 0.8}), tier(6), t);
  REQUIRE(tr.states.size() == t.size());
  CHECK(tr.ado_count == 84);
  for (const Mat2& rho : tr.states) {
    CHECK(std::abs(rho.trace() - 1.0) < 1e-8);
    CHECK(hermiticity_error(rho) < 1e-9);
    CHECK(eigh(0.5 * (rho + rho.adjoint())).values[0] > -1e-8);
  }
  CHECK(tr.warnings.empty());
}

TEST_CASE("low tiers trigger the truncation warning") {
  const DriveSpec drive{1.0, 1.0, 4.27};
  const std::vector<double> t = grid(drive.period(), 10);
  const HeomTrajectory tr = heom_evolve(drive, kPaperBath, DensityMatrix::pure({1.0, 0.0}), tier(1), t);
  CHECK(tr.top_tier_ratio > 1e-4);
  CHECK_FALSE(tr.warnings.empty());
}

TEST_CASE("tier self-convergence") {
  const DriveSpec drive{1.0, 1.0, 4.27};
  const std::vector<double> t = grid(2.0 * drive.period(), 20);
  const DensityMatrix rho0 = DensityMatrix::pure({1.0, 0.0});
  const HeomTrajectory a = heom_evolve(drive, kPaperBath, rho0, tier(5), t);
  const HeomTrajectory b = heom_evolve(drive, kPaperBath, rho0, tier(6), t);
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) worst = std::max(worst, (a.states[k] - b.states[k]).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-4);
}

TEST_CASE("monodromy, streamed and direct maps agree") {
  const DriveSpec drive{1.0, 1.0, 2.7};
  const HeomSettings s = tier(3);
  const double period = drive.period();
  std::vector<double> t;
  for (int m = 0; m < 3; ++m)
    for (int k = 1; k <= 8; ++k) t.push_back(period * m + period * k / 8.0);
  const ProcessFamily mono = heom_propagator(drive, kPaperBath, s, t, PropagatorMethod::monodromy);
  const ProcessFamily direct = heom_propagator(drive, kPaperBath, s, t, PropagatorMethod::direct);
  HeomMapStream stream(drive, kPaperBath, s, 8);
  std::vector<Mat4> streamed;
  for (int m = 0; m < 3; ++m)
    for (Mat4& x : stream.advance()) streamed.push_back(x);
  REQUIRE(streamed.size() == t.size());
  CHECK(stream.time() == doctest::Approx(3.0 * period));
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK((mono.maps[k] - direct.maps[k]).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((streamed[k] - direct.maps[k]).cwiseAbs().maxCoeff() < 1e-6);
  }
  const ProcessFamily automatic = heom_propagator(drive, kPaperBath, s, t);
  CHECK((automatic.maps.back() - direct.maps.back()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("maps are trace preserving") {
  const DriveSpec drive{1.0, 1.0, 6.5};
  HeomMapStream stream(drive, kPaperBath, tier(4), 4);
  for (const Mat4& m : stream.advance()) {
    // Trace of the image of each matrix unit.
    for (int col = 0; col < 4; ++col) {
      const cplx tr = m(0, col) + m(3, col);
      CHECK(std::abs(tr - (col == 0 || col == 3 ? 1.0 : 0.0)) < 1e-9);
    }
  }
}

#include <doctest.h>

#include "floqmem/analysis.hpp"

#include <cmath>

using namespace floqmem;

namespace {

const BathSpec kPaperBath{0.1, 1.0, 1.0, 2};

ProcessFamily identity_family(int n) {
  ProcessFamily f;
  for (int k = 0; k < n; ++k) {
    f.times.push_back(0.1 * k);
    f.maps.push_back(Mat4::Identity());
  }
  return f;
}

ProcessFamily lindblad_family(const DissipatorSpec& d, double t_end, int n) {
  ProcessFamily f;
  for (int k = 0; k <= n; ++k) f.times.push_back(t_end * k / n);
  f.maps = lindblad_maps(d, f.times);
  return f;
}

// Phi(E) = tr(E) / 2 + sum_ij m_ij Tr(sigma_j E) sigma_i / 2, linear in E.
Mat4 unital_map(const Eigen::Matrix3d& m) {
  const std::array<Mat2, 3> s{pauli::x(), pauli::y(), pauli::z()};
  Mat4 map;
  for (int j = 0; j < 4; ++j) {
    Vec4 e = Vec4::Zero();
    e(j) = 1.0;
    const Mat2 in = unvectorize(e);
    Mat2 out = 0.5 * in.trace() * Mat2::Identity();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) out += 0.5 * m(a, b) * (s[b] * in).trace() * s[a];
    map.col(j) = vectorize(out);
  }
  return map;
}

SweepConfig quick_config() {
  SweepConfig c;
  c.bath = kPaperBath;
  c.heom.tier = 3;
  c.analysis.n_pairs = 20;
  return c;
}

}  // namespace

TEST_CASE("trace distance curves of trivial families") {
  const DensityMatrix a = DensityMatrix::from_bloch({0.5, 0.0, 0.0});
  const DensityMatrix b = DensityMatrix::from_bloch({-0.5, 0.0, 0.0});
  const TraceDistanceCurve same = trace_distance_curve(identity_family(5), a, a);
  for (double v : same.values) CHECK(v == 0.0);
  const TraceDistanceCurve flat = trace_distance_curve(identity_family(5), a, b);
  for (double v : flat.values) CHECK(v == doctest::Approx(0.5));
  CHECK(blp_measure(flat) == 0.0);
}

TEST_CASE("blp measure sums positive increments") {
  const std::vector<double> d{1.0, 0.2, 0.5, 0.1, 0.3};
  CHECK(blp_measure(d) == doctest::Approx(0.5));
  const std::vector<double> mono{1.0, 0.8, 0.5, 0.5, 0.1};
  CHECK(blp_measure(mono) == 0.0);
}

TEST_CASE("blp measure approximates the integral of the positive derivative") {
  auto dfun = [](double t) { return std::exp(-t) * (1.0 + 0.1 * std::sin(10.0 * t)); };
  auto deriv = [](double t) {
    return std::exp(-t) * (-(1.0 + 0.1 * std::sin(10.0 * t)) + std::cos(10.0 * t));
  };
  std::vector<double> samples;
  for (int k = 0; k <= 2000; ++k) samples.push_back(dfun(0.005 * k));
  // Fine midpoint quadrature of max(D', 0).
  double oracle = 0.0;
  const int n = 2000000;
  const double h = 10.0 / n;
  for (int k = 0; k < n; ++k) oracle += std::max(deriv((k + 0.5) * h), 0.0) * h;
  CHECK(oracle > 0.0);
  CHECK(blp_measure(samples) == doctest::Approx(oracle).epsilon(0.01));
}

TEST_CASE("semigroup maps show no backflow") {
  const FloquetSolution s = floquet_solve({1.0, 1.0, 6.5});
  const DissipatorSpec g = build_generic(fourier_coefficients(s, 32), s, kPaperBath);
  for (const DissipatorSpec& d : {g, build_degenerate(kPaperBath)}) {
    const ProcessFamily f = lindblad_family(d, 60.0, 600);
    const OrthogonalPair p = orthogonal_pair(Eigen::Vector3d(0.3, -0.2, 0.9).normalized());
    const TraceDistanceCurve c = trace_distance_curve(f, p.plus, p.minus);
    CHECK(c.values.front() == doctest::Approx(1.0));
    for (std::size_t k = 1; k < c.values.size(); ++k) CHECK(c.values[k] <= c.values[k - 1] + 1e-8);
    CHECK(maximize_nonmarkovianity(f, 200, 7).value <= 1e-6);
  }
}

TEST_CASE("pair maximization is seeded and nested") {
  ProcessFamily f;
  for (int k = 0; k <= 200; ++k) {
    const double t = 0.05 * k;
    // Oscillating contraction along x only.
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity() * std::exp(-t);
    m(0, 0) = std::exp(-0.2 * t) * (0.8 + 0.2 * std::cos(3.0 * t));
    f.times.push_back(t);
    f.maps.push_back(unital_map(m));
  }
  CHECK((bloch_linear_part(f.maps[10]) - Eigen::Matrix3d(Eigen::Vector3d(std::exp(-0.1) * (0.8 + 0.2 * std::cos(1.5)),
                                                                           std::exp(-0.5), std::exp(-0.5))
                                                           .asDiagonal()))
            .norm() < 1e-12);
  const NonMarkovianityResult a = maximize_nonmarkovianity(f, 50, 11);
  const NonMarkovianityResult b = maximize_nonmarkovianity(f, 50, 11);
  CHECK(a.value == b.value);
  CHECK(a.best_index == b.best_index);
  double prev = 0.0;
  for (int n : {1, 5, 20, 100, 400}) {
    const double v = maximize_nonmarkovianity(f, n, 11).value;
    CHECK(v >= prev);
    prev = v;
  }
  const NonMarkovianityResult big = maximize_nonmarkovianity(f, 400, 11);
  CHECK(std::abs(big.best_axis(0)) > 0.95);
  CHECK(big.value <= blp_measure(pair_distances(f, Eigen::Vector3d::UnitX())) + 1e-12);
  CHECK(axis_angle_deg(Eigen::Vector3d::UnitX(), -Eigen::Vector3d::UnitX()) == doctest::Approx(0.0));
  CHECK(axis_angle_deg(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitZ()) == doctest::Approx(90.0));
}

TEST_CASE("envelope fits of synthetic decays") {
  std::vector<double> t, plain, modulated;
  for (int k = 0; k <= 4000; ++k) {
    t.push_back(0.01 * k);
    plain.push_back(std::exp(-t.back() / 5.0));
    modulated.push_back(std::exp(-t.back() / 5.0) * std::abs(std::cos(10.0 * t.back())));
  }
  EnvelopeOptions opt;
  opt.window = 40;
  const EnvelopeFit a = fit_envelope(t, plain, opt);
  REQUIRE(a.ok);
  CHECK(a.tau == doctest::Approx(5.0).epsilon(0.01));
  CHECK(a.r2 > 0.999);
  const EnvelopeFit b = fit_envelope(t, modulated, opt);
  REQUIRE(b.ok);
  CHECK(b.tau == doctest::Approx(5.0).epsilon(0.03));
  CHECK(b.peaks > 20);

  const std::vector<double> flat(t.size(), 1e-8);
  const EnvelopeFit c = fit_envelope(t, flat, opt);
  CHECK_FALSE(c.ok);
  CHECK_FALSE(c.diagnostic.empty());
}

TEST_CASE("periodic residual removes the periodic orbit") {
  const int p = 20;
  std::vector<double> x;
  for (int k = 0; k <= 60 * p; ++k) {
    const double phase = 2.0 * M_PI * k / p;
    x.push_back(0.3 * std::sin(phase) + std::exp(-0.3 * k / p));
  }
  const std::vector<double> r = periodic_residual(x, p);
  CHECK(r[10 * p + 3] == doctest::Approx(std::exp(-0.3 * (10.0 + 3.0 / p))).epsilon(1e-6));
  CHECK(std::abs(r.back()) < 1e-7);
  CHECK_THROWS_AS(periodic_residual(std::vector<double>(3 * p, 0.0), p), RelaxationFitError);
}

TEST_CASE("fits of Lindblad trajectories close the loop with the closed forms") {
  const DissipatorSpec d = build_degenerate(kPaperBath);
  const int p = 40;
  const double period = 2.0 * M_PI;
  const Mat4 step = lindblad_maps(d, std::vector<double>{period / p})[0];
  std::vector<double> t;
  std::vector<Mat2> states;
  Vec4 v = vectorize(from_bloch_components(Eigen::Vector3d::Ones().normalized()));
  for (int k = 0; k <= 400 * p; ++k) {
    t.push_back(period * k / p);
    states.push_back(unvectorize(v));
    v = step * v;
  }
  const RelaxationFit fit = fit_relaxation_time(t, floquet_elements(states, p), p);
  const RelaxationTimes closed = relaxation_times(d);
  CHECK(fit.tau_element == "re_coh");
  CHECK(fit.tau == doctest::Approx(closed.re).epsilon(0.01));
  for (const ElementFit& e : fit.elements) {
    REQUIRE(e.fit.ok);
    if (e.element == "im_coh") CHECK(e.fit.tau == doctest::Approx(closed.im).epsilon(0.01));
    // sigma_x jumps swap the populations, so their difference relaxes at 2 gamma_x.
    if (e.element == "pop") CHECK(e.fit.tau == doctest::Approx(0.5 / d.gamma_x).epsilon(0.01));
  }
}

TEST_CASE("peak detection") {
  CHECK(detect_peaks(std::vector<double>{1.0}).empty());
  std::vector<double> v(41, 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += 0.01 * std::sin(0.7 * static_cast<double>(i));
  v[10] = 3.0;
  v[30] = 2.0;
  v[20] = std::nan("");
  const std::vector<std::size_t> peaks = detect_peaks(v);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0] == 10);
  CHECK(peaks[1] == 30);
}

TEST_CASE("correspondence matching") {
  const Correspondence empty = correspondence({}, {}, {}, 0.2);
  CHECK(empty.rows.empty());
  CHECK(empty.complete());

  const std::vector<double> crossings{2.68, 4.27};
  const std::vector<double> nm{2.7, 4.3, 3.5};
  const std::vector<double> tau{2.6, 4.2};
  const Correspondence c = correspondence(crossings, nm, tau, 0.2);
  REQUIRE(c.rows.size() == 2);
  CHECK(*c.rows[0].nm_peak == doctest::Approx(2.7));
  CHECK(*c.rows[1].tau_peak == doctest::Approx(4.2));
  REQUIRE(c.unmatched_nm.size() == 1);
  CHECK(c.unmatched_nm[0] == doctest::Approx(3.5));
  CHECK_FALSE(c.complete());

  const std::vector<double> far{3.0};
  const Correspondence d = correspondence(std::vector<double>{2.68}, far, far, 0.2);
  CHECK_FALSE(d.rows[0].nm_peak);
  CHECK(d.unmatched_crossings.size() == 1);
}

TEST_CASE("sigma_x axis in the static limit") {
  const FloquetSolution s = floquet_solve({1.0, 1.5, 0.0});
  const Eigen::Vector3d axis = sigma_x_axis(s, fourier_coefficients(s, 8));
  CHECK(std::abs(axis.norm() - 1.0) < 1e-10);
  CHECK(std::abs(axis(2)) < 1e-10);
}

TEST_CASE("single-point sweep at zero drive has no peaks") {
  SweepConfig c = quick_config();
  c.amplitudes = {0.0};
  const SweepResult r = sweep(c, 1);
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].ok);
  CHECK(r.nm_peaks.empty());
  CHECK(r.tau_peaks.empty());
  CHECK(r.crossings.empty());
  CHECK(correspondence_report(r).rows.empty());
}

TEST_CASE("sweep results do not depend on the worker count") {
  SweepConfig c = quick_config();
  c.amplitudes = {3.0, 6.5, 8.0};
  const SweepResult a = sweep(c, 1);
  const SweepResult b = sweep(c, 3);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].nm == b.points[i].nm);
    CHECK(a.points[i].tau == b.points[i].tau);
    CHECK(a.points[i].best.best_index == b.points[i].best.best_index);
  }
  CHECK(a.points[0].nm != a.points[1].nm);
}

TEST_CASE("failed points are recorded and the sweep continues") {
  SweepConfig c = quick_config();
  c.amplitudes = {3.0, 3.1};
  c.heom.max_ados = 2;
  const SweepResult r = sweep(c, 2);
  CHECK(r.failures() == 2);
  CHECK_FALSE(r.points[0].error.empty());
  CHECK(std::isnan(r.points[0].nm));
}

#include <catch_amalgamated.hpp>

#include <cmath>

#include "pbq/amplitude_sim.hpp"

using namespace pbq;

namespace {

AmplitudeCoefficients constant_kdv() {
  AmplitudeCoefficients c;
  c.kind = AmplitudeKind::kdv;
  c.speed = 1.0;
  c.lambda4 = 24.0;
  c.nu2 = -1.0;
  c.dispersion = 0.5;
  c.nonlinearity = -0.5;
  c.flux_linear = 1.0;
  c.flux_quadratic = 1.0;
  return c;
}

AmplitudeCoefficients constant_burgers() {
  auto c = constant_kdv();
  c.kind = AmplitudeKind::burgers;
  c.dispersion = 0.0;
  return c;
}

AmplitudeCoefficients constant_whitham() {
  auto c = constant_kdv();
  c.kind = AmplitudeKind::whitham;
  c.speed = 0.0;
  c.dispersion = 0.0;
  c.nonlinearity = 0.0;
  return c;
}

double integral(const AmplitudeGrid& g, const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * g.spacing();
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Solitary wave of A_T + d A_XXX + 2n A A_X = 0 with speed v.
double soliton(double X, double v, double d, double n) {
  const double s = 1.0 / std::cosh(0.5 * std::sqrt(v / d) * X);
  return 3.0 * v / (2.0 * n) * s * s;
}

}  // namespace

TEST_CASE("zero amplitude stays zero") {
  const AmplitudeGrid g(64, 40.0);
  const AmplitudeField zero(g);
  CHECK(kdv_evolve(zero, constant_kdv(), 1.0, {1.0}).at(1.0).A == std::vector<double>(64, 0.0));
  CHECK(burgers_evolve(zero, constant_burgers(), 1.0, {1.0}, true).at(1.0).B == std::vector<double>(64, 0.0));
  const auto w = whitham_evolve(zero, zero, constant_whitham(), 1.0, {1.0});
  CHECK(w.at(1.0).A == std::vector<double>(64, 0.0));
  CHECK(w.at(1.0).V == std::vector<double>(64, 0.0));
}

TEST_CASE("KdV solitary wave keeps its shape") {
  const auto cf = constant_kdv();
  const double v = 0.5, d = cf.dispersion, n = cf.nonlinearity;
  const AmplitudeGrid g(256, 60.0);
  const double X0 = 0.5 * g.length;
  AmplitudeField A0(g);
  for (int r = 0; r < g.points; ++r) A0.values[r] = soliton(g.X(r) - X0, v, d, n);

  // stationary residual of the profile in the co-moving frame
  const auto a1 = amplitude_derivative(g, A0.values, 1);
  const auto a3 = amplitude_derivative(g, A0.values, 3);
  double res = 0.0;
  for (int r = 0; r < g.points; ++r) res = std::max(res, std::abs(-v * a1[r] + d * a3[r] + 2.0 * n * A0.values[r] * a1[r]));
  CHECK(res < 1e-8);

  AmplitudeOptions opts;
  opts.dt = 0.002;
  const auto traj = kdv_evolve(A0, cf, 1.0, {1.0}, opts);
  std::vector<double> exact(g.points);
  for (int r = 0; r < g.points; ++r) exact[r] = soliton(g.X(r) - X0 - v, v, d, n);
  CHECK(max_diff(traj.at(1.0).A, exact) < 1e-6);
}

TEST_CASE("KdV conserves mass and momentum") {
  const AmplitudeGrid g(256, 40.0);
  const auto A0 = gaussian_profile(g, 1.0, 2.0);
  REQUIRE(resolved(A0));
  const auto traj = kdv_evolve(A0, constant_kdv(), 1.0, {0.0, 1.0});
  const auto& a0 = traj.at(0.0).A;
  const auto& a1 = traj.at(1.0).A;
  CHECK(std::abs(integral(g, a1) - integral(g, a0)) < 1e-10);
  std::vector<double> s0(a0.size()), s1(a1.size());
  for (std::size_t i = 0; i < a0.size(); ++i) {
    s0[i] = a0[i] * a0[i];
    s1[i] = a1[i] * a1[i];
  }
  CHECK(std::abs(integral(g, s1) - integral(g, s0)) < 1e-8 * integral(g, s0));
}

TEST_CASE("KdV step halving shows fourth order") {
  const AmplitudeGrid g(128, 40.0);
  const auto A0 = gaussian_profile(g, 1.0, 2.0);
  auto run = [&](double dt) {
    AmplitudeOptions o;
    o.dt = dt;
    return kdv_evolve(A0, constant_kdv(), 1.0, {1.0}, o).at(1.0).A;
  };
  const auto u1 = run(0.04), u2 = run(0.02), u4 = run(0.01);
  const double order = std::log2(max_diff(u1, u2) / max_diff(u2, u4));
  INFO("order " << order);
  CHECK(order > 3.5);
}

TEST_CASE("Burgers shock time and constant data") {
  const AmplitudeGrid g(256, 2.0 * kPi);
  AmplitudeField A0(g);
  for (int r = 0; r < g.points; ++r) A0.values[r] = std::sin(g.X(r));
  CHECK(burgers_shock_time(A0, constant_burgers()) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(burgers_evolve(A0, constant_burgers(), 0.6, {}, false), Error);

  AmplitudeField flat(g, std::vector<double>(g.points, 0.7));
  CHECK(std::isinf(burgers_shock_time(flat, constant_burgers())));
  const auto traj = burgers_evolve(flat, constant_burgers(), 5.0, {5.0}, true);
  CHECK(max_diff(traj.at(5.0).A, flat.values) < 1e-13);
  CHECK(max_abs(GridField(SpectralGrid(1, g.points), traj.at(5.0).B)) < 1e-13);
}

TEST_CASE("Burgers matches characteristics before half the shock time") {
  const AmplitudeGrid g(512, 2.0 * kPi);
  AmplitudeField A0(g);
  for (int r = 0; r < g.points; ++r) A0.values[r] = std::sin(g.X(r));
  const double T = 0.5;
  AmplitudeOptions o;
  o.dt = 1e-3;
  const auto traj = burgers_evolve(A0, constant_burgers(), T, {T}, false, o);
  // A_T = A A_X: A constant along dX/dT = -A, so A(X) = sin(X0) with X = X0 - sin(X0) T
  double err = 0.0;
  for (int r = 0; r < g.points; ++r) {
    const double X = g.X(r);
    double x0 = X;
    for (int it = 0; it < 100; ++it) x0 -= (x0 - std::sin(x0) * T - X) / (1.0 - std::cos(x0) * T);
    err = std::max(err, std::abs(traj.at(T).A[r] - std::sin(x0)));
  }
  INFO("characteristics error " << err);
  CHECK(err < 1e-6);
}

TEST_CASE("Whitham linear pulse travels at unit speed") {
  auto cf = constant_whitham();
  cf.flux_quadratic = 0.0;
  const AmplitudeGrid g(256, 80.0);
  const auto A0 = gaussian_profile(g, 0.05, 4.0);
  AmplitudeField V0 = A0;
  for (auto& v : V0.values) v = -v;  // right-going
  AmplitudeOptions o;
  o.smallness = 1.0;
  const auto traj = whitham_evolve(A0, V0, cf, 1.0, {1.0}, o);
  std::vector<double> exact(g.points);
  for (int r = 0; r < g.points; ++r) {
    const double y = (g.X(r) - 0.5 * g.length - 1.0) / 4.0;
    exact[r] = 0.05 * std::exp(-y * y);
  }
  CHECK(max_diff(traj.at(1.0).A, exact) < 1e-9);
}

TEST_CASE("Whitham conserves means and converges under step halving") {
  const auto cf = constant_whitham();
  const AmplitudeGrid g(256, 80.0);
  const auto A0 = gaussian_profile(g, 0.05, 4.0);
  const AmplitudeField V0(g);
  CHECK(whitham_smallness(cf) == Catch::Approx(0.05));
  auto run = [&](double dt) {
    AmplitudeOptions o;
    o.dt = dt;
    return whitham_evolve(A0, V0, cf, 1.0, {1.0}, o).at(1.0);
  };
  const auto s1 = run(0.04), s2 = run(0.02), s4 = run(0.01);
  CHECK(std::abs(integral(g, s4.A) - integral(g, A0.values)) < 1e-12);
  CHECK(std::abs(integral(g, s4.V)) < 1e-12);
  const double order = std::log2(max_diff(s1.A, s2.A) / max_diff(s2.A, s4.A));
  INFO("order " << order);
  CHECK(order > 3.5);
  // energy-norm boundedness
  CHECK(max_abs(GridField(SpectralGrid(1, g.points), s4.A)) < 0.06);
}

TEST_CASE("Whitham guards") {
  auto cf = constant_whitham();
  const AmplitudeGrid g(128, 80.0);
  const AmplitudeField V0(g);
  CHECK_THROWS_AS(whitham_evolve(gaussian_profile(g, 0.2, 4.0), V0, cf, 1.0, {}), Error);
  cf.flux_quadratic = -1.0;
  AmplitudeOptions o;
  o.smallness = 10.0;
  try {
    whitham_evolve(gaussian_profile(g, 0.6, 4.0), V0, cf, 1.0, {}, o);
    FAIL("expected hyperbolicity loss");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HyperbolicityLoss);
  }
}

TEST_CASE("Taylor jets match the evolved trajectory") {
  const AmplitudeGrid g(128, 40.0);
  const auto A0 = gaussian_profile(g, 1.0, 2.0);
  AmplitudeOptions o;
  o.dt = 1e-4;
  const int order = 4;
  auto jet_error = [&](const AmplitudeTrajectory& traj, double h, bool corrector) {
    const auto jet = amplitude_jet(traj, traj.at(0.0), order);
    std::vector<double> sum(g.points, 0.0);
    const auto& target = corrector ? traj.at(h).B : traj.at(h).A;
    const auto& coeffs = corrector ? jet.B : jet.A;
    REQUIRE(coeffs.size() == order + 1u);
    for (int k = 0; k <= order; ++k)
      for (int r = 0; r < g.points; ++r) sum[r] += coeffs[k][r] * std::pow(h, k);
    return max_diff(sum, target);
  };
  SECTION("kdv") {
    const auto t1 = kdv_evolve(A0, constant_kdv(), 0.02, {0.0, 0.01, 0.02}, o);
    const double e1 = jet_error(t1, 0.02, false), e2 = jet_error(t1, 0.01, false);
    INFO(e1 << " " << e2);
    CHECK(std::log2(e1 / e2) > 4.5);
  }
  SECTION("burgers with corrector") {
    const auto t1 = burgers_evolve(A0, constant_burgers(), 0.02, {0.0, 0.01, 0.02}, true, o);
    const double e1 = jet_error(t1, 0.02, true), e2 = jet_error(t1, 0.01, true);
    INFO(e1 << " " << e2);
    CHECK(std::log2(e1 / e2) > 4.5);
    const double a1 = jet_error(t1, 0.02, false), a2 = jet_error(t1, 0.01, false);
    CHECK(std::log2(a1 / a2) > 4.5);
  }
  SECTION("whitham") {
    const auto W0 = gaussian_profile(g, 0.05, 2.0);
    const auto t1 = whitham_evolve(W0, AmplitudeField(g), constant_whitham(), 0.02, {0.0, 0.01, 0.02}, o);
    const double e1 = jet_error(t1, 0.02, false), e2 = jet_error(t1, 0.01, false);
    INFO(e1 << " " << e2);
    CHECK(std::log2(e1 / e2) > 4.5);
  }
}

TEST_CASE("Burgers corrector obeys its equation at the initial time") {
  // B(0) = 0, so B_T(0) = -g / (2c) with g = (1/3)(A^3)_X + A_XXX in the constant medium
  const AmplitudeGrid g(256, 40.0);
  const auto A0 = gaussian_profile(g, 1.0, 2.0);
  const auto traj = burgers_evolve(A0, constant_burgers(), 0.1, {0.0}, true);
  const auto jet = amplitude_jet(traj, traj.at(0.0), 1);
  std::vector<double> cube(g.points);
  for (int r = 0; r < g.points; ++r) cube[r] = std::pow(A0.values[r], 3) / 3.0;
  const auto c1 = amplitude_derivative(g, cube, 1);
  const auto a3 = amplitude_derivative(g, A0.values, 3);
  std::vector<double> expect(g.points);
  for (int r = 0; r < g.points; ++r) expect[r] = -0.5 * (c1[r] + a3[r]);
  CHECK(max_diff(jet.B[1], expect) < 1e-6);
}

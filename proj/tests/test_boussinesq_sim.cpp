#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "pbq/boussinesq_sim.hpp"

using namespace pbq;

namespace {

const auto kConst = coefficient_preset("homogeneous");
const auto kFull = coefficient_preset("periodic-full");

double linear_energy(const BoussinesqOperator& op, const SimState& s) {
  const GridField lu = op.linear(s.u);
  double e = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i) e += 0.5 * s.v[i] * s.v[i] - 0.5 * s.u[i] * lu[i];
  return e * s.u.grid.spacing();
}

using oracle::bloch_route;
using oracle::random_band_limited;
using oracle::max_diff;

}  // namespace

TEST_CASE("zero state has zero right-hand side") {
  const SpectralGrid g(4, 16);
  SimState s{0.0, GridField(g), GridField(g)};
  const auto [du, dv] = rhs(s, kFull);
  CHECK(max_abs(du) == 0.0);
  CHECK(max_abs(dv) == 0.0);
}

TEST_CASE("constant coefficients act through their symbol") {
  const SpectralGrid g(8, 16);
  const BoussinesqOperator op(kConst, g);
  const int n = 5;
  const double k = g.wavenumber(n);
  GridField u(g), lin_exact(g), nl_exact(g);
  for (int r = 0; r < g.size(); ++r) {
    u[r] = std::cos(k * g.x(r));
    lin_exact[r] = -(k * k + k * k * k * k) * u[r];
    nl_exact[r] = -2.0 * k * k * std::cos(2.0 * k * g.x(r));
  }
  // sampling roundoff in the retained band is amplified by up to k_max^4
  const double kmax = g.wavenumber(g.size() / 3);
  CHECK(max_diff(op.linear(u), lin_exact) < 1e-14 * kmax * kmax * kmax * kmax);
  CHECK(max_diff(op.nonlinear(u), nl_exact) < 1e-12);
}

TEST_CASE("pseudospectral operator agrees with the Bloch-space route") {
  std::mt19937 rng(7);
  for (const auto& g : {SpectralGrid(8, 16), SpectralGrid(5, 32)}) {
    const BoussinesqOperator op(kFull, g);
    for (int trial = 0; trial < 20; ++trial) {
      const GridField u = random_band_limited(g, rng, g.size() / 2 - 1, 0.3);
      const GridField a = op.apply(u);
      const GridField b = bloch_route(kFull, u);
      CHECK(max_diff(a, b) < 1e-9 * std::max(1.0, max_abs(b)));
    }
  }
}

TEST_CASE("bilinear form is symmetric and matches the quadratic one") {
  std::mt19937 rng(11);
  const SpectralGrid g(6, 16);
  const BoussinesqOperator op(kFull, g);
  const GridField u = random_band_limited(g, rng, 20, 0.5);
  const GridField w = random_band_limited(g, rng, 20, 0.5);
  CHECK(max_diff(op.bilinear(u, w), op.bilinear(w, u)) < 1e-12);
  CHECK(max_diff(op.bilinear(u, u), op.nonlinear(u)) < 1e-12);
  // polarization: N(u+w) = N(u) + 2B(u,w) + N(w)
  const GridField lhs = op.nonlinear(u + w);
  const GridField rhs_ = op.nonlinear(u) + 2.0 * op.bilinear(u, w) + op.nonlinear(w);
  CHECK(max_diff(lhs, rhs_) < 1e-10);
}

TEST_CASE("dealiasing guard rejects wide coefficients") {
  const SpectralGrid g(4, 6);
  CHECK_THROWS_AS(BoussinesqOperator(kFull, g), Error);
  CHECK_NOTHROW(BoussinesqOperator(kFull, g, false));
}

TEST_CASE("RK4 converges at fourth order") {
  std::mt19937 rng(3);
  const SpectralGrid g(6, 16);
  const BoussinesqOperator op(kFull, g);
  SimState s0{0.0, random_band_limited(g, rng, 12, 0.05), random_band_limited(g, rng, 12, 0.05)};
  const double dt0 = 0.4 * stability_limit(kFull, g);
  auto run = [&](double dt) {
    StepperConfig cfg;
    cfg.dt = dt;
    return evolve(s0, op, 1.0, cfg).u;
  };
  const auto u1 = run(dt0), u2 = run(dt0 / 2), u4 = run(dt0 / 4);
  const double e1 = max_diff(u1, u2), e2 = max_diff(u2, u4);
  const double order = std::log2(e1 / e2);
  INFO("observed order " << order);
  CHECK(order > 3.7);
  CHECK(order < 4.5);
}

TEST_CASE("linear operator is symmetric and nonpositive") {
  std::mt19937 rng(13);
  const SpectralGrid g(6, 16);
  const BoussinesqOperator op(kFull, g);
  auto dot = [&](const GridField& x, const GridField& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc * g.spacing();
  };
  for (int trial = 0; trial < 20; ++trial) {
    const GridField u = random_band_limited(g, rng, 40, 1.0);
    const GridField w = random_band_limited(g, rng, 40, 1.0);
    const double uw = dot(u, op.linear(w)), wu = dot(w, op.linear(u));
    CHECK(std::abs(uw - wu) < 1e-11 * std::abs(dot(u, op.linear(u))));
    CHECK(dot(u, op.linear(u)) <= 0.0);
  }
}

TEST_CASE("linear flow conserves energy and the mean drifts linearly") {
  std::mt19937 rng(5);
  const SpectralGrid g(6, 16);
  const BoussinesqOperator op(kFull, g);
  SimState s0{0.0, random_band_limited(g, rng, 30, 0.2), random_band_limited(g, rng, 30, 0.2)};
  for (int r = 0; r < g.size(); ++r) {
    s0.u[r] += 0.1;
    s0.v[r] += 0.02;
  }
  StepperConfig cfg;
  cfg.nonlinear = false;
  cfg.stability_margin = 0.02;
  const double e0 = linear_energy(op, s0);
  const SimState s1 = evolve(s0, op, 2.0, cfg);
  CHECK(std::abs(linear_energy(op, s1) - e0) < 1e-8 * e0);
  CHECK(mean(s1.u) == Catch::Approx(mean(s0.u) + 2.0 * mean(s0.v)).margin(1e-12));
  CHECK(mean(s1.v) == Catch::Approx(mean(s0.v)).margin(1e-12));
}

TEST_CASE("nonlinear flow conserves the mean of v") {
  std::mt19937 rng(9);
  const SpectralGrid g(6, 16);
  const BoussinesqOperator op(kFull, g);
  SimState s0{0.0, random_band_limited(g, rng, 20, 0.1), random_band_limited(g, rng, 20, 0.1)};
  const SimState s1 = evolve(s0, op, 1.0, StepperConfig{});
  CHECK(std::abs(mean(s1.v) - mean(s0.v)) < 1e-13);
}

TEST_CASE("resolution refinement converges spectrally") {
  // smooth long wave evolved on P = 16 and P = 32 with the same data
  auto run = [](int p) {
    const SpectralGrid g(4, p);
    const BoussinesqOperator op(kFull, g);
    SimState s{0.0, GridField(g), GridField(g)};
    for (int r = 0; r < g.size(); ++r) s.u[r] = 0.1 * std::exp(-2.0 * std::cos(g.x(r) / 4.0));
    StepperConfig cfg;
    cfg.dt = 0.2 * stability_limit(kFull, SpectralGrid(4, 32));
    return evolve(s, op, 0.5, cfg);
  };
  const SimState coarse = run(16), fine = run(32);
  double err = 0.0;
  for (int r = 0; r < coarse.u.grid.size(); ++r) err = std::max(err, std::abs(coarse.u[r] - fine.u[2 * r]));
  INFO("P=16 vs P=32 difference " << err);
  CHECK(err < 1e-6);
}

TEST_CASE("sample times are hit exactly") {
  const SpectralGrid g(4, 16);
  const BoussinesqOperator op(kConst, g);
  SimState s0{0.0, GridField(g), GridField(g)};
  for (int r = 0; r < g.size(); ++r) s0.u[r] = 0.01 * std::cos(g.x(r) / 4.0);
  std::vector<double> seen;
  const std::vector<double> samples{0.0, 0.123, 0.5, 0.77};
  const auto end = evolve(s0, op, 1.0, StepperConfig{}, samples, [&](const SimState& s) { seen.push_back(s.t); });
  REQUIRE(seen.size() == samples.size());
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == Catch::Approx(samples[i]).margin(1e-14));
  CHECK(end.t == 1.0);
}

TEST_CASE("unstable step and blow-up are reported") {
  const SpectralGrid g(4, 16);
  const BoussinesqOperator op(kConst, g);
  SimState s0{0.0, GridField(g), GridField(g)};
  for (int r = 0; r < g.size(); ++r) s0.u[r] = 5.0 * std::cos(g.x(r));
  StepperConfig bad;
  bad.dt = 2.0 * stability_limit(kConst, g);
  CHECK_THROWS_AS(evolve(s0, op, 1.0, bad), Error);
  StepperConfig cfg;
  cfg.blowup_ceiling = 1.0;
  try {
    evolve(s0, op, 1.0, cfg);
    FAIL("expected blow-up");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BlowUp);
  }
}

TEST_CASE("checkpoint round trip is bit exact") {
  std::mt19937 rng(1);
  const SpectralGrid g(3, 16);
  SimState s{1.25, random_band_limited(g, rng, 10, 1.0), random_band_limited(g, rng, 10, 1.0)};
  const auto stem = (std::filesystem::temp_directory_path() / "pbq_ckpt_test").string();
  write_checkpoint(stem, s, kFull.hash());
  std::string hash;
  const SimState back = read_checkpoint(stem, &hash);
  CHECK(back.t == s.t);
  CHECK(back.u.grid == g);
  CHECK(back.u.values == s.u.values);
  CHECK(back.v.values == s.v.values);
  CHECK(hash == kFull.hash());
  std::filesystem::remove(stem + ".bin");
  std::filesystem::remove(stem + ".json");
}

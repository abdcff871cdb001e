#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace pbq;

namespace {

constexpr int kDraws = 100;

GridField zero_mean(GridField f) {
  const double m = mean(f);
  for (auto& v : f.values) v -= m;
  return f;
}

// Small field for B's multiplier: a >= 0.4 and |c| <= 1.8 keep a + 2 c psi positive.
GridField small_psi(const SpectralGrid& g, std::mt19937& rng) {
  const auto f = oracle::random_band_limited(g, rng, 8, 1.0);
  return (0.1 / max_abs(f)) * f;
}

}  // namespace

TEST_CASE("derivative and antiderivative are mutually inverse") {
  std::mt19937 rng(11);
  const SpectralGrid g(3, 16);
  for (int d = 0; d < kDraws; ++d) {
    const auto f = zero_mean(oracle::random_band_limited(g, rng, 15, 1.0));
    const double s = max_abs(f);
    CHECK(oracle::max_diff(spectral_derivative(antiderivative(f), 1), f) < 1e-10 * s);
    CHECK(oracle::max_diff(antiderivative(spectral_derivative(f, 1)), f) < 1e-10 * s);
  }
}

TEST_CASE("Sobolev norms are Parseval consistent") {
  std::mt19937 rng(12);
  const SpectralGrid g(5, 12);
  for (int d = 0; d < kDraws; ++d) {
    const auto f = oracle::random_band_limited(g, rng, 19, 1.0);
    const double n0 = sobolev_norm(f, 0.0), n1 = sobolev_norm(f, 1.0), d0 = sobolev_norm(spectral_derivative(f, 1), 0);
    CHECK(std::abs(n0 * n0 + d0 * d0 - n1 * n1) < 1e-10 * n1 * n1);
    CHECK(std::abs(n0 - l2_norm(f)) < 1e-12 * n0);
  }
}

TEST_CASE("Bloch identities over random grids") {
  const auto r = bloch_selftest(kDraws, 13);
  CHECK(r.draws == kDraws);
  CHECK(r.worst() <= 1e-10);
}

TEST_CASE("Bloch matrices are Hermitian and positive semidefinite") {
  std::mt19937 rng(14);
  std::uniform_real_distribution<double> ul(-0.5, 0.5);
  for (int d = 0; d < kDraws; ++d) {
    const auto p = oracle::random_media(rng);
    const auto m = assemble_bloch_matrix(p, ul(rng), 12);
    CHECK((m.matrix - m.matrix.adjoint()).norm() <= 1e-14 * m.matrix.norm());
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m.matrix).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-10);
  }
}

TEST_CASE("first band touches zero once at l = 0") {
  std::mt19937 rng(15);
  for (int d = 0; d < kDraws; ++d) {
    const auto p = oracle::random_media(rng);
    const auto ep = band_eigenpairs(assemble_bloch_matrix(p, 0.0, 12), 2);
    CHECK(std::abs(ep[0].value) < 1e-10);
    CHECK(ep[1].value > 1e-3);
  }
}

TEST_CASE("cell solve preserves parity") {
  std::mt19937 rng(16);
  std::normal_distribution<double> n01;
  for (int d = 0; d < kDraws; ++d) {
    const auto p = oracle::random_media(rng);
    const bool odd = d % 2 == 0;
    CellFunction rhs = CellFunction::zeros(-4, 4);
    for (int m = 1; m <= 4; ++m) {
      const double s = n01(rng);
      // odd: s sin(mx); even: s cos(mx)
      rhs.coeffs[4 + m] = odd ? cplx(0.0, -s / 2) : cplx(s / 2, 0.0);
      rhs.coeffs[4 - m] = odd ? cplx(0.0, s / 2) : cplx(s / 2, 0.0);
    }
    const auto u = cell_solve_L0(p, rhs);
    const double scale = u.norm();
    for (double x : {0.3, 1.1, 2.0, 2.9}) {
      const cplx plus = u(x), minus = u(-x);
      CHECK(std::abs(odd ? plus + minus : plus - minus) < 1e-10 * scale);
    }
  }
}

TEST_CASE("physical-space operator equals the Bloch-space route") {
  std::mt19937 rng(17);
  for (int d = 0; d < kDraws; ++d) {
    const auto p = oracle::random_media(rng);
    const SpectralGrid g(4 + d % 5, 16);
    const BoussinesqOperator op(p, g);
    const auto u = oracle::random_band_limited(g, rng, g.size() / 2 - 1, 0.3);
    const auto ref = oracle::bloch_route(p, u);
    CHECK(oracle::max_diff(op.apply(u), ref) < 1e-9 * std::max(1.0, max_abs(ref)));
  }
}

TEST_CASE("corrector g1 solves its cell problem") {
  std::mt19937 rng(18);
  for (int d = 0; d < kDraws; ++d) CHECK(oracle::g1_residual(oracle::random_media(rng)) < 1e-10);
}

TEST_CASE("energy square root squares to B and inverts") {
  std::mt19937 rng(19);
  const SpectralGrid g(4, 16);
  for (int d = 0; d < kDraws; ++d) {
    const auto p = oracle::random_media(rng);
    const auto psi = small_psi(g, rng);
    const EnergyOperator op(p, psi);
    const auto u = dealias(oracle::random_band_limited(g, rng, 21, 1.0));
    const auto v = dealias(oracle::random_band_limited(g, rng, 21, 1.0));
    CHECK(oracle::sqrt_square_residual(op, u) < 1e-9);
    CHECK(oracle::max_diff(op.inv_sqrt_apply(op.sqrt_apply(u)), u) < 1e-9 * max_abs(u));
    const double lhs = inner(u, op.sqrt_apply(v)), rhs = inner(op.sqrt_apply(u), v);
    CHECK(std::abs(lhs - rhs) < 1e-9 * l2_norm(u) * l2_norm(v));
  }
}

TEST_CASE("error energy is nonnegative and vanishes only at zero") {
  std::mt19937 rng(20);
  const SpectralGrid g(4, 16);
  for (int d = 0; d < kDraws; ++d) {
    const auto p = oracle::random_media(rng);
    const EnergyOperator op(p, small_psi(g, rng));
    const ErrorState s{zero_mean(oracle::random_band_limited(g, rng, 20, 1.0)),
                       zero_mean(oracle::random_band_limited(g, rng, 20, 1.0))};
    const auto e = error_energy(s, op);
    CHECK(e.kinetic >= 0.0);
    CHECK(e.inverse >= 0.0);
    CHECK(e.potential >= 0.0);
    CHECK(e.elastic >= 0.0);
    CHECK(e.total() > 0.0);
  }
  const ErrorState zero{GridField(g), GridField(g)};
  CHECK(error_energy(zero, EnergyOperator(coefficient_preset("periodic-full"), GridField(g))).total() == 0.0);
}

// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below,
// exit status 1 when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pbq/experiment.hpp"

using namespace pbq;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kModelTol = 1e-8;
constexpr double kDispersionTol = 1e-10;
constexpr double kBlochTol = 1e-10;
constexpr int kBlochDraws = 100;
constexpr double kResidualTolHomogeneous = 0.5;
constexpr double kResidualTolPeriodic = 0.7;
constexpr double kErrorSlopeTol = 0.3;
constexpr double kGammaRatioMax = 2.0;
constexpr double kDriftTol = 0.5;
constexpr double kRhsTol = 1e-9;
constexpr double kG1Tol = 1e-10;
constexpr double kSqrtTol = 1e-9;
constexpr double kCharacteristicsTol = 1e-6;
constexpr int kOracleDraws = 100;
// Wall-clock limits in seconds.
constexpr double kLimit1 = 1.0, kLimit2 = 5.0, kLimit3 = 10.0, kLimit9 = 120.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void detail(const std::string& s) { std::printf("    %s\n", s.c_str()); }

int failures = 0;

void verdict(int n, bool pass, const std::string& what) {
  std::printf("CRITERION %2d: %s  %s\n", n, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs a criterion body; an escaped exception counts as a failure with its message.
void criterion(int n, const std::string& what, const std::function<bool()>& body) {
  bool ok = false;
  try {
    ok = body();
  } catch (const std::exception& e) {
    detail(std::string("exception: ") + e.what());
    ok = false;
  }
  verdict(n, ok, what);
}

ExperimentConfig base(AmplitudeKind kind, bool periodic) {
  ExperimentConfig c;
  c.kind = kind;
  c.level = Level::improved;
  c.eps = {0.15, 0.2, 0.25, 0.3};
  if (periodic) {
    // wide slow profile: keeps the envelope inside the grid's band-1 window
    c.preset = "periodic";
    c.width = 20.0;
    c.slow_length = 400.0;
    c.amplitude_points = 512;
    // below the Whitham smallness bound of the periodic medium
    if (kind == AmplitudeKind::whitham) c.amplitude = 0.04;
  }
  return c;
}

std::string label(AmplitudeKind k, bool periodic) {
  return std::string(periodic ? "periodic " : "homogeneous ") + to_string(k);
}

double res_target(AmplitudeKind k) { return (7.0 + 4.0 * amplitude_alpha(k)) / 2.0; }
double inv_target(AmplitudeKind k) { return (5.0 + 4.0 * amplitude_alpha(k)) / 2.0; }

bool within(double v, double target, double tol) { return std::isfinite(v) && std::abs(v - target) <= tol; }

double slope_of(const ScalingReport& r, const std::string& name) {
  const auto* s = r.slope(name);
  return s ? s->slope : std::nan("");
}

void print_failed_rows(const ScalingReport& r) {
  for (const auto& row : r.rows)
    if (!row.ok) detail("row failed: " + row.error);
}

// Criterion 4 checks for one residual sweep.
bool residual_ok(const ScalingReport& r, bool periodic) {
  const auto k = r.config.kind;
  const double tol = periodic ? kResidualTolPeriodic : kResidualTolHomogeneous;
  print_failed_rows(r);
  const double res = slope_of(r, "res_h1"), inv = slope_of(r, "inv_h1");
  const bool res_ok = within(res, res_target(k), tol);
  // the Burgers target is stated for the residual itself only
  const bool inv_checked = k != AmplitudeKind::burgers;
  const bool inv_ok = !inv_checked || within(inv, inv_target(k), tol);
  detail(fmt("%-20s H1 res %.3f (target %.1f +- %.1f) %s | H1 inv %.3f (target %.1f%s) %s | L2 res %.3f inv %.3f",
             label(k, periodic).c_str(), res, res_target(k), tol, res_ok ? "ok" : "MISS", inv, inv_target(k),
             inv_checked ? "" : ", reported", inv_checked ? (inv_ok ? "ok" : "MISS") : "-", slope_of(r, "res_l2"),
             slope_of(r, "inv_l2")));
  return r.complete() && res_ok && inv_ok;
}

struct Validation {
  ScalingReport report;
  double seconds = 0.0;
  bool periodic = false;
};

// Criterion 8 checks for one validation run.
bool energy_ok(const Validation& v) {
  const auto& r = v.report;
  const int alpha = amplitude_alpha(r.config.kind);
  bool finite = r.complete();
  double sup = 0.0;
  for (const auto& row : r.rows) {
    finite = finite && std::isfinite(row.gronwall.sup_energy) && row.gronwall.within_bound;
    sup = std::max(sup, row.gronwall.sup_energy);
  }
  const bool gamma_ok = std::isfinite(r.gamma_ratio) && r.gamma_ratio <= kGammaRatioMax;
  const double drift = slope_of(r, "drift");
  const bool drift_ok = within(drift, 1.0 + alpha, kDriftTol);
  detail(fmt("%-20s sup E %.3e (bound %g) %s | gamma ratio %.3f (<= %.1f) %s | drift exponent %.3f (target %d +- %.1f) %s",
             label(r.config.kind, v.periodic).c_str(), sup, r.config.energy_bound, finite ? "ok" : "MISS", r.gamma_ratio,
             kGammaRatioMax, gamma_ok ? "ok" : "MISS", drift, 1 + alpha, kDriftTol, drift_ok ? "ok" : "MISS"));
  return finite && gamma_ok && drift_ok;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const auto t_all = Clock::now();

  criterion(1, "constant-coefficient effective model (c, lambda4, nu2) = (1, 24, -1)", [] {
    const auto t0 = Clock::now();
    ModelOptions mo;
    const auto m = build_effective_model(coefficient_preset("homogeneous"), mo);
    const double dt = seconds_since(t0);
    const double err = std::max({std::abs(m.wave_speed - 1.0), std::abs(m.lambda4 - 24.0), std::abs(m.nu2 + 1.0)});
    detail(fmt("c %.12f lambda4 %.12f nu2 %.12f max error %.2e (tol %.0e) in %.3f s (limit %.0f s)", m.wave_speed,
               m.lambda4, m.nu2, err, kModelTol, dt, kLimit1));
    return err <= kModelTol && dt < kLimit1;
  });

  criterion(2, "dispersion l^2 + l^4 for a = b = 1 and evenness of the periodic first band", [] {
    const auto t0 = Clock::now();
    std::vector<double> ls;
    for (int i = 0; i < 50; ++i) ls.push_back(-0.49 + 0.98 * i / 49.0);
    const auto flat = dispersion_curve(coefficient_preset("homogeneous"), 1, ls);
    double exact = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const double l = ls[i];
      exact = std::max(exact, std::abs(flat.values[i][0] - (l * l + l * l * l * l)));
    }
    std::vector<double> half, mirrored;
    for (int i = 0; i < 50; ++i) {
      half.push_back(0.49 * (i + 1) / 50.0);
      mirrored.push_back(-half.back());
    }
    const auto p = coefficient_preset("periodic");
    const auto right = dispersion_curve(p, 1, half), left = dispersion_curve(p, 1, mirrored);
    double even = 0.0;
    for (std::size_t i = 0; i < half.size(); ++i) even = std::max(even, std::abs(right.values[i][0] - left.values[i][0]));
    const double dt = seconds_since(t0);
    detail(fmt("max |lambda1 - l^2 - l^4| %.2e, max |lambda1(l) - lambda1(-l)| %.2e (tol %.0e) in %.2f s (limit %.0f s)",
               exact, even, kDispersionTol, dt, kLimit2));
    return exact <= kDispersionTol && even <= kDispersionTol && dt < kLimit2;
  });

  criterion(3, "Bloch transform self-test on 100 random fields", [] {
    const auto t0 = Clock::now();
    const auto r = bloch_selftest(kBlochDraws, 2024);
    const double dt = seconds_since(t0);
    detail(fmt("draws %d round trip %.2e isometry %.2e multiply %.2e convolve %.2e (tol %.0e) in %.2f s (limit %.0f s)",
               r.draws, r.round_trip, r.isometry, r.multiply, r.convolve, kBlochTol, dt, kLimit3));
    return r.draws == kBlochDraws && r.worst() <= kBlochTol && dt < kLimit3;
  });

  const std::vector<AmplitudeKind> kinds = {AmplitudeKind::kdv, AmplitudeKind::burgers, AmplitudeKind::whitham};
  std::map<std::pair<int, bool>, bool> residual_pass;
  criterion(4, "residual scalings of the improved ansatz, homogeneous and periodic", [&] {
    const auto t0 = Clock::now();
    bool all = true;
    for (bool periodic : {false, true})
      for (auto k : kinds) {
        bool ok = false;
        try {
          ok = residual_ok(run_residual_sweep(base(k, periodic)), periodic);
        } catch (const std::exception& e) {
          detail(label(k, periodic) + ": " + e.what());
        }
        residual_pass[{static_cast<int>(k), periodic}] = ok;
        all = all && ok;
      }
    detail(fmt("residual sweeps took %.1f s", seconds_since(t0)));
    return all;
  });

  // Full-equation validation runs shared by criteria 5 to 8 and 10.
  std::vector<Validation> runs;
  auto validate = [&](AmplitudeKind k, bool periodic) -> const Validation* {
    const auto t0 = Clock::now();
    try {
      Validation v;
      v.report = run_validation(base(k, periodic));
      v.seconds = seconds_since(t0);
      v.periodic = periodic;
      runs.push_back(std::move(v));
      return &runs.back();
    } catch (const std::exception& e) {
      detail(label(k, periodic) + " validation: " + e.what());
      return nullptr;
    }
  };
  runs.reserve(4);
  const Validation* kdv_flat = validate(AmplitudeKind::kdv, false);
  const Validation* kdv_periodic = validate(AmplitudeKind::kdv, true);
  const Validation* burgers = validate(AmplitudeKind::burgers, false);
  const Validation* whitham = validate(AmplitudeKind::whitham, false);

  auto error_line = [](const Validation& v, double target) {
    const auto& r = v.report;
    print_failed_rows(r);
    const double h1 = slope_of(r, "err_h1");
    const bool ok = r.complete() && within(h1, target, kErrorSlopeTol);
    detail(fmt("%-20s H1 error slope %.3f (target %.1f +- %.1f) %s | H2 slope %.3f (reported) | frame %+d | %.1f s "
               "for %zu eps",
               label(r.config.kind, v.periodic).c_str(), h1, target, kErrorSlopeTol, ok ? "ok" : "MISS",
               slope_of(r, "err_h2"), r.frame_sign, v.seconds, r.rows.size()));
    return ok;
  };

  criterion(5, "KdV error slope 2.5 +- 0.3, constant and periodic media", [&] {
    if (!kdv_flat || !kdv_periodic) return false;
    const bool a = error_line(*kdv_flat, 2.5);
    const bool b = error_line(*kdv_periodic, 2.5);
    return a && b;
  });

  criterion(6, "Burgers error slope 1.5 +- 0.3 with the shock guard active", [&] {
    if (!burgers) return false;
    const auto& cfg = burgers->report.config;
    const auto model = cached_effective_model(cfg.coefficients(), cfg.points_per_cell);
    const auto cf = assemble_amplitude_coefficients(model, AmplitudeKind::burgers);
    const AmplitudeGrid ag(cfg.amplitude_points, cfg.resolved_slow_length());
    const double shock = burgers_shock_time(gaussian_profile(ag, cfg.resolved_amplitude(), cfg.resolved_width()), cf);
    // the evolution refuses windows beyond half the shock time
    const bool guarded = std::isfinite(shock) && cfg.T0 <= 0.5 * shock;
    detail(fmt("slow window T0 %.3g, shock time %.3g, guard %s", cfg.T0, shock, guarded ? "active" : "VIOLATED"));
    return error_line(*burgers, 1.5) && guarded;
  });

  criterion(7, "Whitham: residual slopes, bounded monotone error, energy audit", [&] {
    if (!whitham) return false;
    const auto& r = whitham->report;
    const bool res = residual_pass[{static_cast<int>(AmplitudeKind::whitham), false}] &&
                     residual_pass[{static_cast<int>(AmplitudeKind::whitham), true}];
    bool bounded = r.complete();
    double worst = 0.0;
    for (const auto& row : r.rows) {
      bounded = bounded && std::isfinite(row.err_h1_sup);
      worst = std::max(worst, row.err_h1_sup);
    }
    detail(fmt("(i) criterion 4 Whitham slopes %s | (ii) sup H1 error <= %.3e, monotone in eps: %s | H1 slope %.3f "
               "(reported)",
               res ? "ok" : "MISS", worst, r.error_monotone ? "yes" : "NO", slope_of(r, "err_h1")));
    const bool energy = energy_ok(*whitham);
    detail(std::string("(iii) energy audit ") + (energy ? "ok" : "MISS"));
    return res && bounded && r.error_monotone && energy;
  });

  criterion(8, "energy audit: bounded E, eps-uniform growth rate, Hamiltonian drift exponent 1 + alpha", [&] {
    if (runs.size() != 4) return false;
    bool all = true;
    for (const auto& v : runs) all = energy_ok(v) && all;
    return all;
  });

  criterion(9, "oracle equivalences on random cases", [] {
    const auto t0 = Clock::now();
    std::mt19937 rng(9);
    double rhs = 0.0, g1 = 0.0, sq = 0.0;
    for (int d = 0; d < kOracleDraws; ++d) {
      const auto p = oracle::random_media(rng);
      const SpectralGrid g(4 + d % 5, 16);
      const BoussinesqOperator op(p, g);
      const auto u = oracle::random_band_limited(g, rng, g.size() / 2 - 1, 0.3);
      const auto ref = oracle::bloch_route(p, u);
      rhs = std::max(rhs, oracle::max_diff(op.apply(u), ref) / std::max(1.0, max_abs(ref)));
      g1 = std::max(g1, oracle::g1_residual(p));
      const SpectralGrid gs(4, 16);
      auto psi = oracle::random_band_limited(gs, rng, 8, 1.0);
      psi = (0.1 / max_abs(psi)) * psi;
      sq = std::max(sq, oracle::sqrt_square_residual(EnergyOperator(p, psi),
                                                     dealias(oracle::random_band_limited(gs, rng, 21, 1.0))));
    }
    for (const char* name : {"periodic", "periodic-full"}) g1 = std::max(g1, oracle::g1_residual(coefficient_preset(name)));
    const double ch = oracle::burgers_characteristics_error(512);
    const double dt = seconds_since(t0);
    detail(fmt("%d draws: rhs physical vs Bloch %.2e (tol %.0e) | g1 residual %.2e (tol %.0e) | A^2 - B %.2e (tol %.0e)",
               kOracleDraws, rhs, kRhsTol, g1, kG1Tol, sq, kSqrtTol));
    detail(fmt("Burgers vs characteristics %.2e (tol %.0e) | %.1f s (limit %.0f s) | property suites run as separate "
               "test binaries",
               ch, kCharacteristicsTol, dt, kLimit9));
    return rhs <= kRhsTol && g1 <= kG1Tol && sq <= kSqrtTol && ch <= kCharacteristicsTol && dt < kLimit9;
  });

  criterion(10, "a completed report regenerates byte-identically from its config", [&] {
    if (!kdv_flat || !kdv_flat->report.complete()) return false;
    const auto root = fs::temp_directory_path() / "pbq_acceptance_determinism";
    fs::remove_all(root);
    report_emit(kdv_flat->report, root / "first");
    clear_model_cache();
    const auto toml = kdv_flat->report.summary().at("config_toml").get<std::string>();
    report_emit(run_validation(config_from_table(parse_config(toml))), root / "second");
    int files = 0, same = 0;
    for (const auto& e : fs::directory_iterator(root / "first")) {
      ++files;
      if (slurp(e.path()) == slurp(root / "second" / e.path().filename())) ++same;
    }
    detail(fmt("%d of %d emitted files identical", same, files));
    fs::remove_all(root);
    return files > 0 && same == files;
  });

  std::printf("%d of 10 criteria failed (%.0f s)\n", failures, seconds_since(t_all));
  return failures == 0 ? 0 : 1;
}

// Command-line front end: one subcommand per experiment, all driven by a TOML
// config plus key=value overrides.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "pbq/experiment.hpp"

namespace fs = std::filesystem;
using namespace pbq;

namespace {

constexpr const char* kOutputRootEnv = "PBQ_OUTPUT_ROOT";

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "TOML config file");
  sub->add_option("overrides", c.overrides, "key=value overrides, e.g. amplitude.kind=burgers");
}

// pde: whether the subcommand runs the full equation, which changes what is valid.
ExperimentConfig load(const Common& c, bool pde) {
  ConfigTable t = c.config_path.empty() ? ConfigTable{} : load_config(c.config_path);
  for (const auto& o : c.overrides) apply_override(t, o);
  ExperimentConfig cfg = config_from_table(t);
  cfg.run_pde = pde;
  cfg.validate();
  return cfg;
}

// Relative output directories are placed under $PBQ_OUTPUT_ROOT when it is set.
fs::path output_dir(const ExperimentConfig& cfg) {
  fs::path p = cfg.output_dir;
  if (const char* root = std::getenv(kOutputRootEnv); root && *root && p.is_relative()) p = fs::path(root) / p;
  return p;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
  std::ofstream out(dir / name);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + (dir / name).string() + "'");
  out << std::setprecision(17);
  return out;
}

void progress(const std::string& m) { std::cerr << m << '\n'; }

void print_slopes(const ScalingReport& rep) {
  std::printf("frame sign %+d\n", rep.frame_sign);
  for (const auto& r : rep.rows)
    if (!r.ok) std::printf("FAILED %s\n", r.error.c_str());
  for (const auto& s : rep.slopes)
    std::printf("%-8s slope %8.4f +- %.4f  target %.2f +- %.2f  %s\n", s.name.c_str(), s.slope, s.half_width,
                s.target, s.tolerance, s.checked ? (s.pass ? "PASS" : "FAIL") : "(reported)");
  if (rep.config.run_pde)
    std::printf("gamma ratio %.4f  error monotone %s\n", rep.gamma_ratio, rep.error_monotone ? "yes" : "no");
  std::printf("overall %s\n", rep.pass() ? "PASS" : "FAIL");
}

int cmd_dispersion(const Common& c, int bands, int samples) {
  const auto cfg = load(c, false);
  if (samples < 2) throw Error(ErrorKind::Config, "need at least two Bloch samples");
  std::vector<double> ls;
  for (int i = 0; i < samples; ++i) ls.push_back(-0.5 + (i + 1.0) / samples);
  const auto band = dispersion_curve(cfg.coefficients(), bands, ls);
  const auto dir = output_dir(cfg);
  open_out(dir, "dispersion.csv") << band.to_csv();
  std::cout << band.to_csv();
  return 0;
}

int cmd_effective(const Common& c) {
  const auto cfg = load(c, false);
  const auto m = cached_effective_model(cfg.coefficients(), cfg.points_per_cell);
  const auto j = m.to_json();
  open_out(output_dir(cfg), "effective.json") << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return 0;
}

EpsilonRecord single(const ExperimentConfig& cfg, double eps) {
  if (eps <= 0.0) eps = cfg.eps.front();
  return run_epsilon(cfg, eps, resolve_frame(cfg));
}

int cmd_simulate(const Common& c, double eps) {
  const auto cfg = load(c, true);
  const auto rec = single(cfg, eps);
  auto out = open_out(output_dir(cfg), "simulate.csv");
  out << "t,res_h1,inv_h1,err_h1,err_h2\n";
  for (const auto& t : rec.trace)
    out << t.t << ',' << t.residual.h1 << ',' << t.residual.inv_h1 << ',' << t.err_h1 << ',' << t.err_h2 << '\n';
  std::printf("eps %g cells %d points %d t_end %g sup err H1 %.6e H2 %.6e\n", rec.eps, rec.cells, rec.points,
              rec.t_end, rec.err_h1_sup, rec.err_h2_sup);
  return 0;
}

int cmd_energy(const Common& c, double eps) {
  const auto cfg = load(c, true);
  const auto rec = single(cfg, eps);
  auto out = open_out(output_dir(cfg), "energy.csv");
  out << "t,E,H\n";
  for (const auto& t : rec.trace) out << t.t << ',' << t.energy << ',' << t.hamiltonian << '\n';
  const auto& g = rec.gronwall;
  std::printf("eps %g sup E %.6e (bound %g, %s) gamma %.6e drift %.6e equivalence [%g, %g]\n", rec.eps,
              g.sup_energy, g.bound, g.within_bound ? "within" : "EXCEEDED", g.gamma, g.drift_rate,
              rec.energy_lower, rec.energy_upper);
  return g.within_bound ? 0 : 1;
}

int cmd_sweep(const Common& c, bool pde) {
  const auto cfg = load(c, pde);
  const auto rep = pde ? run_validation(cfg, progress) : run_residual_sweep(cfg, progress);
  const auto dir = output_dir(cfg);
  report_emit(rep, dir);
  print_slopes(rep);
  std::printf("report written to %s\n", dir.string().c_str());
  return rep.pass() ? 0 : 1;
}

int cmd_bloch(int draws, unsigned seed) {
  const auto r = bloch_selftest(draws, seed);
  const double tol = 1e-10;
  std::printf("draws %d round trip %.3e isometry %.3e multiply %.3e convolve %.3e -> %s\n", r.draws, r.round_trip,
              r.isometry, r.multiply, r.convolve, r.worst() <= tol ? "PASS" : "FAIL");
  return r.worst() <= tol ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic Boussinesq spectral library and experiment harness"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common c;
  int bands = 3, samples = 101, draws = 100;
  double eps = 0.0;
  unsigned seed = 1;

  auto* disp = app.add_subcommand("dispersion", "first band curves lambda_n(l) as CSV");
  add_common(disp, c);
  disp->add_option("--bands", bands, "number of bands")->check(CLI::PositiveNumber);
  disp->add_option("--samples", samples, "Bloch samples on (-1/2, 1/2]");

  auto* eff = app.add_subcommand("effective", "effective model coefficients as JSON");
  add_common(eff, c);

  auto* sim = app.add_subcommand("simulate", "full-equation run from well-prepared data at one eps");
  add_common(sim, c);
  sim->add_option("--eps", eps, "eps (default: first of sweep.eps)");

  auto* res = app.add_subcommand("residual", "residual sweep and slope fits");
  add_common(res, c);

  auto* val = app.add_subcommand("validate", "full validation sweep with error and energy audits");
  add_common(val, c);

  auto* en = app.add_subcommand("energy", "error energy trace at one eps");
  add_common(en, c);
  en->add_option("--eps", eps, "eps (default: first of sweep.eps)");

  auto* bl = app.add_subcommand("bloch-selftest", "Bloch transform identities on random fields");
  bl->add_option("--draws", draws, "random fields")->check(CLI::PositiveNumber);
  bl->add_option("--seed", seed, "random seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (disp->parsed()) return cmd_dispersion(c, bands, samples);
    if (eff->parsed()) return cmd_effective(c);
    if (sim->parsed()) return cmd_simulate(c, eps);
    if (res->parsed()) return cmd_sweep(c, false);
    if (val->parsed()) return cmd_sweep(c, true);
    if (en->parsed()) return cmd_energy(c, eps);
    if (bl->parsed()) return cmd_bloch(draws, seed);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::Config ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}

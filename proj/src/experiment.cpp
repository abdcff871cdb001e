#include "pbq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace pbq {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Short form for messages.
std::string brief(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string toml_array(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

double res_target(AmplitudeKind kind) { return (7.0 + 4.0 * amplitude_alpha(kind)) / 2.0; }
double inv_target(AmplitudeKind kind) { return (5.0 + 4.0 * amplitude_alpha(kind)) / 2.0; }

}  // namespace

double ExperimentConfig::default_amplitude() const { return kind == AmplitudeKind::whitham ? 0.05 : 1.0; }
double ExperimentConfig::default_width() const { return kind == AmplitudeKind::whitham ? 4.0 : 2.0; }

PeriodicCoefficients ExperimentConfig::coefficients() const {
  try {
    if (!a_cos.empty())
      return PeriodicCoefficients::from_cosine_series(a_cos, b_cos.empty() ? std::vector<double>{1.0} : b_cos,
                                                      c_cos.empty() ? std::vector<double>{1.0} : c_cos);
    return coefficient_preset(preset);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::Config, m); };
  if (eps.empty()) bad("eps list is empty");
  for (double e : eps)
    if (!(e > 0.0 && e < 1.0)) bad("eps values must lie in (0, 1), got " + brief(e));
  if (std::set<double>(eps.begin(), eps.end()).size() != eps.size()) bad("eps values must be distinct");
  if (!(T0 > 0.0)) bad("T0 must be positive");
  if (profile != "gaussian") bad("unknown amplitude profile '" + profile + "'");
  if (!(resolved_amplitude() >= 0.0) || !(resolved_width() > 0.0)) bad("profile needs amplitude >= 0 and width > 0");
  if (amplitude_points < 16 || amplitude_points % 2) bad("amplitude points must be even and at least 16");
  if (points_per_cell < 4 || points_per_cell % 2) bad("points per cell must be even and at least 4");
  if (!(stability_margin > 0.0 && stability_margin <= 1.0)) bad("stability margin must lie in (0, 1]");
  if (samples < 2) bad("at least two samples are needed");
  if (run_pde && samples < 50) bad("full-equation runs sample at least 50 times");
  if (frame < -1 || frame > 1) bad("frame must be -1, 0 (auto) or +1");
  if (!(energy_bound > 0.0)) bad("energy bound must be positive");
  if (threads < 0) bad("threads must be non-negative");
  const auto c = coefficients();
  if (c.min_a <= 0.0 || c.min_b <= 0.0) bad("coefficients a and b must be positive");
}

ExperimentConfig config_from_table(const ConfigTable& t) {
  static const std::set<std::string> known = {
      "coefficients.preset", "coefficients.a_cos", "coefficients.b_cos", "coefficients.c_cos",
      "amplitude.kind",      "amplitude.level",    "amplitude.profile",  "amplitude.amplitude",
      "amplitude.width",     "amplitude.slow_length", "amplitude.points", "amplitude.T0",
      "amplitude.frame",     "sweep.eps",          "sweep.samples",      "grid.points_per_cell",
      "grid.stability_margin", "energy.bound",     "run.pde",            "run.output_dir",
      "run.seed",            "run.threads"};
  for (const auto& [k, v] : t.entries())
    if (!known.count(k)) throw Error(ErrorKind::Config, "unknown config key '" + k + "'");
  ExperimentConfig c;
  c.preset = t.string("coefficients.preset", c.preset);
  c.a_cos = t.numbers("coefficients.a_cos", {});
  c.b_cos = t.numbers("coefficients.b_cos", {});
  c.c_cos = t.numbers("coefficients.c_cos", {});
  try {
    c.kind = parse_amplitude_kind(t.string("amplitude.kind", to_string(c.kind)));
    c.level = parse_level(t.string("amplitude.level", to_string(c.level)));
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  c.profile = t.string("amplitude.profile", c.profile);
  c.amplitude = t.number("amplitude.amplitude", c.amplitude);
  c.width = t.number("amplitude.width", c.width);
  c.slow_length = t.number("amplitude.slow_length", c.slow_length);
  c.amplitude_points = t.integer("amplitude.points", c.amplitude_points);
  c.T0 = t.number("amplitude.T0", c.T0);
  c.frame = t.integer("amplitude.frame", c.frame);
  c.eps = t.numbers("sweep.eps", c.eps);
  c.samples = t.integer("sweep.samples", c.samples);
  c.points_per_cell = t.integer("grid.points_per_cell", c.points_per_cell);
  c.stability_margin = t.number("grid.stability_margin", c.stability_margin);
  c.energy_bound = t.number("energy.bound", c.energy_bound);
  c.run_pde = t.boolean("run.pde", c.run_pde);
  c.output_dir = t.string("run.output_dir", c.output_dir);
  c.seed = static_cast<unsigned>(t.integer("run.seed", static_cast<int>(c.seed)));
  c.threads = t.integer("run.threads", c.threads);
  return c;
}

std::string to_toml(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[coefficients]\n";
  os << "preset = \"" << c.preset << "\"\n";
  if (!c.a_cos.empty()) os << "a_cos = " << toml_array(c.a_cos) << "\n";
  if (!c.b_cos.empty()) os << "b_cos = " << toml_array(c.b_cos) << "\n";
  if (!c.c_cos.empty()) os << "c_cos = " << toml_array(c.c_cos) << "\n";
  os << "\n[amplitude]\n";
  os << "kind = \"" << to_string(c.kind) << "\"\n";
  os << "level = \"" << to_string(c.level) << "\"\n";
  os << "profile = \"" << c.profile << "\"\n";
  os << "amplitude = " << fmt(c.amplitude) << "\n";
  os << "width = " << fmt(c.width) << "\n";
  os << "slow_length = " << fmt(c.slow_length) << "\n";
  os << "points = " << c.amplitude_points << "\n";
  os << "T0 = " << fmt(c.T0) << "\n";
  os << "frame = " << c.frame << "\n";
  os << "\n[sweep]\n";
  os << "eps = " << toml_array(c.eps) << "\n";
  os << "samples = " << c.samples << "\n";
  os << "\n[grid]\n";
  os << "points_per_cell = " << c.points_per_cell << "\n";
  os << "stability_margin = " << fmt(c.stability_margin) << "\n";
  os << "\n[energy]\n";
  os << "bound = " << fmt(c.energy_bound) << "\n";
  os << "\n[run]\n";
  os << "pde = " << (c.run_pde ? "true" : "false") << "\n";
  os << "output_dir = \"" << c.output_dir << "\"\n";
  os << "seed = " << c.seed << "\n";
  os << "threads = " << c.threads << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

std::mutex g_cache_mutex;
std::map<std::string, EffectiveModel> g_cache;

}  // namespace

EffectiveModel cached_effective_model(const PeriodicCoefficients& coeffs, int points_per_cell) {
  // Cell cutoff matched to the 2/3 band of the big-torus grid.
  const int cutoff = (points_per_cell - 1) / 3;
  const std::string key = coeffs.hash() + "/" + std::to_string(cutoff);
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    if (auto it = g_cache.find(key); it != g_cache.end()) return it->second;
  }
  ModelOptions mo;
  mo.cell_cutoff = cutoff;
  EffectiveModel m = build_effective_model(coeffs, mo);
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  return g_cache.emplace(key, std::move(m)).first->second;
}

void clear_model_cache() {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  g_cache.clear();
}

ScalingFit fit_convergence_rate(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> e, v;
  for (const auto& [x, y] : pairs) {
    e.push_back(x);
    v.push_back(y);
  }
  return fit_power_law(e, v);
}

namespace {

struct Run {
  PeriodicCoefficients coeffs;
  EffectiveModel model;
  std::shared_ptr<const AmplitudeTrajectory> traj;
  SpectralGrid grid;
  std::vector<double> times;
};

Run prepare(const ExperimentConfig& cfg, double eps) {
  Run r;
  r.coeffs = cfg.coefficients();
  r.model = cached_effective_model(r.coeffs, cfg.points_per_cell);
  const auto cf = assemble_amplitude_coefficients(r.model, cfg.kind);
  const int nc = cells_for(cfg.resolved_slow_length(), eps);
  r.grid = SpectralGrid(nc, cfg.points_per_cell);
  const AmplitudeGrid ag(cfg.amplitude_points, slow_length_for(nc, eps));
  const auto A0 = gaussian_profile(ag, cfg.resolved_amplitude(), cfg.resolved_width());
  std::vector<double> Ts;
  for (int k = 0; k < cfg.samples; ++k) Ts.push_back(cfg.T0 * k / (cfg.samples - 1));
  switch (cfg.kind) {
    case AmplitudeKind::kdv:
      r.traj = std::make_shared<AmplitudeTrajectory>(kdv_evolve(A0, cf, cfg.T0, Ts));
      break;
    case AmplitudeKind::burgers:
      r.traj = std::make_shared<AmplitudeTrajectory>(
          burgers_evolve(A0, cf, cfg.T0, Ts, cfg.level == Level::improved));
      break;
    case AmplitudeKind::whitham:
      r.traj = std::make_shared<AmplitudeTrajectory>(whitham_evolve(A0, AmplitudeField(ag), cf, cfg.T0, Ts));
      break;
  }
  const double scale = std::pow(eps, 1 + amplitude_alpha(cfg.kind));
  for (double T : Ts) r.times.push_back(T / scale);
  return r;
}

Approximant make_approximant(const ExperimentConfig& cfg, const Run& r, double eps, int sign) {
  const Approximant lead(r.coeffs, r.model, r.grid, r.traj, eps, Level::leading, sign);
  return cfg.level == Level::improved ? improve(lead) : lead;
}

GridField without_mean(const GridField& f) {
  GridField g = f;
  const double m = mean(f);
  for (auto& v : g.values) v -= m;
  return g;
}

void run_one(const ExperimentConfig& cfg, int sign, EpsilonRecord& rec) {
  const double eps = rec.eps;
  const int alpha = amplitude_alpha(cfg.kind);
  const Run r = prepare(cfg, eps);
  const Approximant approx = make_approximant(cfg, r, eps, sign);
  rec.cells = r.grid.cells;
  rec.points = r.grid.size();
  rec.t_end = r.times.back();
  rec.trace.resize(r.times.size());
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    rec.trace[k].t = r.times[k];
    rec.trace[k].residual = residual_norms(residual_field(approx, r.times[k]));
  }
  rec.energy_lower = std::numeric_limits<double>::infinity();
  if (cfg.run_pde) {
    const BoussinesqOperator op(r.coeffs, r.grid);
    SimState s0;
    s0.u = approx.synthesize(0.0);
    s0.v = approx.synthesize_dt(0.0);
    StepperConfig sc;
    sc.stability_margin = cfg.stability_margin;
    std::size_t k = 0;
    EnergyTrace et;
    et.eps = eps;
    et.alpha = alpha;
    evolve(s0, op, rec.t_end, sc, r.times, [&](const SimState& s) {
      auto& row = rec.trace.at(k++);
      const GridField err = s.u - approx.leading_field(s.t);
      row.err_h1 = sobolev_norm(err, 1.0);
      row.err_h2 = sobolev_norm(err, 2.0);
      const auto jet = approx.jet(s.t, 1);
      const ErrorState es = error_state(s.u, s.v, jet[0], jet[1], eps, alpha);
      const EnergyOperator eop(r.coeffs, jet[0]);
      const ErrorState mf{without_mean(es.R), without_mean(es.Rt)};
      const ErrorEnergy e = error_energy(mf, eop);
      row.energy = e.total();
      row.hamiltonian = hamiltonian(mf, eop);
      const auto b = eop.bounds();
      rec.energy_lower = std::min(rec.energy_lower, b.lower);
      rec.energy_upper = std::max(rec.energy_upper, b.upper);
      et.t.push_back(s.t);
      et.energy.push_back(e);
      et.H.push_back(row.hamiltonian);
    });
    rec.gronwall = gronwall_audit(et, cfg.energy_bound);
  }
  for (const auto& row : rec.trace) {
    rec.residual_sup.l2 = std::max(rec.residual_sup.l2, row.residual.l2);
    rec.residual_sup.h1 = std::max(rec.residual_sup.h1, row.residual.h1);
    rec.residual_sup.inv_l2 = std::max(rec.residual_sup.inv_l2, row.residual.inv_l2);
    rec.residual_sup.inv_h1 = std::max(rec.residual_sup.inv_h1, row.residual.inv_h1);
    rec.err_h1_sup = std::max(rec.err_h1_sup, row.err_h1);
    rec.err_h2_sup = std::max(rec.err_h2_sup, row.err_h2);
    rec.energy_sup = std::max(rec.energy_sup, row.energy);
  }
  if (!std::isfinite(rec.energy_lower)) rec.energy_lower = 0.0;
  rec.ok = true;
}

}  // namespace

// Frame sign with the smaller initial H1 residual at the largest eps.
int resolve_frame(const ExperimentConfig& cfg) {
  if (cfg.frame != 0) return cfg.frame;
  ExperimentConfig probe = cfg;
  probe.samples = 2;
  probe.T0 = cfg.T0 / 50.0;
  const double eps = *std::max_element(cfg.eps.begin(), cfg.eps.end());
  const Run r = prepare(probe, eps);
  double best = std::numeric_limits<double>::infinity();
  int sign = 1;
  for (int s : {1, -1}) {
    const double v = residual_norms(residual_field(make_approximant(probe, r, eps, s), 0.0)).h1;
    if (v < best * (1.0 - 1e-9)) {
      best = v;
      sign = s;
    }
  }
  return sign;
}

EpsilonRecord run_epsilon(const ExperimentConfig& config, double eps, int sign) {
  config.validate();
  if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidArgument, "frame sign must be +1 or -1");
  EpsilonRecord rec;
  rec.eps = eps;
  run_one(config, sign, rec);
  return rec;
}

namespace {

void add_slope(ScalingReport& rep, const std::string& name, const std::vector<double>& e, const std::vector<double>& v,
               double target, double tol, bool checked) {
  SlopeCheck s;
  s.name = name;
  s.target = target;
  s.tolerance = tol;
  s.checked = checked;
  try {
    const auto f = fit_power_law(e, v);
    s.slope = f.slope;
    s.intercept = f.intercept;
    s.half_width = f.half_width;
    s.rms_residual = f.rms_residual;
    s.pass = std::abs(f.slope - target) <= tol;
  } catch (const Error&) {
    s.slope = std::numeric_limits<double>::quiet_NaN();
    s.pass = false;
  }
  rep.slopes.push_back(s);
}

void assemble_fits(ScalingReport& rep) {
  const auto& cfg = rep.config;
  const bool periodic = !cfg.coefficients().homogeneous();
  const double rtol = periodic ? 0.7 : 0.5;
  const int alpha = amplitude_alpha(cfg.kind);
  std::vector<const EpsilonRecord*> ok;
  for (const auto& r : rep.rows)
    if (r.ok) ok.push_back(&r);
  std::sort(ok.begin(), ok.end(), [](auto* a, auto* b) { return a->eps < b->eps; });
  std::vector<double> e;
  for (auto* r : ok) e.push_back(r->eps);
  auto col = [&](auto get) {
    std::vector<double> v;
    for (auto* r : ok) v.push_back(get(*r));
    return v;
  };
  const bool burgers = cfg.kind == AmplitudeKind::burgers;
  add_slope(rep, "res_h1", e, col([](const EpsilonRecord& r) { return r.residual_sup.h1; }), res_target(cfg.kind),
            rtol, cfg.level == Level::improved);
  add_slope(rep, "inv_h1", e, col([](const EpsilonRecord& r) { return r.residual_sup.inv_h1; }),
            inv_target(cfg.kind), rtol, cfg.level == Level::improved && !burgers);
  add_slope(rep, "res_l2", e, col([](const EpsilonRecord& r) { return r.residual_sup.l2; }), res_target(cfg.kind),
            rtol, false);
  add_slope(rep, "inv_l2", e, col([](const EpsilonRecord& r) { return r.residual_sup.inv_l2; }),
            inv_target(cfg.kind), rtol, false);
  if (!cfg.run_pde) return;
  const double err_target = (1.0 + 2.0 * alpha) / 2.0;
  add_slope(rep, "err_h1", e, col([](const EpsilonRecord& r) { return r.err_h1_sup; }), err_target, 0.3,
            cfg.kind != AmplitudeKind::whitham);
  add_slope(rep, "err_h2", e, col([](const EpsilonRecord& r) { return r.err_h2_sup; }), err_target, 0.3, false);
  add_slope(rep, "drift", e, col([](const EpsilonRecord& r) { return r.gronwall.drift_rate; }), 1.0 + alpha, 0.5,
            true);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (auto* r : ok) {
    lo = std::min(lo, r->gronwall.gamma);
    hi = std::max(hi, r->gronwall.gamma);
  }
  if (ok.empty())
    rep.gamma_ratio = std::numeric_limits<double>::infinity();
  else if (hi <= 0.0)
    rep.gamma_ratio = 1.0;  // no growth anywhere
  else
    rep.gamma_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  rep.error_monotone = ok.size() >= 2;
  for (std::size_t i = 1; i < ok.size(); ++i)
    if (!(ok[i]->err_h1_sup > ok[i - 1]->err_h1_sup)) rep.error_monotone = false;
}

ScalingReport sweep(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (cfg.eps.size() < 2) throw Error(ErrorKind::Config, "a sweep needs at least two eps values");
  ScalingReport rep;
  rep.config = cfg;
  rep.frame_sign = resolve_frame(cfg);
  rep.rows.resize(cfg.eps.size());
  for (std::size_t i = 0; i < cfg.eps.size(); ++i) rep.rows[i].eps = cfg.eps[i];
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads =
      std::min<unsigned>(cfg.threads > 0 ? cfg.threads : hw, static_cast<unsigned>(cfg.eps.size()));
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < rep.rows.size(); i = next++) {
      auto& rec = rep.rows[i];
      try {
        run_one(cfg, rep.frame_sign, rec);
      } catch (const std::exception& ex) {
        rec = EpsilonRecord{};
        rec.eps = cfg.eps[i];
        rec.ok = false;
        rec.error = "eps=" + brief(cfg.eps[i]) + ": " + ex.what();
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(log_mutex);
        progress(rec.ok ? "eps=" + brief(rec.eps) + " done" : rec.error);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  assemble_fits(rep);
  return rep;
}

}  // namespace

ScalingReport run_validation(const ExperimentConfig& config, const ProgressFn& progress) {
  return sweep(config, progress);
}

ScalingReport run_residual_sweep(const ExperimentConfig& config, const ProgressFn& progress) {
  ExperimentConfig c = config;
  c.run_pde = false;
  return sweep(c, progress);
}

bool ScalingReport::complete() const {
  return std::all_of(rows.begin(), rows.end(), [](const EpsilonRecord& r) { return r.ok; });
}

const SlopeCheck* ScalingReport::slope(const std::string& name) const {
  for (const auto& s : slopes)
    if (s.name == name) return &s;
  return nullptr;
}

bool ScalingReport::pass() const {
  if (!complete()) return false;
  for (const auto& s : slopes)
    if (s.checked && !s.pass) return false;
  if (config.run_pde) {
    if (!(gamma_ratio <= 2.0)) return false;
    for (const auto& r : rows)
      if (!r.gronwall.within_bound) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>(); }

json norms_json(const ResidualNorms& n) {
  return {{"res_l2", num(n.l2)}, {"res_h1", num(n.h1)}, {"inv_l2", num(n.inv_l2)}, {"inv_h1", num(n.inv_h1)}};
}

ResidualNorms norms_from(const json& j) {
  return {num(j.at("res_l2")), num(j.at("res_h1")), num(j.at("inv_l2")), num(j.at("inv_h1"))};
}

}  // namespace

nlohmann::json ScalingReport::summary() const {
  json j;
  j["schema"] = kReportSchema;
  j["version"] = kVersion;
  j["config_toml"] = to_toml(config);
  j["kind"] = to_string(config.kind);
  j["level"] = to_string(config.level);
  j["alpha"] = amplitude_alpha(config.kind);
  j["frame_sign"] = frame_sign;
  j["profile"] = {{"family", config.profile},
                  {"amplitude", config.resolved_amplitude()},
                  {"width", config.resolved_width()},
                  {"slow_length", config.resolved_slow_length()}};
  json rows_j = json::array();
  for (const auto& r : rows) {
    json rj;
    rj["eps"] = r.eps;
    rj["ok"] = r.ok;
    rj["error"] = r.error;
    rj["cells"] = r.cells;
    rj["points"] = r.points;
    rj["t_end"] = num(r.t_end);
    rj["residual_sup"] = norms_json(r.residual_sup);
    rj["err_h1_sup"] = num(r.err_h1_sup);
    rj["err_h2_sup"] = num(r.err_h2_sup);
    rj["energy_sup"] = num(r.energy_sup);
    rj["energy_lower"] = num(r.energy_lower);
    rj["energy_upper"] = num(r.energy_upper);
    rj["gronwall"] = {{"sup_energy", num(r.gronwall.sup_energy)},
                      {"bound", num(r.gronwall.bound)},
                      {"within_bound", r.gronwall.within_bound},
                      {"gamma", num(r.gronwall.gamma)},
                      {"drift_rate", num(r.gronwall.drift_rate)},
                      {"sup_hamiltonian", num(r.gronwall.sup_hamiltonian)}};
    rows_j.push_back(rj);
  }
  j["rows"] = rows_j;
  json sl = json::array();
  for (const auto& s : slopes)
    sl.push_back({{"name", s.name},
                  {"slope", num(s.slope)},
                  {"intercept", num(s.intercept)},
                  {"half_width", num(s.half_width)},
                  {"rms_residual", num(s.rms_residual)},
                  {"target", s.target},
                  {"tolerance", s.tolerance},
                  {"checked", s.checked},
                  {"pass", s.pass}});
  j["slopes"] = sl;
  j["gamma_ratio"] = num(gamma_ratio);
  j["error_monotone"] = error_monotone;
  j["complete"] = complete();
  j["pass"] = pass();
  return j;
}

ScalingReport ScalingReport::from_summary(const nlohmann::json& j) {
  if (j.at("schema").get<int>() != kReportSchema) throw Error(ErrorKind::Config, "unsupported report schema");
  ScalingReport rep;
  rep.config = config_from_table(parse_config(j.at("config_toml").get<std::string>()));
  rep.frame_sign = j.at("frame_sign").get<int>();
  for (const auto& rj : j.at("rows")) {
    EpsilonRecord r;
    r.eps = rj.at("eps").get<double>();
    r.ok = rj.at("ok").get<bool>();
    r.error = rj.at("error").get<std::string>();
    r.cells = rj.at("cells").get<int>();
    r.points = rj.at("points").get<int>();
    r.t_end = num(rj.at("t_end"));
    r.residual_sup = norms_from(rj.at("residual_sup"));
    r.err_h1_sup = num(rj.at("err_h1_sup"));
    r.err_h2_sup = num(rj.at("err_h2_sup"));
    r.energy_sup = num(rj.at("energy_sup"));
    r.energy_lower = num(rj.at("energy_lower"));
    r.energy_upper = num(rj.at("energy_upper"));
    const auto& g = rj.at("gronwall");
    r.gronwall.sup_energy = num(g.at("sup_energy"));
    r.gronwall.bound = num(g.at("bound"));
    r.gronwall.within_bound = g.at("within_bound").get<bool>();
    r.gronwall.gamma = num(g.at("gamma"));
    r.gronwall.drift_rate = num(g.at("drift_rate"));
    r.gronwall.sup_hamiltonian = num(g.at("sup_hamiltonian"));
    rep.rows.push_back(r);
  }
  for (const auto& sj : j.at("slopes")) {
    SlopeCheck s;
    s.name = sj.at("name").get<std::string>();
    s.slope = sj.at("slope").is_null() ? std::numeric_limits<double>::quiet_NaN() : sj.at("slope").get<double>();
    s.intercept = num(sj.at("intercept"));
    s.half_width = num(sj.at("half_width"));
    s.rms_residual = num(sj.at("rms_residual"));
    s.target = sj.at("target").get<double>();
    s.tolerance = sj.at("tolerance").get<double>();
    s.checked = sj.at("checked").get<bool>();
    s.pass = sj.at("pass").get<bool>();
    rep.slopes.push_back(s);
  }
  rep.gamma_ratio = num(j.at("gamma_ratio"));
  rep.error_monotone = j.at("error_monotone").get<bool>();
  return rep;
}

void report_emit(const ScalingReport& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + (dir / name).string() + "'");
    out << std::setprecision(17);
    return out;
  };
  {
    auto out = open("summary.json");
    out << rep.summary().dump(2) << "\n";
  }
  {
    auto out = open("rows.csv");
    out << "eps,ok,cells,points,t_end,res_l2,res_h1,inv_l2,inv_h1,err_h1,err_h2,energy_sup,gamma,drift_rate\n";
    for (const auto& r : rep.rows)
      out << r.eps << ',' << (r.ok ? 1 : 0) << ',' << r.cells << ',' << r.points << ',' << r.t_end << ','
          << r.residual_sup.l2 << ',' << r.residual_sup.h1 << ',' << r.residual_sup.inv_l2 << ','
          << r.residual_sup.inv_h1 << ',' << r.err_h1_sup << ',' << r.err_h2_sup << ',' << r.energy_sup << ','
          << r.gronwall.gamma << ',' << r.gronwall.drift_rate << '\n';
  }
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    auto out = open("trace_eps" + std::to_string(i) + ".csv");
    out << "t,res_l2,res_h1,inv_l2,inv_h1,err_h1,err_h2,E,H\n";
    for (const auto& t : rep.rows[i].trace)
      out << t.t << ',' << t.residual.l2 << ',' << t.residual.h1 << ',' << t.residual.inv_l2 << ','
          << t.residual.inv_h1 << ',' << t.err_h1 << ',' << t.err_h2 << ',' << t.energy << ',' << t.hamiltonian
          << '\n';
  }
  {
    auto out = open("loglog.dat");
    out << "# eps res_h1 inv_h1 err_h1 err_h2 energy_sup drift_rate\n";
    for (const auto& r : rep.rows)
      if (r.ok)
        out << r.eps << ' ' << r.residual_sup.h1 << ' ' << r.residual_sup.inv_h1 << ' ' << r.err_h1_sup << ' '
            << r.err_h2_sup << ' ' << r.energy_sup << ' ' << r.gronwall.drift_rate << '\n';
  }
  {
    auto out = open("loglog.gp");
    out << "set logscale xy\nset xlabel 'eps'\nset key left top\n"
        << "plot 'loglog.dat' u 1:2 w lp t 'res H1', '' u 1:3 w lp t 'inv res H1', "
        << "'' u 1:4 w lp t 'error H1', '' u 1:5 w lp t 'error H2'\n";
  }
}

}  // namespace pbq

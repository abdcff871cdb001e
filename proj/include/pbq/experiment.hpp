#pragma once

// Validation experiments: for each eps build the effective model, amplitude
// trajectory and approximant, run the full equation from well-prepared data,
// record residual, error and energy traces, and fit power laws in eps.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbq/config.hpp"
#include "pbq/energy_meter.hpp"
#include "pbq/residual_meter.hpp"

namespace pbq {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

struct ExperimentConfig {
  // Coefficients: a named preset, or cosine series when a_cos is non-empty.
  std::string preset = "homogeneous";
  std::vector<double> a_cos, b_cos, c_cos;
  AmplitudeKind kind = AmplitudeKind::kdv;
  Level level = Level::improved;
  std::vector<double> eps{0.15, 0.2, 0.25, 0.3};
  double T0 = 1.0;
  // Gaussian A_max exp(-(X - L/2)^2 / w^2); non-positive means the per-kind default.
  std::string profile = "gaussian";
  double amplitude = 0.0;
  double width = 0.0;
  double slow_length = 0.0;  // L_X; non-positive means 20 w
  int amplitude_points = 256;
  int points_per_cell = 16;
  double stability_margin = 0.5;
  int samples = 51;
  int frame = 0;  // +1 or -1; 0 picks the sign with the smaller initial residual
  double energy_bound = 1e4;
  bool run_pde = true;
  std::string output_dir = "pbq-out";
  unsigned seed = 1;
  int threads = 0;  // 0: one per eps up to the hardware count

  double default_amplitude() const;
  double default_width() const;
  double resolved_amplitude() const { return amplitude > 0.0 ? amplitude : default_amplitude(); }
  double resolved_width() const { return width > 0.0 ? width : default_width(); }
  double resolved_slow_length() const { return slow_length > 0.0 ? slow_length : 20.0 * resolved_width(); }
  PeriodicCoefficients coefficients() const;
  // Config error on an invalid combination, before any compute.
  void validate() const;
};

ExperimentConfig config_from_table(const ConfigTable& table);
// Canonical TOML that config_from_table reads back to the same config.
std::string to_toml(const ExperimentConfig& config);

struct TraceRow {
  double t = 0.0;
  ResidualNorms residual;
  double err_h1 = 0.0, err_h2 = 0.0;
  double energy = 0.0, hamiltonian = 0.0;
};

struct EpsilonRecord {
  double eps = 0.0;
  bool ok = false;
  std::string error;  // failure message when !ok
  int cells = 0;
  int points = 0;
  double t_end = 0.0;
  ResidualNorms residual_sup;
  double err_h1_sup = 0.0, err_h2_sup = 0.0;
  double energy_sup = 0.0, energy_lower = 0.0, energy_upper = 0.0;
  GronwallReport gronwall;
  std::vector<TraceRow> trace;
};

struct SlopeCheck {
  std::string name;
  double slope = 0.0, intercept = 0.0, half_width = 0.0, rms_residual = 0.0;
  double target = 0.0, tolerance = 0.0;
  bool checked = false;  // false: reported only
  bool pass = false;
};

struct ScalingReport {
  ExperimentConfig config;
  int frame_sign = 1;
  std::vector<EpsilonRecord> rows;
  std::vector<SlopeCheck> slopes;
  double gamma_ratio = 0.0;  // max / min Gronwall rate over the sweep
  bool error_monotone = false;
  bool complete() const;
  bool pass() const;
  const SlopeCheck* slope(const std::string& name) const;

  nlohmann::json summary() const;
  static ScalingReport from_summary(const nlohmann::json& j);
};

// Least squares of log(value) on log(eps); NonPositiveValue on a non-positive value.
ScalingFit fit_convergence_rate(const std::vector<std::pair<double, double>>& pairs);

using ProgressFn = std::function<void(const std::string&)>;
ScalingReport run_validation(const ExperimentConfig& config, const ProgressFn& progress = {});

// One eps of a sweep in the given frame; throws instead of recording failures.
EpsilonRecord run_epsilon(const ExperimentConfig& config, double eps, int sign);
// Configured frame sign, or for frame = 0 the sign with the smaller initial residual.
int resolve_frame(const ExperimentConfig& config);

// Residual-only experiment (no full-equation runs).
ScalingReport run_residual_sweep(const ExperimentConfig& config, const ProgressFn& progress = {});

// Writes summary.json, rows.csv, trace_eps<k>.csv and loglog.dat under dir.
void report_emit(const ScalingReport& report, const std::filesystem::path& dir);

// Effective model with a process-wide cache keyed by coefficient hash and cell cutoff.
EffectiveModel cached_effective_model(const PeriodicCoefficients& coeffs, int points_per_cell);
void clear_model_cache();

}  // namespace pbq

#pragma once

// Long-wave data of the first band: corrector g1, wave speed, fourth
// derivative of the band at l = 0, the quadratic coefficient nu2 and the
// interaction kernels used by the amplitude expansions.

#include <json.hpp>

#include <string>
#include <vector>

#include "pbq/bloch_spectrum.hpp"

namespace pbq {

struct EffectiveModel {
  double wave_speed = 0.0;  // c, with c^2 = lambda2 / 2
  double lambda2 = 0.0;     // lambda_1''(0)
  double lambda4 = 0.0;     // lambda_1''''(0)
  double lambda2_error = 0.0;
  double lambda4_error = 0.0;
  double nu2 = 0.0;
  double whitham_s2 = 0.0;  // -2 nu2
  double gap = 0.0;         // delta_0
  CellFunction g1;
  int cell_cutoff = 0;
  double fd_step = 0.0;
  std::string coeff_hash;

  nlohmann::json to_json() const;
  static EffectiveModel from_json(const nlohmann::json& j);
};

struct ModelOptions {
  int cell_cutoff = -1;  // -1: default_cell_cutoff
  double fd_step = 0.02;
  double gap_tol = 1e-3;
  int gap_samples = 200;  // uniform l samples on (-1/2, 1/2] for delta_0
};

// Unique odd zero-mean solution of L_0 g1 = a'.
CellFunction compute_g1(const PeriodicCoefficients& coeffs, int cutoff = -1);
// Even zero-mean second corrector; used only as a parity and regression check.
CellFunction compute_g2(const PeriodicCoefficients& coeffs, const CellFunction& g1, int cutoff = -1);
double compute_nu2(const PeriodicCoefficients& coeffs, const CellFunction& g1);

struct DispersionDerivatives {
  double lambda2 = 0.0, lambda4 = 0.0;
  double lambda2_error = 0.0, lambda4_error = 0.0;
  double step = 0.0;
};

// Bloch numbers needed by compute_dispersion_derivatives for step h:
// +-h .. +-4h and the same at h/2.
std::vector<double> derivative_stencil(double h);
// Even Richardson fit lambda(l) = lambda2 l^2/2 + lambda4 l^4/24 + ... + l^8 term
// through the samples at h .. 4h (lambda(0) = 0), reported at step h/2; the
// error estimate is the change against the fit at step h.
DispersionDerivatives compute_dispersion_derivatives(const BlochBand& band, double h);

// Band-1 eigenfunction with unit cell mean, w1(l) / mean(w1(l)).
CellFunction unit_mean_mode(const PeriodicCoefficients& coeffs, double l, int cutoff = -1);

// (1/2pi) int conj(w1(l)) (d+il)(c (d+il)(w1(l-m) w1(m))) dx with unit-mean
// modes; l - m is taken as given (no folding).
cplx kernel_s11_1(const PeriodicCoefficients& coeffs, double l, double m, int cutoff = -1);
// P_s(l) of (d+il)(c (d+il)(w1(l-m) w1(m))).
CellFunction kernel_s11_v(const PeriodicCoefficients& coeffs, double l, double m, int cutoff = -1);
// (1/2pi) int conj(w1(l)) (d+il)(c (d+il)(v1 v2)) dx for given cell functions.
cplx kernel_svv_1(const PeriodicCoefficients& coeffs, double l, const CellFunction& v1, const CellFunction& v2,
                  int cutoff = -1);

EffectiveModel build_effective_model(const PeriodicCoefficients& coeffs, const ModelOptions& opts = {});

enum class AmplitudeKind { kdv, burgers, whitham };
const char* to_string(AmplitudeKind kind);
AmplitudeKind parse_amplitude_kind(const std::string& s);

// Amplitude equations in normalized form:
//   kdv:     A_T = -dispersion A_XXX - nonlinearity (A^2)_X
//   burgers: A_T = -nonlinearity (A^2)_X
//   whitham: A_TT = (flux_linear A + flux_quadratic A^2)_XX
struct AmplitudeCoefficients {
  AmplitudeKind kind = AmplitudeKind::kdv;
  double speed = 0.0;          // frame speed c (0 for Whitham)
  double dispersion = 0.0;     // lambda4 / (48 c)
  double nonlinearity = 0.0;   // nu2 / (2 c)
  double flux_linear = 0.0;    // lambda2 / 2
  double flux_quadratic = 0.0; // s2 / 2
  double lambda4 = 0.0;        // raw values kept for the Burgers corrector
  double nu2 = 0.0;
};

AmplitudeCoefficients assemble_amplitude_coefficients(const EffectiveModel& model, AmplitudeKind kind);

}  // namespace pbq

#pragma once

// Spectral solvers for the amplitude equations on a periodic slow-variable
// grid X in [0, length), together with the Burgers corrector and the exact
// Taylor jets in T used to differentiate approximants in time.

#include <functional>
#include <vector>

#include "pbq/effective_model.hpp"
#include "pbq/spectral_core.hpp"

namespace pbq {

struct AmplitudeGrid {
  int points = 0;  // even
  double length = 0.0;

  AmplitudeGrid() = default;
  AmplitudeGrid(int points, double length);

  double spacing() const noexcept { return length / points; }
  double X(int r) const noexcept { return r * spacing(); }
  double wavenumber(int k) const noexcept { return 2.0 * kPi * k / length; }
  bool retained(int k) const noexcept { return 3 * std::abs(k) < points; }
  bool operator==(const AmplitudeGrid&) const = default;
};

struct AmplitudeField {
  AmplitudeGrid grid;
  std::vector<double> values;
  double T = 0.0;

  AmplitudeField() = default;
  explicit AmplitudeField(const AmplitudeGrid& g) : grid(g), values(static_cast<std::size_t>(g.points), 0.0) {}
  AmplitudeField(const AmplitudeGrid& g, std::vector<double> v, double T = 0.0);
};

// A_max exp(-(X - length/2)^2 / w^2).
AmplitudeField gaussian_profile(const AmplitudeGrid& g, double amplitude, double width);
// Largest half-spectrum modulus outside the 2/3 band relative to the peak.
double spectral_tail(const AmplitudeField& f);
bool resolved(const AmplitudeField& f, double tol = 1e-8);

// Half-spectrum (points/2+1) with 1/points scaling; modes outside the 2/3 band zeroed.
std::vector<cplx> amplitude_spectrum(const AmplitudeField& f);
// X-derivative of the given order (Nyquist dropped for odd orders).
std::vector<double> amplitude_derivative(const AmplitudeGrid& g, const std::vector<double>& v, int order);

struct AmplitudeSnapshot {
  double T = 0.0;
  std::vector<double> A;
  std::vector<double> V;  // Whitham flux variable, empty otherwise
  std::vector<double> B;  // Burgers corrector, empty unless requested
};

struct AmplitudeTrajectory {
  AmplitudeKind kind = AmplitudeKind::kdv;
  AmplitudeCoefficients coeffs;
  AmplitudeGrid grid;
  bool has_corrector = false;
  std::vector<AmplitudeSnapshot> snapshots;  // ascending T

  // Snapshot whose T matches to 1e-12 (relative); InvalidArgument otherwise.
  const AmplitudeSnapshot& at(double T) const;
};

struct AmplitudeOptions {
  double dt = 0.0;            // 0: derived from the grid and the data
  double cfl = 0.2;           // fraction of dX / (characteristic speed)
  double dt_max = 0.01;
  double blowup_ceiling = 1e6;
  double gradient_growth = 20.0;  // Whitham: max |A_X| relative to its initial value
  double smallness = -1.0;        // Whitham C1; <0: 0.1 * flux_linear / |s2|
};

using AmplitudeObserver = std::function<void(const AmplitudeSnapshot&)>;

// 2c A_T + (lambda4/24) A_XXX + nu2 (A^2)_X = 0 by integrating-factor RK4.
AmplitudeTrajectory kdv_evolve(const AmplitudeField& A0, const AmplitudeCoefficients& coeffs, double T_end,
                               const std::vector<double>& sample_T, const AmplitudeOptions& opts = {});

// -1 / min (nu2 / c) A0_X, or +infinity when the minimum is not negative.
double burgers_shock_time(const AmplitudeField& A0, const AmplitudeCoefficients& coeffs);

// 2c A_T + nu2 (A^2)_X = 0; with_corrector also integrates
//   2c B_T + 2 nu2 (A B)_X + g = 0,  g = d_X^{-1} A_TT + (lambda4/24) A_XXX,  B(0) = 0.
// ShockTooClose unless T_end <= burgers_shock_time / 2.
AmplitudeTrajectory burgers_evolve(const AmplitudeField& A0, const AmplitudeCoefficients& coeffs, double T_end,
                                   const std::vector<double>& sample_T, bool with_corrector,
                                   const AmplitudeOptions& opts = {});

double whitham_smallness(const AmplitudeCoefficients& coeffs, const AmplitudeOptions& opts = {});

// A_T = V_X, V_T = (flux_linear A + flux_quadratic A^2)_X by spectral RK4.
AmplitudeTrajectory whitham_evolve(const AmplitudeField& A0, const AmplitudeField& V0,
                                   const AmplitudeCoefficients& coeffs, double T_end,
                                   const std::vector<double>& sample_T, const AmplitudeOptions& opts = {});

// Normalized Taylor coefficients in T at a snapshot: A[k] = d^k A / dT^k / k!,
// k = 0..order, from the dealiased right-hand side of the trajectory's
// equation. B is filled when the trajectory carries the corrector.
struct AmplitudeJet {
  std::vector<std::vector<double>> A, B;
};
AmplitudeJet amplitude_jet(const AmplitudeTrajectory& traj, const AmplitudeSnapshot& snap, int order);

}  // namespace pbq

#pragma once

// Method-of-lines solver for
//   u_tt = (a u_x)_x - (b u_xx)_xx + (c (u^2)_x)_x
// written as the first-order system u_t = v, v_t = ... on the big torus.

#include <functional>
#include <string>
#include <vector>

#include "pbq/bloch_spectrum.hpp"
#include "pbq/spectral_core.hpp"

namespace pbq {

struct SimState {
  double t = 0.0;
  GridField u, v;
};

struct StepperConfig {
  double dt = 0.0;  // 0: stability_margin * stability_limit
  double stability_margin = 0.5;
  bool dealias = true;
  bool nonlinear = true;
  double blowup_ceiling = 1e6;  // on max |u| and max |v|
};

// Pseudospectral evaluation of the spatial operator. With dealiasing the
// linear part is the Galerkin restriction to the 2/3 band (exact while the
// coefficient bandwidth stays below P/6) and u^2 and c * (.) are truncated.
class BoussinesqOperator {
 public:
  BoussinesqOperator(const PeriodicCoefficients& coeffs, const SpectralGrid& grid, bool dealias = true);

  const SpectralGrid& grid() const { return grid_; }
  const PeriodicCoefficients& coefficients() const { return coeffs_; }
  bool dealiased() const { return dealias_; }

  // (a u_x)_x - (b u_xx)_xx, i.e. -L u.
  GridField linear(const GridField& u) const;
  // (c (u^2)_x)_x
  GridField nonlinear(const GridField& u) const;
  // (c (u w)_x)_x, the symmetric bilinear form behind nonlinear().
  GridField bilinear(const GridField& u, const GridField& w) const;
  GridField apply(const GridField& u, bool with_nonlinear = true) const;

 private:
  void mask(std::vector<cplx>& half) const;

  PeriodicCoefficients coeffs_;
  SpectralGrid grid_;
  bool dealias_;
  std::vector<double> a_, b_, c_;
  bool a_const_, b_const_, c_const_;
};

// (du, dv) for the first-order system.
std::pair<GridField, GridField> rhs(const SimState& state, const BoussinesqOperator& op, bool nonlinear = true);
std::pair<GridField, GridField> rhs(const SimState& state, const PeriodicCoefficients& coeffs);

// 2.8 / omega(pi/h) with omega(k) = sqrt(max_b k^4 + max_a k^2).
double stability_limit(const PeriodicCoefficients& coeffs, const SpectralGrid& grid);

using SimObserver = std::function<void(const SimState&)>;

// Classical RK4 from initial.t to t_end. The observer runs at every entry of
// sample_times (ascending, inside [initial.t, t_end]); steps are shortened so
// each sample time is hit exactly.
SimState evolve(const SimState& initial, const BoussinesqOperator& op, double t_end, const StepperConfig& config,
                const std::vector<double>& sample_times = {}, const SimObserver& observer = {});

// Raw little-endian float64 (u then v) in stem + ".bin", metadata in stem + ".json".
void write_checkpoint(const std::string& stem, const SimState& state, const std::string& coeff_hash);
SimState read_checkpoint(const std::string& stem, std::string* coeff_hash = nullptr);

}  // namespace pbq

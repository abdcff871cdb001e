#pragma once

// Energies of the scaled error R = eps^{-(3+2 alpha)/2} (u - psi) around an
// approximant psi (psi already carries the eps^alpha factor). The operator
// B = (a + 2 c psi) - d_x (b d_x .) acts on the 2/3 band of the big torus;
// quadratic forms use it matrix-free, the square root A = B^{1/2} is formed
// densely on grids of at most 4096 points.

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "pbq/bloch_spectrum.hpp"
#include "pbq/spectral_core.hpp"

namespace pbq {

// Constants with lower * (|R|^2_{H^2} + |Rt|^2) <= 2E <= upper * (|R|^2_{H^2} + |Rt|^2 + |d_x^{-1} Rt|^2).
struct EnergyBounds {
  double lower = 0.0, upper = 0.0;
};

class EnergyOperator {
 public:
  // NotPositiveDefinite when a + 2 c psi or b fails to be positive on the grid.
  EnergyOperator(const PeriodicCoefficients& coeffs, const GridField& psi);

  const SpectralGrid& grid() const { return grid_; }
  double min_multiplier() const { return min_m_; }
  double max_multiplier() const { return max_m_; }
  EnergyBounds bounds() const;

  // B u with u projected onto the 2/3 band first.
  GridField apply(const GridField& u) const;
  // B^{-1} f by preconditioned conjugate gradients to 1e-13 relative.
  GridField solve(const GridField& f) const;
  double form(const GridField& u) const;          // <u, B u>
  double inverse_form(const GridField& f) const;  // <f, B^{-1} f>

  // Dense square root and its inverse (InvalidArgument above 4096 points).
  GridField sqrt_apply(const GridField& u) const;
  GridField inv_sqrt_apply(const GridField& u) const;
  double smallest_eigenvalue() const;
  // Largest |B_ij - B_ji| of the assembled matrix before symmetrization.
  double asymmetry() const;

 private:
  struct Dense;
  const Dense& dense() const;
  GridField precondition(const GridField& r) const;

  SpectralGrid grid_;
  std::vector<double> m_, b_;
  double min_m_ = 0.0, max_m_ = 0.0, min_b_ = 0.0, max_b_ = 0.0;
  double mean_m_ = 0.0, mean_b_ = 0.0;
  mutable std::shared_ptr<const Dense> dense_;
};

EnergyOperator build_energy_operator(const PeriodicCoefficients& coeffs, const GridField& psi);

// L2 inner product on the torus, h * sum f g.
double inner(const GridField& f, const GridField& g);

struct ErrorState {
  GridField R, Rt;
};
// R = eps^{-(3+2 alpha)/2} (u - psi), Rt likewise from the time derivatives.
ErrorState error_state(const GridField& u, const GridField& ut, const GridField& psi, const GridField& psi_t,
                       double eps, int alpha);

struct ErrorEnergy {
  double kinetic = 0.0;    // |Rt|^2
  double inverse = 0.0;    // |A^{-1} d_x^{-1} Rt|^2
  double potential = 0.0;  // |R|^2
  double elastic = 0.0;    // |A d_x R|^2
  double total() const { return 0.5 * (kinetic + inverse + potential + elastic); }
};
// NonZeroMean unless R and Rt are mean-free.
ErrorEnergy error_energy(const ErrorState& s, const EnergyOperator& op);
// 1/2 (|Rt|^2 + |A d_x R|^2).
double hamiltonian(const ErrorState& s, const EnergyOperator& op);

struct HomogeneousEnergy {
  double inverse = 0.0;    // int (d_x^{-1} Rt)^2
  double potential = 0.0;  // int R^2
  double gradient = 0.0;   // int R_x^2
  double coupling = 0.0;   // int 2 psi R^2
  double cubic = 0.0;      // int 2 eps^{(3+2 alpha)/2} R^3 / 3
  double total() const { return inverse + potential + gradient + coupling + cubic; }
};
HomogeneousEnergy homogeneous_energy(const ErrorState& s, const GridField& psi, double eps, int alpha);

struct EnergyTrace {
  double eps = 0.0;
  int alpha = 0;
  std::vector<double> t;
  std::vector<ErrorEnergy> energy;
  std::vector<double> H;
  // Columns: t,E,H,kinetic,inverse,potential,elastic
  std::string to_csv(bool header = true) const;
};

struct GronwallReport {
  double sup_energy = 0.0;
  double bound = 0.0;
  bool within_bound = false;
  // Smallest gamma with E(t) <= E(0) + gamma eps^{1+alpha} t (1 + sup E).
  double gamma = 0.0;
  // max_t |H(t) - H(0)| / (t (1 + sup E)); expected to scale like eps^{1+alpha}.
  double drift_rate = 0.0;
  double sup_hamiltonian = 0.0;
};
GronwallReport gronwall_audit(const EnergyTrace& trace, double bound);

// (max - min) / max of the gamma values of a sweep.
double gamma_spread(const std::vector<GronwallReport>& reports);

}  // namespace pbq

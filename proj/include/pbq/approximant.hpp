#pragma once

// Physical-space approximants built from amplitude trajectories. The band-1
// part places each amplitude mode K on the big-torus mode n = K eps L_X / 2pi
// with the unit-mean first-band profile of the grid operator at l = n / N_c;
// the improved level adds the Burgers corrector and, in periodic media, the
// complement-band correction V solving L V = P_s [N(Psi_1 + V) - d_t^2 V].

#include <memory>
#include <vector>

#include "pbq/amplitude_sim.hpp"
#include "pbq/boussinesq_sim.hpp"

namespace pbq {

enum class Level { leading, improved };
const char* to_string(Level level);
Level parse_level(const std::string& s);

// Exponent alpha of the amplitude scaling eps^alpha A: kdv 2, burgers 1, whitham 0.
int amplitude_alpha(AmplitudeKind kind);

// Number of cells N_c = round(L_X / (2 pi eps)) so that the slow grid maps onto the big torus.
int cells_for(double slow_length, double eps);
// Slow-variable length 2 pi N_c eps matching a big torus of N_c cells.
double slow_length_for(int cells, double eps);

struct CorrectionStats {
  int iterations = 0;
  double contraction = 0.0;  // largest ratio of successive updates
  double fixed_point_residual = 0.0;
};

class Approximant {
 public:
  Approximant(const PeriodicCoefficients& coeffs, const EffectiveModel& model, const SpectralGrid& grid,
              std::shared_ptr<const AmplitudeTrajectory> traj, double eps, Level level, int frame_sign = +1,
              int jet_order = 6);

  AmplitudeKind kind() const { return traj_->kind; }
  Level level() const { return level_; }
  double eps() const { return eps_; }
  int alpha() const { return amplitude_alpha(traj_->kind); }
  int frame_sign() const { return frame_sign_; }
  double frame_speed() const { return traj_->coeffs.speed; }
  // Slow time T = eps^(1+alpha) t.
  double slow_time(double t) const;
  // Largest |l| of a band-1 component; +inf in the extended zone of a homogeneous medium.
  double cutoff() const { return cutoff_; }
  const SpectralGrid& grid() const { return op_.grid(); }
  const BoussinesqOperator& op() const { return op_; }
  const AmplitudeTrajectory& trajectory() const { return *traj_; }
  const PeriodicCoefficients& coefficients() const { return coeffs_; }
  const EffectiveModel& model() const { return model_; }
  std::shared_ptr<const AmplitudeTrajectory> trajectory_ptr() const { return traj_; }
  int jet_order() const { return jet_order_; }
  bool corrected() const;  // complement-band corrections active

  // Taylor coefficients u_j of Psi(t + s) = sum_j u_j s^j, j = 0..order (order <= jet order).
  std::vector<GridField> jet(double t, int order) const;
  GridField synthesize(double t) const;
  GridField synthesize_dt(double t) const;
  GridField synthesize_dtt(double t) const;
  // Band-1 part only (no complement correction), order-0 term.
  GridField band1(double t) const;
  // eps^alpha A(eps(x + sigma c t), T): the plain comparison field, no synthesis profile.
  GridField leading_field(double t) const;

  CorrectionStats last_correction() const { return stats_; }
  // Orthogonality of the correction to w_1 over all rows: max |<w_1, V>| / max |V|.
  double correction_overlap(double t) const;

 private:
  std::vector<GridField> band1_jet(double t, int order, bool plain) const;
  std::vector<GridField> correction_jet(const std::vector<GridField>& psi) const;

  PeriodicCoefficients coeffs_;
  EffectiveModel model_;
  BoussinesqOperator op_;
  std::shared_ptr<const AmplitudeTrajectory> traj_;
  std::shared_ptr<const DiscreteBlochOperator> bloch_;  // null in homogeneous media
  double eps_;
  Level level_;
  int frame_sign_;
  int jet_order_;
  double cutoff_;
  mutable CorrectionStats stats_;
};

// Improved copies; InvalidArgument on a kind mismatch, GapViolation when the
// band-1 window leaves the gap.
Approximant improve_kdv(const Approximant& a);
Approximant improve_whitham(const Approximant& a);
Approximant improve(const Approximant& a);

}  // namespace pbq

#include "pbq/approximant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pbq {

const char* to_string(Level level) { return level == Level::leading ? "leading" : "improved"; }

Level parse_level(const std::string& s) {
  if (s == "leading") return Level::leading;
  if (s == "improved") return Level::improved;
  throw Error(ErrorKind::Config, "unknown improvement level '" + s + "'");
}

int amplitude_alpha(AmplitudeKind kind) {
  switch (kind) {
    case AmplitudeKind::kdv: return 2;
    case AmplitudeKind::burgers: return 1;
    case AmplitudeKind::whitham: return 0;
  }
  return 0;
}

int cells_for(double slow_length, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, 1)");
  return std::max(1, static_cast<int>(std::lround(slow_length / (2.0 * kPi * eps))));
}

double slow_length_for(int cells, double eps) { return 2.0 * kPi * cells * eps; }

Approximant::Approximant(const PeriodicCoefficients& coeffs, const EffectiveModel& model, const SpectralGrid& grid,
                         std::shared_ptr<const AmplitudeTrajectory> traj, double eps, Level level, int frame_sign,
                         int jet_order)
    : coeffs_(coeffs),
      model_(model),
      op_(coeffs, grid),
      traj_(std::move(traj)),
      eps_(eps),
      level_(level),
      frame_sign_(frame_sign),
      jet_order_(jet_order) {
  if (!traj_) throw Error(ErrorKind::InvalidArgument, "approximant needs an amplitude trajectory");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, 1)");
  if (frame_sign != 1 && frame_sign != -1) throw Error(ErrorKind::InvalidArgument, "frame sign must be +1 or -1");
  if (jet_order < 2) throw Error(ErrorKind::InvalidArgument, "jet order must be at least 2");
  const double L = slow_length_for(grid.cells, eps);
  if (std::abs(traj_->grid.length - L) > 1e-9 * L)
    throw Error(ErrorKind::InvalidArgument, "slow grid length must equal 2 pi N_c eps");
  if (coeffs.homogeneous()) {
    cutoff_ = std::numeric_limits<double>::infinity();
  } else {
    if (!(model.gap > 0.0)) throw Error(ErrorKind::GapViolation, "effective model reports no spectral gap");
    cutoff_ = 0.25 * model.gap;
    bloch_ = std::make_shared<DiscreteBlochOperator>(coeffs, grid);
  }
}

double Approximant::slow_time(double t) const { return std::pow(eps_, 1 + alpha()) * t; }

bool Approximant::corrected() const { return level_ == Level::improved && bloch_ != nullptr; }

std::vector<GridField> Approximant::band1_jet(double t, int order, bool plain) const {
  const auto& g = grid();
  const int n_big = g.size(), nc = g.cells;
  const auto& ag = traj_->grid;
  const auto& snap = traj_->at(slow_time(t));
  const auto jets = amplitude_jet(*traj_, snap, order);
  const bool with_b = !plain && level_ == Level::improved && traj_->has_corrector;

  std::vector<std::vector<cplx>> ahat;  // ahat[p][k], k = 0..M/2
  for (int p = 0; p <= order; ++p) {
    std::vector<double> v = jets.A[p];
    if (with_b)
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += eps_ * jets.B[p][i];
    ahat.push_back(amplitude_spectrum(AmplitudeField(ag, std::move(v))));
  }

  const double beta_scale = std::pow(eps_, 1 + alpha());
  const double amp = std::pow(eps_, alpha());
  const double speed = frame_sign_ * frame_speed();
  const bool extended = plain || !std::isfinite(cutoff_);

  double total = 0.0, leaked = 0.0;
  std::vector<std::vector<cplx>> full(order + 1, std::vector<cplx>(n_big));
  const int kmax = ag.points / 2;
  for (int k = -kmax + 1; k < kmax; ++k) {
    const int ka = std::abs(k);
    const cplx a0 = k >= 0 ? ahat[0][ka] : std::conj(ahat[0][ka]);
    const double weight = std::norm(a0);
    total += weight;
    if (weight == 0.0) continue;
    const double l = static_cast<double>(k) / nc;
    // profile W over cell modes: (first mode, values)
    int m_lo = 0;
    std::vector<cplx> W{1.0};
    if (extended) {
      if (plain ? 2 * ka >= n_big : !g.retained(k)) {
        leaked += weight;
        continue;
      }
    } else {
      if (std::abs(l) > cutoff_) {
        leaked += weight;
        continue;
      }
      const auto& row = bloch_->row(bloch_row(g, k));
      const cplx mean = row.vectors(-row.first_mode, 0);
      m_lo = row.first_mode;
      W.resize(row.vectors.rows());
      for (Eigen::Index i = 0; i < row.vectors.rows(); ++i) W[i] = row.vectors(i, 0) / mean;
    }
    const cplx omega{0.0, speed * l};
    const cplx phase = std::exp(omega * t);
    for (int j = 0; j <= order; ++j) {
      cplx acc{};
      double fact = 1.0;  // q!
      cplx wq = 1.0;      // omega^q
      for (int q = 0; q <= j; ++q) {
        if (q > 0) {
          fact *= q;
          wq *= omega;
        }
        const int p = j - q;
        const cplx ap = k >= 0 ? ahat[p][ka] : std::conj(ahat[p][ka]);
        acc += std::pow(beta_scale, p) * ap * wq / fact;
      }
      acc *= amp * phase;
      for (std::size_t i = 0; i < W.size(); ++i) {
        const int n = k + nc * (m_lo + static_cast<int>(i));
        full[j][g.slot(n)] += acc * W[i];
      }
    }
  }
  if (total > 0.0 && leaked > 1e-8 * total)
    throw Error(ErrorKind::CutoffViolation, "amplitude spectrum leaks past the band-1 window (fraction " +
                                                num_text(leaked / total) + ")");

  std::vector<GridField> out;
  for (const auto& f : full) out.push_back(real_part(complex_from_spectrum(g, f), 1e-10));
  return out;
}

std::vector<GridField> Approximant::correction_jet(const std::vector<GridField>& psi) const {
  const int J = static_cast<int>(psi.size()) - 1;
  const auto& g = grid();
  std::vector<GridField> V(J + 1, GridField(g));
  CorrectionStats st;
  double prev = 0.0;
  bool converged = false;
  // Whitham is capped at 20 sweeps; the eps-sized Burgers amplitude contracts
  // more slowly and gets a longer budget.
  const int max_iter = kind() == AmplitudeKind::whitham ? 20 : 40;
  for (int it = 1; it <= max_iter && !converged; ++it) {
    std::vector<GridField> u(J + 1);
    for (int j = 0; j <= J; ++j) u[j] = psi[j] + V[j];
    std::vector<GridField> next(J + 1);
    double delta = 0.0, scale = 0.0;
    for (int j = 0; j <= J; ++j) {
      GridField rhs(g);
      for (int p = 0; 2 * p <= j; ++p) {
        const GridField b = op_.bilinear(u[p], u[j - p]);
        const double w = 2 * p == j ? 1.0 : 2.0;
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += w * b[i];
      }
      if (j + 2 <= J)
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= (j + 2.0) * (j + 1.0) * V[j + 2][i];
      next[j] = real_part(bloch_inverse(bloch_->solve_on_complement(bloch_forward(rhs))), 1e-10);
      delta = std::max(delta, max_abs(next[j] - V[j]));
      scale = std::max(scale, max_abs(next[j]));
    }
    V = std::move(next);
    st.iterations = it;
    // ratios near the roundoff floor are noise
    if (it >= 2 && delta > 1e-8 * scale) st.contraction = std::max(st.contraction, delta / prev);
    st.fixed_point_residual = scale > 0.0 ? delta / scale : 0.0;
    if (delta <= 1e-11 * scale || scale == 0.0) converged = true;
    if (st.contraction >= 0.5)
      throw Error(ErrorKind::NoContraction, "correction iteration contracts by " + num_text(st.contraction));
    prev = delta;
  }
  stats_ = st;
  if (!converged) throw Error(ErrorKind::NoContraction, "correction iteration did not converge in " + std::to_string(max_iter) + " steps");
  return V;
}

std::vector<GridField> Approximant::jet(double t, int order) const {
  if (order < 0 || order > jet_order_) throw Error(ErrorKind::InvalidArgument, "jet order out of range");
  if (!corrected()) return band1_jet(t, order, false);
  auto psi = band1_jet(t, jet_order_, false);
  const auto V = correction_jet(psi);
  psi.resize(order + 1);
  for (int j = 0; j <= order; ++j) psi[j] = psi[j] + V[j];
  return psi;
}

GridField Approximant::synthesize(double t) const { return jet(t, 0)[0]; }
GridField Approximant::synthesize_dt(double t) const { return jet(t, 1)[1]; }
GridField Approximant::synthesize_dtt(double t) const { return 2.0 * jet(t, 2)[2]; }
GridField Approximant::band1(double t) const { return band1_jet(t, 0, false)[0]; }
GridField Approximant::leading_field(double t) const { return band1_jet(t, 0, true)[0]; }

double Approximant::correction_overlap(double t) const {
  if (!corrected()) return 0.0;
  const auto V = correction_jet(band1_jet(t, jet_order_, false));
  const BlochField b = bloch_forward(V[0]);
  double overlap = 0.0, size = 0.0;
  for (int r = 0; r < grid().cells; ++r) overlap = std::max(overlap, std::abs(bloch_->band1_coefficient(b, r)));
  for (const auto& v : b.values) size = std::max(size, std::abs(v));
  return size > 0.0 ? overlap / size : 0.0;
}

namespace {

Approximant improved_copy(const Approximant& a) {
  if (std::isfinite(a.cutoff()) && a.cutoff() > 0.5 * a.model().gap)
    throw Error(ErrorKind::GapViolation, "band-1 window leaves the invertibility region");
  return Approximant(a.coefficients(), a.model(), a.grid(), a.trajectory_ptr(), a.eps(), Level::improved,
                     a.frame_sign(), a.jet_order());
}

}  // namespace

Approximant improve_kdv(const Approximant& a) {
  if (a.kind() != AmplitudeKind::kdv) throw Error(ErrorKind::InvalidArgument, "improve_kdv needs a KdV approximant");
  return improved_copy(a);
}

Approximant improve_whitham(const Approximant& a) {
  if (a.kind() != AmplitudeKind::whitham)
    throw Error(ErrorKind::InvalidArgument, "improve_whitham needs a Whitham approximant");
  return improved_copy(a);
}

Approximant improve(const Approximant& a) { return improved_copy(a); }

}  // namespace pbq

#include "pbq/energy_meter.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace pbq {

namespace {

constexpr int kDenseLimit = 4096;

// Largest retained mode index.
int top_mode(const SpectralGrid& g) {
  int n = 0;
  while (g.retained(n + 1) && n + 1 <= g.size() / 2) ++n;
  return n;
}

std::vector<cplx> half_spectrum(const GridField& f) {
  std::vector<cplx> h(f.grid.size() / 2 + 1);
  forward_half(f.values, h);
  return h;
}

// Coordinates in the orthonormal real basis {1/sqrt L, sqrt(2/L) cos, sqrt(2/L) sin} of the 2/3 band.
Eigen::VectorXd to_basis(const GridField& f, int top) {
  const auto h = half_spectrum(f);
  const double L = f.grid.length();
  Eigen::VectorXd x(2 * top + 1);
  x(0) = std::sqrt(L) * h[0].real();
  for (int n = 1; n <= top; ++n) {
    x(2 * n - 1) = std::sqrt(2.0 * L) * h[n].real();
    x(2 * n) = -std::sqrt(2.0 * L) * h[n].imag();
  }
  return x;
}

GridField from_basis(const SpectralGrid& g, const Eigen::VectorXd& x, int top) {
  std::vector<cplx> h(g.size() / 2 + 1);
  const double L = g.length();
  h[0] = x(0) / std::sqrt(L);
  for (int n = 1; n <= top; ++n) h[n] = cplx(x(2 * n - 1), -x(2 * n)) / std::sqrt(2.0 * L);
  GridField out(g);
  inverse_half(h, out.values);
  return out;
}

}  // namespace

struct EnergyOperator::Dense {
  int top = 0;
  double asymmetry = 0.0;
  Eigen::MatrixXd Q;
  Eigen::VectorXd lambda;
};

EnergyOperator::EnergyOperator(const PeriodicCoefficients& coeffs, const GridField& psi) : grid_(psi.grid) {
  const int n = grid_.size();
  m_.resize(n);
  b_.resize(n);
  for (int r = 0; r < n; ++r) {
    const double x = grid_.x(r);
    m_[r] = coeffs.a_at(x) + 2.0 * coeffs.c_at(x) * psi[r];
    b_[r] = coeffs.b_at(x);
  }
  min_m_ = *std::min_element(m_.begin(), m_.end());
  max_m_ = *std::max_element(m_.begin(), m_.end());
  min_b_ = *std::min_element(b_.begin(), b_.end());
  max_b_ = *std::max_element(b_.begin(), b_.end());
  if (!(min_m_ > 0.0))
    throw Error(ErrorKind::NotPositiveDefinite, "a + 2 c psi reaches " + num_text(min_m_));
  if (!(min_b_ > 0.0)) throw Error(ErrorKind::NotPositiveDefinite, "b reaches " + num_text(min_b_));
  for (int r = 0; r < n; ++r) {
    mean_m_ += m_[r] / n;
    mean_b_ += b_[r] / n;
  }
}

EnergyBounds EnergyOperator::bounds() const {
  return {std::min({1.0, min_m_, min_b_}), std::max({1.0, max_m_, max_b_, 1.0 / min_m_})};
}

GridField EnergyOperator::apply(const GridField& u) const {
  const GridField up = dealias(u);
  GridField mu(grid_), flux = spectral_derivative(up, 1);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu[i] = m_[i] * up[i];
    flux[i] *= b_[i];
  }
  return dealias(mu - spectral_derivative(flux, 1));
}

double inner(const GridField& f, const GridField& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * f.grid.spacing();
}

GridField EnergyOperator::precondition(const GridField& r) const {
  auto h = half_spectrum(r);
  for (int k = 0; k < static_cast<int>(h.size()); ++k) {
    const double kk = grid_.wavenumber(k);
    h[k] = grid_.retained(k) ? h[k] / (mean_m_ + mean_b_ * kk * kk) : 0.0;
  }
  GridField out(grid_);
  inverse_half(h, out.values);
  return out;
}

GridField EnergyOperator::solve(const GridField& f) const {
  const GridField rhs = dealias(f);
  GridField x(grid_), r = rhs;
  const double target = 1e-13 * std::sqrt(std::max(inner(rhs, rhs), 0.0));
  if (target == 0.0) return x;
  GridField z = precondition(r), p = z;
  double rz = inner(r, z);
  for (int it = 0; it < 1000; ++it) {
    const GridField Ap = apply(p);
    const double pAp = inner(p, Ap);
    if (!(pAp > 0.0)) throw Error(ErrorKind::NotPositiveDefinite, "conjugate gradients met a non-positive direction");
    const double step = rz / pAp;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += step * p[i];
      r[i] -= step * Ap[i];
    }
    if (std::sqrt(inner(r, r)) <= target) return x;
    z = precondition(r);
    const double rz_next = inner(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  throw Error(ErrorKind::InvalidArgument, "conjugate gradients did not converge");
}

double EnergyOperator::form(const GridField& u) const { return inner(dealias(u), apply(u)); }

double EnergyOperator::inverse_form(const GridField& f) const { return inner(dealias(f), solve(f)); }

const EnergyOperator::Dense& EnergyOperator::dense() const {
  if (dense_) return *dense_;
  if (grid_.size() > kDenseLimit)
    throw Error(ErrorKind::InvalidArgument, "dense square root is limited to 4096 grid points");
  auto d = std::make_shared<Dense>();
  d->top = top_mode(grid_);
  const int dim = 2 * d->top + 1;
  Eigen::MatrixXd M(dim, dim);
  for (int j = 0; j < dim; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e(j) = 1.0;
    M.col(j) = to_basis(apply(from_basis(grid_, e, d->top)), d->top);
  }
  d->asymmetry = (M - M.transpose()).cwiseAbs().maxCoeff();
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "eigendecomposition failed");
  d->Q = es.eigenvectors();
  d->lambda = es.eigenvalues();
  if (!(d->lambda(0) > 0.0))
    throw Error(ErrorKind::NotPositiveDefinite, "smallest eigenvalue " + num_text(d->lambda(0)));
  dense_ = d;
  return *dense_;
}

GridField EnergyOperator::sqrt_apply(const GridField& u) const {
  const auto& d = dense();
  const Eigen::VectorXd y = d.Q * (d.lambda.array().sqrt() * (d.Q.transpose() * to_basis(u, d.top)).array()).matrix();
  return from_basis(grid_, y, d.top);
}

GridField EnergyOperator::inv_sqrt_apply(const GridField& u) const {
  const auto& d = dense();
  const Eigen::VectorXd y =
      d.Q * (d.lambda.array().rsqrt() * (d.Q.transpose() * to_basis(u, d.top)).array()).matrix();
  return from_basis(grid_, y, d.top);
}

double EnergyOperator::smallest_eigenvalue() const { return dense().lambda(0); }

double EnergyOperator::asymmetry() const { return dense().asymmetry; }

EnergyOperator build_energy_operator(const PeriodicCoefficients& coeffs, const GridField& psi) {
  return EnergyOperator(coeffs, psi);
}

ErrorState error_state(const GridField& u, const GridField& ut, const GridField& psi, const GridField& psi_t,
                       double eps, int alpha) {
  const double s = std::pow(eps, -(3.0 + 2.0 * alpha) / 2.0);
  return {s * (u - psi), s * (ut - psi_t)};
}

namespace {

void require_mean_free(const ErrorState& s) {
  for (const GridField* f : {&s.R, &s.Rt}) {
    const double rms = l2_norm(*f) / std::sqrt(f->grid.length());
    if (std::abs(mean(*f)) > 1e-10 * rms)
      throw Error(ErrorKind::NonZeroMean, "error state must be mean-free");
  }
}

}  // namespace

ErrorEnergy error_energy(const ErrorState& s, const EnergyOperator& op) {
  require_mean_free(s);
  ErrorEnergy e;
  e.kinetic = inner(s.Rt, s.Rt);
  e.inverse = op.inverse_form(antiderivative(s.Rt));
  e.potential = inner(s.R, s.R);
  e.elastic = op.form(spectral_derivative(s.R, 1));
  return e;
}

double hamiltonian(const ErrorState& s, const EnergyOperator& op) {
  return 0.5 * (inner(s.Rt, s.Rt) + op.form(spectral_derivative(s.R, 1)));
}

HomogeneousEnergy homogeneous_energy(const ErrorState& s, const GridField& psi, double eps, int alpha) {
  require_mean_free(s);
  const GridField g = antiderivative(s.Rt);
  const GridField rx = spectral_derivative(s.R, 1);
  const double h = s.R.grid.spacing();
  const double cubic_scale = 2.0 * std::pow(eps, (3.0 + 2.0 * alpha) / 2.0) / 3.0;
  HomogeneousEnergy e;
  e.inverse = inner(g, g);
  e.potential = inner(s.R, s.R);
  e.gradient = inner(rx, rx);
  for (std::size_t i = 0; i < s.R.size(); ++i) {
    const double r = s.R[i];
    e.coupling += 2.0 * psi[i] * r * r * h;
    e.cubic += cubic_scale * r * r * r * h;
  }
  return e;
}

std::string EnergyTrace::to_csv(bool header) const {
  std::ostringstream os;
  os << std::setprecision(17);
  if (header) os << "t,E,H,kinetic,inverse,potential,elastic\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = energy[i];
    os << t[i] << ',' << e.total() << ',' << (i < H.size() ? H[i] : 0.0) << ',' << e.kinetic << ',' << e.inverse
       << ',' << e.potential << ',' << e.elastic << '\n';
  }
  return os.str();
}

GronwallReport gronwall_audit(const EnergyTrace& trace, double bound) {
  if (trace.t.empty()) throw Error(ErrorKind::InvalidArgument, "empty energy trace");
  GronwallReport r;
  r.bound = bound;
  for (const auto& e : trace.energy) r.sup_energy = std::max(r.sup_energy, e.total());
  for (double h : trace.H) r.sup_hamiltonian = std::max(r.sup_hamiltonian, std::abs(h));
  r.within_bound = r.sup_energy <= bound;
  const double rate = std::pow(trace.eps, 1.0 + trace.alpha);
  const double e0 = trace.energy.front().total();
  for (std::size_t i = 1; i < trace.t.size(); ++i) {
    const double dt = trace.t[i] - trace.t.front();
    if (dt <= 0.0) continue;
    const double scale = dt * (1.0 + r.sup_energy);
    r.gamma = std::max(r.gamma, (trace.energy[i].total() - e0) / (rate * scale));
    if (i < trace.H.size()) r.drift_rate = std::max(r.drift_rate, std::abs(trace.H[i] - trace.H.front()) / scale);
  }
  return r;
}

double gamma_spread(const std::vector<GronwallReport>& reports) {
  if (reports.empty()) return 0.0;
  double lo = reports.front().gamma, hi = lo;
  for (const auto& r : reports) {
    lo = std::min(lo, r.gamma);
    hi = std::max(hi, r.gamma);
  }
  return hi > 0.0 ? (hi - lo) / hi : 0.0;
}

}  // namespace pbq

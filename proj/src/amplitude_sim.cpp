#include "pbq/amplitude_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pbq {

namespace {

using Half = std::vector<cplx>;

Half fwd(const AmplitudeGrid& g, const std::vector<double>& v) {
  Half h(g.points / 2 + 1);
  forward_half(v, h);
  return h;
}

std::vector<double> inv(const AmplitudeGrid& g, const Half& h) {
  std::vector<double> v(g.points);
  inverse_half(h, v);
  return v;
}

void mask(const AmplitudeGrid& g, Half& h) {
  for (int k = 0; k < static_cast<int>(h.size()); ++k)
    if (!g.retained(k)) h[k] = 0.0;
}

Half dX(const AmplitudeGrid& g, Half h, int order) {
  for (int k = 0; k < static_cast<int>(h.size()); ++k) h[k] *= std::pow(cplx{0.0, g.wavenumber(k)}, order);
  if (order % 2 == 1) h.back() = 0.0;
  return h;
}

Half product(const AmplitudeGrid& g, const Half& a, const Half& b) {
  const auto x = inv(g, a);
  const auto y = &a == &b ? x : inv(g, b);
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = x[i] * y[i];
  Half out = fwd(g, p);
  mask(g, out);
  return out;
}

Half axpy(const Half& y, cplx s, const Half& x) {
  Half out = y;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * x[i];
  return out;
}

Half scaled(cplx s, Half x) {
  for (auto& v : x) v *= s;
  return x;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_finite(const std::vector<double>& v, double ceiling, double T) {
  for (double x : v)
    if (!(std::abs(x) <= ceiling))
      throw Error(ErrorKind::BlowUp, "amplitude left the ceiling at T = " + num_text(T));
}

Half masked_spectrum(const AmplitudeField& f) {
  Half h = fwd(f.grid, f.values);
  mask(f.grid, h);
  return h;
}

// Step driver shared by all solvers: shortens steps so every sample time is hit.
template <class State, class Step, class Emit>
void drive(State& state, double T0, double T_end, double dt, const std::vector<double>& sample_T, Step step,
           Emit emit) {
  if (!std::is_sorted(sample_T.begin(), sample_T.end()))
    throw Error(ErrorKind::InvalidArgument, "sample times must be ascending");
  for (double s : sample_T)
    if (s < T0 - 1e-12 || s > T_end + 1e-12) throw Error(ErrorKind::InvalidArgument, "sample time outside the window");
  std::vector<double> stops(sample_T.begin(), sample_T.end());
  if (stops.empty() || stops.back() < T_end) stops.push_back(T_end);
  double T = T0;
  std::size_t next = 0;
  for (double stop : stops) {
    const double span = stop - T;
    if (span > 1e-14) {
      const long n = static_cast<long>(std::ceil(span / dt - 1e-9));
      const double h = span / static_cast<double>(n);
      for (long s = 0; s < n; ++s) step(state, T + s * h, h);
      T = stop;
    }
    while (next < sample_T.size() && sample_T[next] <= stop + 1e-12) {
      emit(state, sample_T[next]);
      ++next;
    }
  }
}

double default_dt(const AmplitudeGrid& g, double speed, const AmplitudeOptions& opts) {
  if (opts.dt > 0.0) return opts.dt;
  if (speed <= 0.0) return opts.dt_max;
  return std::min(opts.dt_max, opts.cfl * g.spacing() / speed);
}

void require_grid(const AmplitudeField& f) {
  if (f.grid.points < 4 || f.grid.points % 2 != 0 || !(f.grid.length > 0.0))
    throw Error(ErrorKind::InvalidArgument, "amplitude grid needs an even number of points and positive length");
}

}  // namespace

AmplitudeGrid::AmplitudeGrid(int points_, double length_) : points(points_), length(length_) {
  if (points < 4 || points % 2 != 0) throw Error(ErrorKind::InvalidArgument, "amplitude grid needs even points >= 4");
  if (!(length > 0.0)) throw Error(ErrorKind::InvalidArgument, "amplitude grid length must be positive");
}

AmplitudeField::AmplitudeField(const AmplitudeGrid& g, std::vector<double> v, double T_) : grid(g), values(std::move(v)), T(T_) {
  if (static_cast<int>(values.size()) != g.points) throw Error(ErrorKind::InvalidArgument, "amplitude field size mismatch");
}

AmplitudeField gaussian_profile(const AmplitudeGrid& g, double amplitude, double width) {
  AmplitudeField f(g);
  for (int r = 0; r < g.points; ++r) {
    const double y = (g.X(r) - 0.5 * g.length) / width;
    f.values[r] = amplitude * std::exp(-y * y);
  }
  return f;
}

double spectral_tail(const AmplitudeField& f) {
  const Half h = fwd(f.grid, f.values);
  double peak = 0.0, tail = 0.0;
  for (int k = 0; k < static_cast<int>(h.size()); ++k) {
    peak = std::max(peak, std::abs(h[k]));
    if (!f.grid.retained(k)) tail = std::max(tail, std::abs(h[k]));
  }
  return peak > 0.0 ? tail / peak : 0.0;
}

bool resolved(const AmplitudeField& f, double tol) { return spectral_tail(f) <= tol; }

std::vector<cplx> amplitude_spectrum(const AmplitudeField& f) { return masked_spectrum(f); }

std::vector<double> amplitude_derivative(const AmplitudeGrid& g, const std::vector<double>& v, int order) {
  return inv(g, dX(g, fwd(g, v), order));
}

const AmplitudeSnapshot& AmplitudeTrajectory::at(double T) const {
  for (const auto& s : snapshots)
    if (std::abs(s.T - T) <= 1e-12 * std::max(1.0, std::abs(T))) return s;
  throw Error(ErrorKind::InvalidArgument, "no amplitude snapshot at T = " + num_text(T));
}

AmplitudeTrajectory kdv_evolve(const AmplitudeField& A0, const AmplitudeCoefficients& coeffs, double T_end,
                               const std::vector<double>& sample_T, const AmplitudeOptions& opts) {
  require_grid(A0);
  const auto& g = A0.grid;
  const int nh = g.points / 2 + 1;
  const double d = coeffs.dispersion, nl = coeffs.nonlinearity;

  // linear symbol of -d d_X^3
  std::vector<cplx> sym(nh);
  for (int k = 0; k < nh; ++k) {
    const double K = g.wavenumber(k);
    sym[k] = g.retained(k) ? cplx{0.0, d * K * K * K} : cplx{};
  }
  auto N = [&](const Half& a) { return scaled(-nl, dX(g, product(g, a, a), 1)); };

  auto step = [&](Half& v, double, double h) {
    Half E(nh), E2(nh);
    for (int k = 0; k < nh; ++k) {
      E[k] = std::exp(0.5 * h * sym[k]);
      E2[k] = E[k] * E[k];
    }
    const Half k1 = N(v);
    Half a(nh), b(nh), c(nh);
    for (int k = 0; k < nh; ++k) a[k] = E[k] * (v[k] + 0.5 * h * k1[k]);
    const Half k2 = N(a);
    for (int k = 0; k < nh; ++k) b[k] = E[k] * v[k] + 0.5 * h * k2[k];
    const Half k3 = N(b);
    for (int k = 0; k < nh; ++k) c[k] = E2[k] * v[k] + h * E[k] * k3[k];
    const Half k4 = N(c);
    for (int k = 0; k < nh; ++k)
      v[k] = E2[k] * v[k] + h / 6.0 * (E2[k] * k1[k] + 2.0 * E[k] * (k2[k] + k3[k]) + k4[k]);
  };

  AmplitudeTrajectory traj;
  traj.kind = AmplitudeKind::kdv;
  traj.coeffs = coeffs;
  traj.grid = g;
  Half state = masked_spectrum(A0);
  const double dt = default_dt(g, 2.0 * std::abs(nl) * std::max(max_abs(A0.values), 1e-3), opts);
  double T_now = A0.T;
  drive(
      state, A0.T, T_end, dt, sample_T,
      [&](Half& v, double T, double h) {
        step(v, T, h);
        T_now = T + h;
        check_finite(inv(g, v), opts.blowup_ceiling, T_now);
      },
      [&](const Half& v, double T) { traj.snapshots.push_back({T, inv(g, v), {}, {}}); });
  return traj;
}

double burgers_shock_time(const AmplitudeField& A0, const AmplitudeCoefficients& coeffs) {
  const auto ax = amplitude_derivative(A0.grid, A0.values, 1);
  double m = std::numeric_limits<double>::infinity();
  for (double v : ax) m = std::min(m, 2.0 * coeffs.nonlinearity * v);
  return m < 0.0 ? -1.0 / m : std::numeric_limits<double>::infinity();
}

AmplitudeTrajectory burgers_evolve(const AmplitudeField& A0, const AmplitudeCoefficients& coeffs, double T_end,
                                   const std::vector<double>& sample_T, bool with_corrector,
                                   const AmplitudeOptions& opts) {
  require_grid(A0);
  const auto& g = A0.grid;
  const double Ts = burgers_shock_time(A0, coeffs);
  if (T_end - A0.T > 0.5 * Ts * (1.0 + 1e-12))
    throw Error(ErrorKind::ShockTooClose, "Burgers window exceeds half the shock time " + num_text(Ts));
  const double nl = coeffs.nonlinearity;
  const double c = coeffs.speed;
  if (with_corrector && !(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "Burgers corrector needs a positive speed");

  struct State {
    Half A, B;
  };
  auto F = [&](const Half& a) { return scaled(-nl, dX(g, product(g, a, a), 1)); };
  auto rhs = [&](const State& s) {
    State out;
    out.A = F(s.A);
    if (with_corrector) {
      // d_X^{-1} A_TT = -2 nl Pi(A A_T), mean removed
      Half g_term = scaled(-2.0 * nl, product(g, s.A, out.A));
      g_term[0] = 0.0;
      const Half disp = scaled(coeffs.lambda4 / 24.0, dX(g, s.A, 3));
      out.B = scaled(-2.0 * nl, dX(g, product(g, s.A, s.B), 1));
      for (std::size_t k = 0; k < out.B.size(); ++k) out.B[k] -= (g_term[k] + disp[k]) / (2.0 * c);
      mask(g, out.B);
    }
    return out;
  };
  auto shifted = [&](const State& s, double h, const State& k) {
    State out{axpy(s.A, h, k.A), {}};
    if (with_corrector) out.B = axpy(s.B, h, k.B);
    return out;
  };

  AmplitudeTrajectory traj;
  traj.kind = AmplitudeKind::burgers;
  traj.coeffs = coeffs;
  traj.grid = g;
  traj.has_corrector = with_corrector;
  State state{masked_spectrum(A0), Half(g.points / 2 + 1)};
  const double dt = default_dt(g, 2.0 * std::abs(nl) * std::max(max_abs(A0.values), 1e-3), opts);
  drive(
      state, A0.T, T_end, dt, sample_T,
      [&](State& s, double T, double h) {
        const State k1 = rhs(s);
        const State k2 = rhs(shifted(s, 0.5 * h, k1));
        const State k3 = rhs(shifted(s, 0.5 * h, k2));
        const State k4 = rhs(shifted(s, h, k3));
        for (std::size_t k = 0; k < s.A.size(); ++k) {
          s.A[k] += h / 6.0 * (k1.A[k] + 2.0 * k2.A[k] + 2.0 * k3.A[k] + k4.A[k]);
          if (with_corrector) s.B[k] += h / 6.0 * (k1.B[k] + 2.0 * k2.B[k] + 2.0 * k3.B[k] + k4.B[k]);
        }
        check_finite(inv(g, s.A), opts.blowup_ceiling, T + h);
      },
      [&](const State& s, double T) {
        traj.snapshots.push_back({T, inv(g, s.A), {}, with_corrector ? inv(g, s.B) : std::vector<double>{}});
      });
  return traj;
}

double whitham_smallness(const AmplitudeCoefficients& coeffs, const AmplitudeOptions& opts) {
  if (opts.smallness >= 0.0) return opts.smallness;
  const double s2 = 2.0 * coeffs.flux_quadratic;
  if (s2 == 0.0) return std::numeric_limits<double>::infinity();
  return 0.1 * coeffs.flux_linear / std::abs(s2);
}

AmplitudeTrajectory whitham_evolve(const AmplitudeField& A0, const AmplitudeField& V0,
                                   const AmplitudeCoefficients& coeffs, double T_end,
                                   const std::vector<double>& sample_T, const AmplitudeOptions& opts) {
  require_grid(A0);
  if (!(V0.grid == A0.grid)) throw Error(ErrorKind::InvalidArgument, "Whitham A and V grids differ");
  const auto& g = A0.grid;
  const double f1 = coeffs.flux_linear, f2 = coeffs.flux_quadratic;
  const double C1 = whitham_smallness(coeffs, opts);
  if (max_abs(A0.values) > C1 * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidArgument, "Whitham data above the smallness bound " + num_text(C1));

  auto hyperbolic = [&](const std::vector<double>& a, double T) {
    for (double v : a)
      if (!(f1 + 2.0 * f2 * v > 0.0))
        throw Error(ErrorKind::HyperbolicityLoss, "Whitham flux derivative not positive at T = " + num_text(T));
  };
  hyperbolic(A0.values, A0.T);

  struct State {
    Half A, V;
  };
  auto rhs = [&](const State& s) {
    State out;
    out.A = dX(g, s.V, 1);
    Half flux = scaled(f2, product(g, s.A, s.A));
    for (std::size_t k = 0; k < flux.size(); ++k) flux[k] += f1 * s.A[k];
    out.V = dX(g, flux, 1);
    return out;
  };
  auto shifted = [&](const State& s, double h, const State& k) { return State{axpy(s.A, h, k.A), axpy(s.V, h, k.V)}; };

  const double grad0 = std::max(max_abs(amplitude_derivative(g, A0.values, 1)), 1e-12);
  AmplitudeTrajectory traj;
  traj.kind = AmplitudeKind::whitham;
  traj.coeffs = coeffs;
  traj.grid = g;
  State state{masked_spectrum(A0), masked_spectrum(V0)};
  const double speed = std::sqrt(std::abs(f1) + 2.0 * std::abs(f2) * max_abs(A0.values));
  const double dt = default_dt(g, speed, opts);
  drive(
      state, A0.T, T_end, dt, sample_T,
      [&](State& s, double T, double h) {
        const State k1 = rhs(s);
        const State k2 = rhs(shifted(s, 0.5 * h, k1));
        const State k3 = rhs(shifted(s, 0.5 * h, k2));
        const State k4 = rhs(shifted(s, h, k3));
        for (std::size_t k = 0; k < s.A.size(); ++k) {
          s.A[k] += h / 6.0 * (k1.A[k] + 2.0 * k2.A[k] + 2.0 * k3.A[k] + k4.A[k]);
          s.V[k] += h / 6.0 * (k1.V[k] + 2.0 * k2.V[k] + 2.0 * k3.V[k] + k4.V[k]);
        }
        const auto a = inv(g, s.A);
        check_finite(a, opts.blowup_ceiling, T + h);
        hyperbolic(a, T + h);
        if (max_abs(inv(g, dX(g, s.A, 1))) > opts.gradient_growth * grad0)
          throw Error(ErrorKind::ShockTooClose, "Whitham gradient growth guard tripped at T = " + num_text(T + h));
      },
      [&](const State& s, double T) { traj.snapshots.push_back({T, inv(g, s.A), inv(g, s.V), {}}); });
  return traj;
}

AmplitudeJet amplitude_jet(const AmplitudeTrajectory& traj, const AmplitudeSnapshot& snap, int order) {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "jet order must be non-negative");
  const auto& g = traj.grid;
  const auto& cf = traj.coeffs;
  const int nh = g.points / 2 + 1;
  auto cauchy = [&](const std::vector<Half>& a, const std::vector<Half>& b, int k) {
    Half acc(nh);
    for (int i = 0; i <= k; ++i) {
      const Half p = product(g, a[i], b[k - i]);
      for (int j = 0; j < nh; ++j) acc[j] += p[j];
    }
    return acc;
  };

  std::vector<Half> A{fwd(g, snap.A)};
  mask(g, A[0]);
  std::vector<Half> B;
  AmplitudeJet jet;

  switch (traj.kind) {
    case AmplitudeKind::kdv:
    case AmplitudeKind::burgers: {
      const double d = traj.kind == AmplitudeKind::kdv ? cf.dispersion : 0.0;
      const bool corr = traj.kind == AmplitudeKind::burgers && traj.has_corrector;
      const int need = corr ? order + 2 : order;
      for (int k = 0; k < need; ++k) {
        Half next = scaled(-cf.nonlinearity, dX(g, cauchy(A, A, k), 1));
        if (d != 0.0) {
          const Half disp = dX(g, A[k], 3);
          for (int j = 0; j < nh; ++j) next[j] -= d * disp[j];
        }
        A.push_back(scaled(1.0 / (k + 1), next));
      }
      if (corr) {
        B.push_back(fwd(g, snap.B));
        mask(g, B[0]);
        for (int k = 0; k < order; ++k) {
          // d_X^{-1} of the k-th coefficient of A_TT: -nl (k+1) sum_{i+j=k+1} A_i A_j
          Half g_term = scaled(-cf.nonlinearity * (k + 1), cauchy(A, A, k + 1));
          g_term[0] = 0.0;
          const Half disp = scaled(cf.lambda4 / 24.0, dX(g, A[k], 3));
          Half next = scaled(-2.0 * cf.nonlinearity, dX(g, cauchy(A, B, k), 1));
          for (int j = 0; j < nh; ++j) next[j] -= (g_term[j] + disp[j]) / (2.0 * cf.speed);
          mask(g, next);
          B.push_back(scaled(1.0 / (k + 1), next));
        }
      }
      A.resize(order + 1);
      break;
    }
    case AmplitudeKind::whitham: {
      std::vector<Half> V{fwd(g, snap.V)};
      mask(g, V[0]);
      for (int k = 0; k < order; ++k) {
        A.push_back(scaled(1.0 / (k + 1), dX(g, V[k], 1)));
        Half flux = scaled(cf.flux_quadratic, cauchy(A, A, k));
        for (int j = 0; j < nh; ++j) flux[j] += cf.flux_linear * A[k][j];
        V.push_back(scaled(1.0 / (k + 1), dX(g, flux, 1)));
      }
      break;
    }
  }
  for (const auto& h : A) jet.A.push_back(inv(g, h));
  for (const auto& h : B) jet.B.push_back(inv(g, h));
  return jet;
}

}  // namespace pbq

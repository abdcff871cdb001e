#include "pbq/boussinesq_sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace pbq {

namespace {

using Half = std::vector<cplx>;

Half forward(const SpectralGrid& g, std::span<const double> v) {
  Half h(g.size() / 2 + 1);
  forward_half(v, h);
  return h;
}

GridField inverse(const SpectralGrid& g, const Half& h) {
  GridField out(g);
  inverse_half(h, out.values);
  return out;
}

bool is_constant(const CellFunction& f) {
  for (int m = f.first_mode; m <= f.last_mode(); ++m)
    if (m != 0 && std::abs(f.coeff(m)) > 0.0) return false;
  return true;
}

std::vector<double> sample(const CellFunction& f, const SpectralGrid& g) {
  std::vector<double> out(g.size());
  for (int r = 0; r < g.size(); ++r) out[r] = f(g.x(r)).real();
  return out;
}

void multiply_ik(const SpectralGrid& g, Half& h) {
  const int n = g.size();
  for (int k = 0; k <= n / 2; ++k) h[k] *= cplx{0.0, g.wavenumber(k)};
  h[n / 2] = 0.0;
}

}  // namespace

BoussinesqOperator::BoussinesqOperator(const PeriodicCoefficients& coeffs, const SpectralGrid& grid, bool dealias)
    : coeffs_(coeffs),
      grid_(grid),
      dealias_(dealias),
      a_(sample(coeffs.a, grid)),
      b_(sample(coeffs.b, grid)),
      c_(sample(coeffs.c, grid)),
      a_const_(is_constant(coeffs.a)),
      b_const_(is_constant(coeffs.b)),
      c_const_(is_constant(coeffs.c)) {
  if (dealias && 6 * coeffs.cutoff >= grid.points_per_cell)
    throw Error(ErrorKind::InvalidArgument, "coefficient bandwidth must stay below points_per_cell / 6");
}

void BoussinesqOperator::mask(Half& half) const {
  if (!dealias_) return;
  for (int k = 0; k < static_cast<int>(half.size()); ++k)
    if (!grid_.retained(k)) half[k] = 0.0;
}

GridField BoussinesqOperator::linear(const GridField& u) const {
  const int n = grid_.size();
  Half uh = forward(grid_, u.values);
  mask(uh);
  Half out(n / 2 + 1);
  if (a_const_ && b_const_) {
    const double a = a_[0], b = b_[0];
    for (int k = 0; k <= n / 2; ++k) {
      const double kk = grid_.wavenumber(k);
      out[k] = -(a * kk * kk + b * kk * kk * kk * kk) * uh[k];
    }
  } else {
    Half ux = uh, uxx = uh;
    multiply_ik(grid_, ux);
    for (int k = 0; k <= n / 2; ++k) uxx[k] *= -grid_.wavenumber(k) * grid_.wavenumber(k);
    GridField p = inverse(grid_, ux), q = inverse(grid_, uxx);
    for (int r = 0; r < n; ++r) {
      p[r] *= a_[r];
      q[r] *= b_[r];
    }
    Half ph = forward(grid_, p.values), qh = forward(grid_, q.values);
    multiply_ik(grid_, ph);
    for (int k = 0; k <= n / 2; ++k) out[k] = ph[k] + grid_.wavenumber(k) * grid_.wavenumber(k) * qh[k];
  }
  mask(out);
  return inverse(grid_, out);
}

GridField BoussinesqOperator::bilinear(const GridField& u, const GridField& w) const {
  const int n = grid_.size();
  GridField ut = u, wt = w;
  if (dealias_) {
    Half h = forward(grid_, u.values);
    mask(h);
    ut = inverse(grid_, h);
    if (&u == &w) {
      wt = ut;
    } else {
      Half g = forward(grid_, w.values);
      mask(g);
      wt = inverse(grid_, g);
    }
  }
  GridField prod(grid_);
  for (int r = 0; r < n; ++r) prod[r] = ut[r] * wt[r];
  Half ph = forward(grid_, prod.values);
  mask(ph);
  multiply_ik(grid_, ph);
  if (c_const_) {
    for (auto& v : ph) v *= c_[0];
  } else {
    GridField q = inverse(grid_, ph);
    for (int r = 0; r < n; ++r) q[r] *= c_[r];
    ph = forward(grid_, q.values);
    mask(ph);
  }
  multiply_ik(grid_, ph);
  mask(ph);
  return inverse(grid_, ph);
}

GridField BoussinesqOperator::nonlinear(const GridField& u) const { return bilinear(u, u); }

GridField BoussinesqOperator::apply(const GridField& u, bool with_nonlinear) const {
  GridField out = linear(u);
  if (with_nonlinear) {
    const GridField nl = nonlinear(u);
    for (int r = 0; r < grid_.size(); ++r) out[r] += nl[r];
  }
  return out;
}

std::pair<GridField, GridField> rhs(const SimState& state, const BoussinesqOperator& op, bool nonlinear) {
  return {state.v, op.apply(state.u, nonlinear)};
}

std::pair<GridField, GridField> rhs(const SimState& state, const PeriodicCoefficients& coeffs) {
  return rhs(state, BoussinesqOperator(coeffs, state.u.grid));
}

double stability_limit(const PeriodicCoefficients& coeffs, const SpectralGrid& grid) {
  const double k = kPi / grid.spacing();
  const double omega = std::sqrt(coeffs.max_b() * k * k * k * k + coeffs.max_a() * k * k);
  return 2.8 / omega;
}

namespace {

void axpy(GridField& y, double s, const GridField& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

GridField shifted(const GridField& base, double s, const GridField& x) {
  GridField out = base;
  axpy(out, s, x);
  return out;
}

void rk4_step(SimState& st, const BoussinesqOperator& op, double dt, bool nonlinear) {
  auto f = [&](const GridField& u, const GridField& v) { return std::make_pair(v, op.apply(u, nonlinear)); };
  const auto [k1u, k1v] = f(st.u, st.v);
  const auto [k2u, k2v] = f(shifted(st.u, 0.5 * dt, k1u), shifted(st.v, 0.5 * dt, k1v));
  const auto [k3u, k3v] = f(shifted(st.u, 0.5 * dt, k2u), shifted(st.v, 0.5 * dt, k2v));
  const auto [k4u, k4v] = f(shifted(st.u, dt, k3u), shifted(st.v, dt, k3v));
  for (std::size_t i = 0; i < st.u.size(); ++i) {
    st.u[i] += dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
    st.v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
  }
  st.t += dt;
}

void guard(const SimState& st, double ceiling) {
  for (std::size_t i = 0; i < st.u.size(); ++i) {
    if (!(std::abs(st.u[i]) <= ceiling) || !(std::abs(st.v[i]) <= ceiling))
      throw Error(ErrorKind::BlowUp, "solution left the ceiling at t = " + num_text(st.t));
  }
}

}  // namespace

SimState evolve(const SimState& initial, const BoussinesqOperator& op, double t_end, const StepperConfig& config,
                const std::vector<double>& sample_times, const SimObserver& observer) {
  if (!(initial.u.grid == op.grid()) || !(initial.v.grid == op.grid()))
    throw Error(ErrorKind::InvalidArgument, "state and operator grids differ");
  const double dt_max = stability_limit(op.coefficients(), op.grid());
  const double dt = config.dt > 0.0 ? config.dt : config.stability_margin * dt_max;
  if (dt > dt_max * (1.0 + 1e-12)) throw Error(ErrorKind::InvalidArgument, "dt exceeds the stability limit");
  if (!std::is_sorted(sample_times.begin(), sample_times.end()))
    throw Error(ErrorKind::InvalidArgument, "sample times must be ascending");

  std::vector<double> stops;
  for (double s : sample_times) {
    if (s < initial.t - 1e-12 || s > t_end + 1e-12)
      throw Error(ErrorKind::InvalidArgument, "sample time outside the run window");
    stops.push_back(s);
  }
  if (stops.empty() || stops.back() < t_end) stops.push_back(t_end);

  SimState st = initial;
  std::size_t next_sample = 0;
  for (double stop : stops) {
    const double span = stop - st.t;
    if (span > 1e-14) {
      const long steps = static_cast<long>(std::ceil(span / dt - 1e-9));
      const double h = span / static_cast<double>(steps);
      const double t0 = st.t;
      for (long s = 0; s < steps; ++s) {
        rk4_step(st, op, h, config.nonlinear);
        guard(st, config.blowup_ceiling);
      }
      st.t = t0 + span;  // avoid accumulated rounding in t
    }
    while (next_sample < sample_times.size() && sample_times[next_sample] <= stop + 1e-12) {
      if (observer) observer(st);
      ++next_sample;
    }
  }
  return st;
}

namespace {

void write_f64(std::ofstream& os, const std::vector<double>& v) {
  for (double x : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

std::vector<double> read_f64(std::ifstream& is, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) {
    std::uint64_t bits;
    is.read(reinterpret_cast<char*>(&bits), sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    std::memcpy(&x, &bits, sizeof bits);
  }
  if (!is) throw Error(ErrorKind::Io, "checkpoint payload truncated");
  return v;
}

}  // namespace

void write_checkpoint(const std::string& stem, const SimState& state, const std::string& coeff_hash) {
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw Error(ErrorKind::Io, "cannot open " + stem + ".bin for writing");
  write_f64(bin, state.u.values);
  write_f64(bin, state.v.values);
  if (!bin) throw Error(ErrorKind::Io, "write failed for " + stem + ".bin");
  nlohmann::json meta = {{"t", state.t},
                         {"cells", state.u.grid.cells},
                         {"points_per_cell", state.u.grid.points_per_cell},
                         {"coeff_hash", coeff_hash},
                         {"layout", "u then v, little-endian float64"}};
  std::ofstream js(stem + ".json");
  if (!js) throw Error(ErrorKind::Io, "cannot open " + stem + ".json for writing");
  js << meta.dump(2) << "\n";
}

SimState read_checkpoint(const std::string& stem, std::string* coeff_hash) {
  std::ifstream js(stem + ".json");
  if (!js) throw Error(ErrorKind::Io, "cannot open " + stem + ".json");
  const auto meta = nlohmann::json::parse(js);
  const SpectralGrid g(meta.at("cells").get<int>(), meta.at("points_per_cell").get<int>());
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw Error(ErrorKind::Io, "cannot open " + stem + ".bin");
  SimState st;
  st.t = meta.at("t").get<double>();
  st.u = GridField(g, read_f64(bin, g.size()));
  st.v = GridField(g, read_f64(bin, g.size()));
  if (coeff_hash) *coeff_hash = meta.at("coeff_hash").get<std::string>();
  return st;
}

}  // namespace pbq

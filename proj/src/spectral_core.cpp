#include "pbq/spectral_core.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>

namespace pbq {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonZeroMean: return "NonZeroMean";
    case ErrorKind::DegenerateBranch: return "DegenerateBranch";
    case ErrorKind::GapViolation: return "GapViolation";
    case ErrorKind::StencilOutsideGap: return "StencilOutsideGap";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::ShockTooClose: return "ShockTooClose";
    case ErrorKind::HyperbolicityLoss: return "HyperbolicityLoss";
    case ErrorKind::NoContraction: return "NoContraction";
    case ErrorKind::CutoffViolation: return "CutoffViolation";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NonPositiveValue: return "NonPositiveValue";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {

enum class PlanKind { R2C, C2R, Forward, Backward };

// FFTW planning is not thread safe; execution with the new-array interface is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(PlanKind kind, int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(static_cast<int>(kind), n);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    switch (kind) {
      case PlanKind::R2C: {
        std::vector<double> in(n);
        std::vector<cplx> out(n / 2 + 1);
        plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), flags);
        break;
      }
      case PlanKind::C2R: {
        std::vector<cplx> in(n / 2 + 1);
        std::vector<double> out(n);
        plan = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(in.data()), out.data(), flags);
        break;
      }
      case PlanKind::Forward:
      case PlanKind::Backward: {
        std::vector<cplx> in(n), out(n);
        plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                kind == PlanKind::Forward ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        break;
      }
    }
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void require_same_grid(const SpectralGrid& a, const SpectralGrid& b) {
  if (!(a == b)) throw Error(ErrorKind::InvalidArgument, "fields live on different grids");
}

cplx ik_power(double k, int order) {
  cplx factor{1.0, 0.0};
  for (int i = 0; i < order; ++i) factor *= cplx{0.0, k};
  return factor;
}

int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

}  // namespace

SpectralGrid::SpectralGrid(int cells_, int points_per_cell_) : cells(cells_), points_per_cell(points_per_cell_) {
  if (cells < 1) throw Error(ErrorKind::InvalidArgument, "cells must be positive");
  if (points_per_cell < 2 || points_per_cell % 2 != 0)
    throw Error(ErrorKind::InvalidArgument, "points_per_cell must be a positive even integer");
}

GridField::GridField(const SpectralGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != static_cast<std::size_t>(g.size()))
    throw Error(ErrorKind::InvalidArgument, "field length does not match grid");
}

ComplexField::ComplexField(const SpectralGrid& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
  if (values.size() != static_cast<std::size_t>(g.size()))
    throw Error(ErrorKind::InvalidArgument, "field length does not match grid");
}

void forward_half(std::span<const double> in, std::span<cplx> out) {
  const int n = static_cast<int>(in.size());
  fftw_plan plan = PlanCache::instance().get(PlanKind::R2C, n);
  fftw_execute_dft_r2c(plan, const_cast<double*>(in.data()), as_fftw(out.data()));
  const double scale = 1.0 / n;
  for (auto& c : out.first(static_cast<std::size_t>(n / 2 + 1))) c *= scale;
}

void inverse_half(std::span<const cplx> in, std::span<double> out) {
  const int n = static_cast<int>(out.size());
  // c2r overwrites its input
  std::vector<cplx> work(in.begin(), in.begin() + n / 2 + 1);
  fftw_plan plan = PlanCache::instance().get(PlanKind::C2R, n);
  fftw_execute_dft_c2r(plan, as_fftw(work.data()), out.data());
}

std::vector<cplx> spectrum(const GridField& f) {
  const int n = f.grid.size();
  std::vector<cplx> half(n / 2 + 1);
  forward_half(f.values, half);
  std::vector<cplx> full(n);
  for (int k = 0; k <= n / 2; ++k) full[k] = half[k];
  for (int k = n / 2 + 1; k < n; ++k) full[k] = std::conj(half[n - k]);
  return full;
}

std::vector<cplx> spectrum(const ComplexField& f) {
  const int n = f.grid.size();
  std::vector<cplx> in = f.values, out(n);
  fftw_plan plan = PlanCache::instance().get(PlanKind::Forward, n);
  fftw_execute_dft(plan, as_fftw(in.data()), as_fftw(out.data()));
  for (auto& c : out) c /= n;
  return out;
}

GridField real_from_spectrum(const SpectralGrid& grid, std::span<const cplx> coeffs) {
  GridField out(grid);
  inverse_half(coeffs, out.values);
  return out;
}

ComplexField complex_from_spectrum(const SpectralGrid& grid, std::span<const cplx> coeffs) {
  const int n = grid.size();
  std::vector<cplx> in(coeffs.begin(), coeffs.end());
  ComplexField out(grid);
  fftw_plan plan = PlanCache::instance().get(PlanKind::Backward, n);
  fftw_execute_dft(plan, as_fftw(in.data()), as_fftw(out.values.data()));
  return out;
}

GridField spectral_derivative(const GridField& f, int order) {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative derivative order");
  if (order == 0) return f;
  const int n = f.grid.size();
  std::vector<cplx> half(n / 2 + 1);
  forward_half(f.values, half);
  for (int k = 0; k <= n / 2; ++k) half[k] *= ik_power(f.grid.wavenumber(k), order);
  // Nyquist mode has no real odd derivative
  if (order % 2 == 1) half[n / 2] = 0.0;
  GridField out(f.grid);
  inverse_half(half, out.values);
  return out;
}

ComplexField spectral_derivative(const ComplexField& f, int order) {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative derivative order");
  auto c = spectrum(f);
  const int n = f.grid.size();
  for (int idx = 0; idx < n; ++idx) c[idx] *= ik_power(f.grid.wavenumber(f.grid.signed_mode(idx)), order);
  return complex_from_spectrum(f.grid, c);
}

double mean(const GridField& f) {
  return std::accumulate(f.values.begin(), f.values.end(), 0.0) / static_cast<double>(f.size());
}

double l2_norm(const GridField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s * f.grid.spacing());
}

GridField antiderivative(const GridField& f, double tol) {
  const double m = mean(f);
  double rms = 0.0;
  for (double v : f.values) rms += v * v;
  rms = std::sqrt(rms / static_cast<double>(f.size()));
  if (std::abs(m) > tol * rms)
    throw Error(ErrorKind::NonZeroMean, "antiderivative needs a mean-free field (mean " + num_text(m) + ")");
  const int n = f.grid.size();
  std::vector<cplx> half(n / 2 + 1);
  forward_half(f.values, half);
  half[0] = 0.0;
  for (int k = 1; k <= n / 2; ++k) half[k] /= cplx{0.0, f.grid.wavenumber(k)};
  half[n / 2] = 0.0;
  GridField out(f.grid);
  inverse_half(half, out.values);
  return out;
}

double sobolev_norm(const GridField& f, double s) {
  const int n = f.grid.size();
  std::vector<cplx> half(n / 2 + 1);
  forward_half(f.values, half);
  double acc = 0.0;
  for (int k = 0; k <= n / 2; ++k) {
    const double weight = (k == 0 || k == n / 2) ? 1.0 : 2.0;
    const double kk = f.grid.wavenumber(k);
    acc += weight * std::norm(half[k]) * std::pow(1.0 + kk * kk, s);
  }
  return std::sqrt(acc * f.grid.length());
}

GridField dealias(const GridField& f) {
  const int n = f.grid.size();
  std::vector<cplx> half(n / 2 + 1);
  forward_half(f.values, half);
  for (int k = 0; k <= n / 2; ++k)
    if (!f.grid.retained(k)) half[k] = 0.0;
  GridField out(f.grid);
  inverse_half(half, out.values);
  return out;
}

GridField dealiased_product(const GridField& f, const GridField& g) {
  require_same_grid(f.grid, g.grid);
  const GridField ft = dealias(f);
  const GridField gt = dealias(g);
  GridField p(f.grid);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = ft[i] * gt[i];
  return dealias(p);
}

GridField operator+(const GridField& a, const GridField& b) {
  require_same_grid(a.grid, b.grid);
  GridField out(a.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

GridField operator-(const GridField& a, const GridField& b) {
  require_same_grid(a.grid, b.grid);
  GridField out(a.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

GridField operator*(double s, const GridField& a) {
  GridField out(a.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * a[i];
  return out;
}

double max_abs(const GridField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

// ---- Bloch transform ----

int bloch_index(const SpectralGrid& grid, int row) { return row - (grid.cells - 1) / 2; }

double bloch_number(const SpectralGrid& grid, int row) {
  return static_cast<double>(bloch_index(grid, row)) / grid.cells;
}

int bloch_row(const SpectralGrid& grid, int j) { return j + (grid.cells - 1) / 2; }

int first_cell_mode(const SpectralGrid& grid, int row) {
  const int j = bloch_index(grid, row);
  return ceil_div(-grid.size() / 2 - j, grid.cells);
}

namespace {

BlochField bloch_from_coefficients(const SpectralGrid& grid, const std::vector<cplx>& c) {
  BlochField b(grid);
  const int nc = grid.cells;
  for (int r = 0; r < b.rows(); ++r) {
    const int j = bloch_index(grid, r);
    const int m0 = first_cell_mode(grid, r);
    for (int p = 0; p < b.cols(); ++p) {
      const int n = j + (m0 + p) * nc;
      b.at(r, p) = static_cast<double>(nc) * c[grid.slot(n)];
    }
  }
  return b;
}

}  // namespace

BlochField bloch_forward(const GridField& f) { return bloch_from_coefficients(f.grid, spectrum(f)); }

BlochField bloch_forward(const ComplexField& f) { return bloch_from_coefficients(f.grid, spectrum(f)); }

ComplexField bloch_inverse(const BlochField& b) {
  const SpectralGrid& grid = b.grid;
  const int nc = grid.cells;
  std::vector<cplx> c(grid.size());
  for (int r = 0; r < b.rows(); ++r) {
    const int j = bloch_index(grid, r);
    const int m0 = first_cell_mode(grid, r);
    for (int p = 0; p < b.cols(); ++p) c[grid.slot(j + (m0 + p) * nc)] = b.at(r, p) / static_cast<double>(nc);
  }
  return complex_from_spectrum(grid, c);
}

GridField real_part(const ComplexField& f, double tol) {
  double peak = 0.0, imag = 0.0;
  for (const auto& v : f.values) {
    peak = std::max(peak, std::abs(v));
    imag = std::max(imag, std::abs(v.imag()));
  }
  if (imag > tol * std::max(peak, 1e-300) && imag > 1e-300)
    throw Error(ErrorKind::InvalidArgument, "field is not real: imaginary part " + std::to_string(imag));
  GridField out(f.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.values[i].real();
  return out;
}

std::vector<cplx> cell_samples(const BlochField& b, int row) {
  const int p = b.cols();
  const int m0 = first_cell_mode(b.grid, row);
  std::vector<cplx> out(p);
  const double h = b.grid.spacing();
  for (int q = 0; q < p; ++q) {
    cplx acc{0.0, 0.0};
    for (int c = 0; c < p; ++c) acc += b.at(row, c) * std::polar(1.0, (m0 + c) * q * h);
    out[q] = acc;
  }
  return out;
}

BlochField bloch_convolve(const BlochField& b1, const BlochField& b2) {
  require_same_grid(b1.grid, b2.grid);
  const SpectralGrid& grid = b1.grid;
  const int nc = grid.cells;
  const int p = grid.points_per_cell;
  BlochField out(grid);

  auto masked = [&](const BlochField& b) {
    BlochField m = b;
    for (int r = 0; r < m.rows(); ++r) {
      const int j = bloch_index(grid, r);
      const int m0 = first_cell_mode(grid, r);
      for (int c = 0; c < p; ++c)
        if (!grid.retained(j + (m0 + c) * nc)) m.at(r, c) = 0.0;
    }
    return m;
  };
  const BlochField u = masked(b1);
  const BlochField v = masked(b2);

  for (int r = 0; r < nc; ++r) {
    const int j = bloch_index(grid, r);
    const int m_out = first_cell_mode(grid, r);
    for (int r1 = 0; r1 < nc; ++r1) {
      const int j1 = bloch_index(grid, r1);
      const int m1_0 = first_cell_mode(grid, r1);
      // l_j - l_j1 = l_j2 + s, continued by v(l + s, x) = v(l, x) exp(-i s x)
      int j2 = j - j1;
      int s = 0;
      while (2 * j2 > nc) { j2 -= nc; ++s; }
      while (2 * j2 <= -nc) { j2 += nc; --s; }
      const int r2 = bloch_row(grid, j2);
      const int m2_0 = first_cell_mode(grid, r2) - s;
      for (int c1 = 0; c1 < p; ++c1) {
        const cplx a = u.at(r1, c1);
        if (a == cplx{}) continue;
        const int m1 = m1_0 + c1;
        for (int c2 = 0; c2 < p; ++c2) {
          const cplx bval = v.at(r2, c2);
          if (bval == cplx{}) continue;
          const int m = m1 + m2_0 + c2;
          const int col = m - m_out;
          if (col < 0 || col >= p) continue;
          if (!grid.retained(j + m * nc)) continue;
          out.at(r, col) += a * bval / static_cast<double>(nc);
        }
      }
    }
  }
  return out;
}

BlochField bloch_multiply(const BlochField& b, std::span<const cplx> chi) {
  const int big_r = static_cast<int>(chi.size()) / 2;
  BlochField out(b.grid);
  const int p = b.cols();
  for (int r = 0; r < b.rows(); ++r) {
    for (int c = 0; c < p; ++c) {
      const cplx val = b.at(r, c);
      if (val == cplx{}) continue;
      for (int s = -big_r; s <= big_r; ++s) {
        const int col = c + s;
        if (col < 0 || col >= p) continue;
        out.at(r, col) += chi[s + big_r] * val;
      }
    }
  }
  return out;
}

double BlochSelftest::worst() const { return std::max({round_trip, isometry, multiply, convolve}); }

BlochSelftest bloch_selftest(int draws, unsigned seed) {
  if (draws < 1) throw Error(ErrorKind::InvalidArgument, "need at least one draw");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> cells_d(2, 9), half_p(6, 10);
  auto diff = [](const BlochField& a, const BlochField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
  };
  BlochSelftest out;
  out.draws = draws;
  for (int d = 0; d < draws; ++d) {
    const SpectralGrid g(cells_d(rng), 2 * half_p(rng));
    GridField noise(g), f(g), q(g), chi_x(g), chif(g);
    for (auto& v : noise.values) v = n01(rng);
    for (auto& v : f.values) v = n01(rng);
    for (auto& v : q.values) v = n01(rng);
    f = dealias(f);
    q = dealias(q);
    // real 2*pi-periodic multiplier with cell modes -2..2
    std::vector<cplx> chi(5);
    chi[2] = n01(rng);
    for (int s = 1; s <= 2; ++s) chi[2 + s] = std::conj(chi[2 - s] = cplx(n01(rng), n01(rng)) * 0.3);
    for (int r = 0; r < g.size(); ++r) {
      cplx v{};
      for (int s = -2; s <= 2; ++s) v += chi[s + 2] * std::polar(1.0, s * g.x(r));
      chi_x[r] = v.real();
      chif[r] = chi_x[r] * f[r];
    }
    const auto b = bloch_forward(noise);
    const auto back = bloch_inverse(b);
    for (int r = 0; r < g.size(); ++r) out.round_trip = std::max(out.round_trip, std::abs(back.values[r] - noise[r]));
    double bn = 0.0;
    for (const auto& v : b.values) bn += std::norm(v);
    bn *= 2.0 * kPi / g.cells;
    const double n2 = l2_norm(noise) * l2_norm(noise);
    out.isometry = std::max(out.isometry, std::abs(bn - n2) / n2);
    out.multiply = std::max(out.multiply, diff(bloch_multiply(bloch_forward(f), chi), bloch_forward(chif)));
    out.convolve = std::max(out.convolve, diff(bloch_convolve(bloch_forward(f), bloch_forward(q)),
                                               bloch_forward(dealiased_product(f, q))));
  }
  return out;
}

}  // namespace pbq

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>

#include "pbq/bloch_spectrum.hpp"

namespace pbq {

cplx CellFunction::operator()(double x) const {
  cplx acc{};
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    acc += coeffs[i] * std::polar(1.0, (first_mode + static_cast<int>(i)) * x);
  return acc;
}

cplx CellFunction::inner(const CellFunction& other) const {
  cplx acc{};
  const int lo = std::max(first_mode, other.first_mode);
  const int hi = std::min(last_mode(), other.last_mode());
  for (int m = lo; m <= hi; ++m) acc += std::conj(coeff(m)) * other.coeff(m);
  return acc;
}

double CellFunction::norm() const { return std::sqrt(std::abs(inner(*this))); }

std::vector<cplx> CellFunction::samples(int n) const {
  std::vector<cplx> out(n);
  for (int q = 0; q < n; ++q) out[q] = (*this)(2.0 * kPi * q / n);
  return out;
}

CellFunction CellFunction::derivative(double bloch) const {
  CellFunction out = *this;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    out.coeffs[i] *= cplx{0.0, first_mode + static_cast<double>(i) + bloch};
  return out;
}

CellFunction product(const CellFunction& f, const CellFunction& g) {
  CellFunction out = CellFunction::zeros(f.first_mode + g.first_mode, f.last_mode() + g.last_mode());
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
    if (f.coeffs[i] == cplx{}) continue;
    for (std::size_t k = 0; k < g.coeffs.size(); ++k) out.coeffs[i + k] += f.coeffs[i] * g.coeffs[k];
  }
  return out;
}

CellFunction operator+(const CellFunction& f, const CellFunction& g) {
  CellFunction out = CellFunction::zeros(std::min(f.first_mode, g.first_mode), std::max(f.last_mode(), g.last_mode()));
  for (int m = out.first_mode; m <= out.last_mode(); ++m) out.coeffs[m - out.first_mode] = f.coeff(m) + g.coeff(m);
  return out;
}

CellFunction operator-(const CellFunction& f, const CellFunction& g) { return f + cplx{-1.0, 0.0} * g; }

CellFunction operator*(cplx s, const CellFunction& f) {
  CellFunction out = f;
  for (auto& c : out.coeffs) c *= s;
  return out;
}

namespace {

CellFunction from_cosines(const std::vector<double>& cosines, int cutoff) {
  CellFunction f = CellFunction::zeros(-cutoff, cutoff);
  for (std::size_t k = 0; k < cosines.size(); ++k) {
    const int m = static_cast<int>(k);
    if (m == 0) {
      f.coeffs[cutoff] += cosines[0];
    } else {
      f.coeffs[cutoff + m] += 0.5 * cosines[k];
      f.coeffs[cutoff - m] += 0.5 * cosines[k];
    }
  }
  return f;
}

CellFunction widen(const CellFunction& f, int cutoff) {
  CellFunction out = CellFunction::zeros(-cutoff, cutoff);
  for (int m = -cutoff; m <= cutoff; ++m) out.coeffs[m + cutoff] = f.coeff(m);
  return out;
}

double grid_min(const CellFunction& f) {
  double m = 1e300;
  for (const auto& v : f.samples(512)) m = std::min(m, v.real());
  return m;
}

double grid_max(const CellFunction& f) {
  double m = -1e300;
  for (const auto& v : f.samples(512)) m = std::max(m, v.real());
  return m;
}

}  // namespace

PeriodicCoefficients PeriodicCoefficients::from_fourier(CellFunction a, CellFunction b, CellFunction c) {
  int cutoff = 0;
  for (const auto* f : {&a, &b, &c})
    for (int m = f->first_mode; m <= f->last_mode(); ++m)
      if (std::abs(f->coeff(m)) > 0.0) cutoff = std::max(cutoff, std::abs(m));
  PeriodicCoefficients pc;
  pc.cutoff = cutoff;
  pc.a = widen(a, cutoff);
  pc.b = widen(b, cutoff);
  pc.c = widen(c, cutoff);
  for (const auto* f : {&pc.a, &pc.b, &pc.c}) {
    for (int m = 0; m <= cutoff; ++m) {
      if (std::abs(f->coeff(m) - std::conj(f->coeff(-m))) > 1e-12)
        throw Error(ErrorKind::InvalidArgument, "media coefficients must be real valued");
    }
  }
  pc.even_symmetric = true;
  for (const auto* f : {&pc.a, &pc.b, &pc.c})
    for (int m = 1; m <= cutoff; ++m)
      if (std::abs(f->coeff(m) - f->coeff(-m)) > 1e-12) pc.even_symmetric = false;
  pc.min_a = grid_min(pc.a);
  pc.min_b = grid_min(pc.b);
  if (pc.min_a <= 0.0 || pc.min_b <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "a and b must be bounded away from zero");
  return pc;
}

PeriodicCoefficients PeriodicCoefficients::from_cosine_series(const std::vector<double>& a_cos,
                                                              const std::vector<double>& b_cos,
                                                              const std::vector<double>& c_cos) {
  const int cutoff = static_cast<int>(std::max({a_cos.size(), b_cos.size(), c_cos.size(), std::size_t{1}})) - 1;
  return from_fourier(from_cosines(a_cos, cutoff), from_cosines(b_cos, cutoff), from_cosines(c_cos, cutoff));
}

bool PeriodicCoefficients::homogeneous() const {
  for (const auto* f : {&a, &b, &c})
    for (int m = f->first_mode; m <= f->last_mode(); ++m)
      if (m != 0 && std::abs(f->coeff(m)) > 0.0) return false;
  return true;
}

double PeriodicCoefficients::max_a() const { return grid_max(a); }
double PeriodicCoefficients::max_b() const { return grid_max(b); }

std::string PeriodicCoefficients::hash() const {
  // FNV-1a over the printed coefficients
  std::string text;
  char buf[64];
  for (const auto* f : {&a, &b, &c}) {
    for (int m = -cutoff; m <= cutoff; ++m) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g;", f->coeff(m).real(), f->coeff(m).imag());
      text += buf;
    }
    text += '|';
  }
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PeriodicCoefficients coefficient_preset(std::string_view name) {
  if (name == "homogeneous") return PeriodicCoefficients::from_cosine_series({1.0}, {1.0}, {1.0});
  if (name == "periodic") return PeriodicCoefficients::from_cosine_series({1.0, 0.5}, {1.0}, {1.0});
  if (name == "periodic-full") return PeriodicCoefficients::from_cosine_series({1.0, 0.5}, {1.0, 0.25}, {1.0, 0.3});
  throw Error(ErrorKind::Config, "unknown coefficient preset '" + std::string(name) + "'");
}

}  // namespace pbq

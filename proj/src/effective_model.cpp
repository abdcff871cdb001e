#include "pbq/effective_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace pbq {

namespace {

CellFunction constant(double v) { return CellFunction(0, {cplx{v, 0.0}}); }

// Eigen-expansion operator L_1 (coefficient of il in L_l).
CellFunction apply_L1(const PeriodicCoefficients& pc, const CellFunction& g) {
  const auto dg = g.derivative();
  const auto ag = product(pc.a, g).derivative();
  const auto bdg = product(pc.b, dg).derivative().derivative();
  const auto bddg = product(pc.b, dg.derivative()).derivative();
  return cplx{2.0, 0.0} * (bdg + bddg) - ag - product(pc.a, dg);
}

double lookup(const BlochBand& band, double l) {
  double acc = 0.0;
  int found = 0;
  for (std::size_t i = 0; i < band.bloch.size(); ++i) {
    if (std::abs(std::abs(band.bloch[i]) - std::abs(l)) < 1e-12) {
      acc += band.values[i][0];
      ++found;
    }
  }
  if (found == 0) throw Error(ErrorKind::InvalidArgument, "dispersion stencil sample missing at l = " + num_text(l));
  return acc / found;  // averages +-l, exploiting evenness
}

constexpr int kStencilPoints = 4;

// Even Taylor fit through lambda(k s), k = 1..4, with lambda(0) = 0.
Eigen::Vector4d even_fit(const BlochBand& band, double s) {
  Eigen::Matrix4d m;
  Eigen::Vector4d f;
  for (int k = 1; k <= kStencilPoints; ++k) {
    const double x2 = (k * s) * (k * s);
    double p = x2;
    for (int col = 0; col < kStencilPoints; ++col, p *= x2) m(k - 1, col) = p;
    f(k - 1) = lookup(band, k * s);
  }
  return m.partialPivLu().solve(f);
}

}  // namespace

CellFunction compute_g1(const PeriodicCoefficients& coeffs, int cutoff) {
  return cell_solve_L0(coeffs, coeffs.a.derivative(), cutoff);
}

CellFunction compute_g2(const PeriodicCoefficients& coeffs, const CellFunction& g1, int cutoff) {
  // order (il)^2 of L_l w = lambda w: L_0 g2 = -c^2 - L_1 g1 - L_2 1, L_2 1 = b'' - a
  auto rhs = cplx{-1.0, 0.0} * apply_L1(coeffs, g1) + coeffs.a - coeffs.b.derivative().derivative();
  const cplx c2 = rhs.mean();
  rhs = rhs - constant(c2.real());
  return cell_solve_L0(coeffs, rhs, cutoff);
}

double compute_nu2(const PeriodicCoefficients& coeffs, const CellFunction& g1) {
  const auto s = constant(1.0) + g1.derivative();
  return -product(coeffs.c, product(s, s)).mean().real();
}

std::vector<double> derivative_stencil(double h) {
  std::vector<double> out;
  for (double s : {h, 0.5 * h})
    for (int k = 1; k <= kStencilPoints; ++k) {
      out.push_back(-k * s);
      out.push_back(k * s);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }),
            out.end());
  return out;
}

DispersionDerivatives compute_dispersion_derivatives(const BlochBand& band, double h) {
  if (kStencilPoints * h > band.gap_margin)
    throw Error(ErrorKind::StencilOutsideGap, "finite-difference stencil 4h exceeds the gap margin");
  const auto coarse = even_fit(band, h);
  const auto fine = even_fit(band, 0.5 * h);
  DispersionDerivatives d;
  d.step = h;
  d.lambda2 = 2.0 * fine(0);
  d.lambda4 = 24.0 * fine(1);
  d.lambda2_error = std::abs(2.0 * (fine(0) - coarse(0)));
  d.lambda4_error = std::abs(24.0 * (fine(1) - coarse(1)));
  return d;
}

CellFunction unit_mean_mode(const PeriodicCoefficients& coeffs, double l, int cutoff) {
  if (cutoff < 0) cutoff = default_cell_cutoff(coeffs);
  const auto pairs = band_eigenpairs(assemble_bloch_matrix(coeffs, l, cutoff), 1);
  const cplx m = pairs[0].vector.mean();
  if (std::abs(m) < 1e-8) throw Error(ErrorKind::DegenerateBranch, "first band has vanishing cell mean");
  return (1.0 / m) * pairs[0].vector;
}

namespace {

CellFunction nonlinear_cell(const PeriodicCoefficients& coeffs, double l, const CellFunction& u, const CellFunction& v) {
  return product(coeffs.c, product(u, v).derivative(l)).derivative(l);
}

}  // namespace

cplx kernel_s11_1(const PeriodicCoefficients& coeffs, double l, double m, int cutoff) {
  const auto wl = unit_mean_mode(coeffs, l, cutoff);
  const auto f = nonlinear_cell(coeffs, l, unit_mean_mode(coeffs, l - m, cutoff), unit_mean_mode(coeffs, m, cutoff));
  return wl.inner(f);
}

CellFunction kernel_s11_v(const PeriodicCoefficients& coeffs, double l, double m, int cutoff) {
  const auto wl = unit_mean_mode(coeffs, l, cutoff);
  const auto f = nonlinear_cell(coeffs, l, unit_mean_mode(coeffs, l - m, cutoff), unit_mean_mode(coeffs, m, cutoff));
  return f - (wl.inner(f) / wl.inner(wl)) * wl;
}

cplx kernel_svv_1(const PeriodicCoefficients& coeffs, double l, const CellFunction& v1, const CellFunction& v2,
                  int cutoff) {
  return unit_mean_mode(coeffs, l, cutoff).inner(nonlinear_cell(coeffs, l, v1, v2));
}

EffectiveModel build_effective_model(const PeriodicCoefficients& coeffs, const ModelOptions& opts) {
  const int cutoff = opts.cell_cutoff < 0 ? default_cell_cutoff(coeffs) : opts.cell_cutoff;
  std::vector<double> ls;
  for (int i = 0; i < opts.gap_samples; ++i) ls.push_back(-0.5 + (i + 1.0) / opts.gap_samples);
  for (double l : derivative_stencil(opts.fd_step)) ls.push_back(l);
  const auto band = dispersion_curve(coeffs, 1, ls, cutoff, opts.gap_tol);
  const auto d = compute_dispersion_derivatives(band, opts.fd_step);

  EffectiveModel m;
  m.lambda2 = d.lambda2;
  m.lambda4 = d.lambda4;
  m.lambda2_error = d.lambda2_error;
  m.lambda4_error = d.lambda4_error;
  m.wave_speed = std::sqrt(0.5 * d.lambda2);
  m.g1 = compute_g1(coeffs, cutoff);
  m.nu2 = compute_nu2(coeffs, m.g1);
  m.whitham_s2 = -2.0 * m.nu2;
  m.gap = band.gap_margin;
  m.cell_cutoff = cutoff;
  m.fd_step = opts.fd_step;
  m.coeff_hash = coeffs.hash();
  return m;
}

nlohmann::json EffectiveModel::to_json() const {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (const auto& v : g1.coeffs) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  return {{"wave_speed", wave_speed},       {"lambda2", lambda2},
          {"lambda4", lambda4},             {"lambda2_error", lambda2_error},
          {"lambda4_error", lambda4_error}, {"nu2", nu2},
          {"whitham_s2", whitham_s2},       {"gap", gap},
          {"cell_cutoff", cell_cutoff},     {"fd_step", fd_step},
          {"coeff_hash", coeff_hash},       {"g1", {{"first_mode", g1.first_mode}, {"re", re}, {"im", im}}}};
}

EffectiveModel EffectiveModel::from_json(const nlohmann::json& j) {
  EffectiveModel m;
  m.wave_speed = j.at("wave_speed");
  m.lambda2 = j.at("lambda2");
  m.lambda4 = j.at("lambda4");
  m.lambda2_error = j.at("lambda2_error");
  m.lambda4_error = j.at("lambda4_error");
  m.nu2 = j.at("nu2");
  m.whitham_s2 = j.at("whitham_s2");
  m.gap = j.at("gap");
  m.cell_cutoff = j.at("cell_cutoff");
  m.fd_step = j.at("fd_step");
  m.coeff_hash = j.at("coeff_hash");
  const auto& g = j.at("g1");
  const auto& re = g.at("re");
  const auto& im = g.at("im");
  if (re.size() != im.size()) throw Error(ErrorKind::Config, "g1 coefficient arrays differ in length");
  std::vector<cplx> c(re.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = {re[i].get<double>(), im[i].get<double>()};
  m.g1 = CellFunction(g.at("first_mode").get<int>(), std::move(c));
  return m;
}

const char* to_string(AmplitudeKind kind) {
  switch (kind) {
    case AmplitudeKind::kdv: return "kdv";
    case AmplitudeKind::burgers: return "burgers";
    case AmplitudeKind::whitham: return "whitham";
  }
  return "?";
}

AmplitudeKind parse_amplitude_kind(const std::string& s) {
  if (s == "kdv") return AmplitudeKind::kdv;
  if (s == "burgers") return AmplitudeKind::burgers;
  if (s == "whitham") return AmplitudeKind::whitham;
  throw Error(ErrorKind::Config, "unknown amplitude kind '" + s + "'");
}

AmplitudeCoefficients assemble_amplitude_coefficients(const EffectiveModel& model, AmplitudeKind kind) {
  AmplitudeCoefficients a;
  a.kind = kind;
  a.lambda4 = model.lambda4;
  a.nu2 = model.nu2;
  a.flux_linear = 0.5 * model.lambda2;
  a.flux_quadratic = 0.5 * model.whitham_s2;
  if (kind != AmplitudeKind::whitham) {
    a.speed = model.wave_speed;
    a.nonlinearity = model.nu2 / (2.0 * model.wave_speed);
    if (kind == AmplitudeKind::kdv) a.dispersion = model.lambda4 / (48.0 * model.wave_speed);
  }
  return a;
}

}  // namespace pbq

#include "pbq/residual_meter.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace pbq {

GridField residual_field(const BoussinesqOperator& op, const GridField& u, const GridField& u_tt) {
  return op.apply(u) - u_tt;
}

GridField residual_field(const Approximant& approx, double t) {
  const auto j = approx.jet(t, 2);
  GridField res = residual_field(approx.op(), j[0], 2.0 * j[2]);
  const double m = mean(res);
  const double rms = l2_norm(res) / std::sqrt(res.grid.length());
  if (std::abs(m) > 1e-10 * rms)
    throw Error(ErrorKind::NonZeroMean, "residual mean " + num_text(m) + " is not negligible");
  return res;
}

ResidualNorms residual_norms(const GridField& res) {
  ResidualNorms n;
  n.l2 = sobolev_norm(res, 0.0);
  n.h1 = sobolev_norm(res, 1.0);
  const GridField inv = antiderivative(res);
  n.inv_l2 = sobolev_norm(inv, 0.0);
  n.inv_h1 = sobolev_norm(inv, 1.0);
  return n;
}

ResidualNorms ResidualTrace::sup() const {
  ResidualNorms s;
  for (const auto& n : norms) {
    s.l2 = std::max(s.l2, n.l2);
    s.h1 = std::max(s.h1, n.h1);
    s.inv_l2 = std::max(s.inv_l2, n.inv_l2);
    s.inv_h1 = std::max(s.inv_h1, n.inv_h1);
  }
  return s;
}

std::string ResidualTrace::to_csv(bool header) const {
  std::ostringstream os;
  os << std::setprecision(17);
  if (header) os << "eps,t,res_l2,res_h1,inv_l2,inv_h1\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    os << eps << ',' << t[i] << ',' << norms[i].l2 << ',' << norms[i].h1 << ',' << norms[i].inv_l2 << ','
       << norms[i].inv_h1 << '\n';
  return os.str();
}

ResidualTrace residual_trace(const Approximant& approx, const std::vector<double>& times) {
  if (times.empty()) throw Error(ErrorKind::InvalidArgument, "residual trace needs at least one sample");
  ResidualTrace tr;
  tr.eps = approx.eps();
  tr.kind = approx.kind();
  tr.level = approx.level();
  for (double t : times) {
    tr.t.push_back(t);
    tr.norms.push_back(residual_norms(residual_field(approx, t)));
  }
  return tr;
}

ScalingFit fit_power_law(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size()) throw Error(ErrorKind::InvalidArgument, "fit inputs differ in length");
  if (eps.size() < 2) throw Error(ErrorKind::InvalidArgument, "fit needs at least two pairs");
  const std::size_t n = eps.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0) || !(values[i] > 0.0))
      throw Error(ErrorKind::NonPositiveValue, "power-law fit needs positive eps and values");
    x[i] = std::log(eps[i]);
    y[i] = std::log(values[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::InvalidArgument, "fit needs distinct eps values");
  ScalingFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  if (n > 2) {
    // two-sided 95% Student t quantiles for n - 2 degrees of freedom
    static const double tq[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
    const std::size_t dof = n - 2;
    const double q = dof <= 10 ? tq[dof - 1] : 1.96;
    f.half_width = q * std::sqrt(ss / dof / sxx);
  }
  return f;
}

const char* to_string(ResidualNorm n) {
  switch (n) {
    case ResidualNorm::l2: return "res_l2";
    case ResidualNorm::h1: return "res_h1";
    case ResidualNorm::inv_l2: return "inv_l2";
    case ResidualNorm::inv_h1: return "inv_h1";
  }
  return "?";
}

double select(const ResidualNorms& n, ResidualNorm which) {
  switch (which) {
    case ResidualNorm::l2: return n.l2;
    case ResidualNorm::h1: return n.h1;
    case ResidualNorm::inv_l2: return n.inv_l2;
    case ResidualNorm::inv_h1: return n.inv_h1;
  }
  return 0.0;
}

ScalingFit scaling_fit(const std::vector<ResidualTrace>& traces, ResidualNorm which) {
  if (traces.size() < 4) throw Error(ErrorKind::InvalidArgument, "scaling fit needs at least four eps values");
  std::vector<double> e, v;
  for (const auto& tr : traces) {
    e.push_back(tr.eps);
    v.push_back(select(tr.sup(), which));
  }
  return fit_power_law(e, v);
}

}  // namespace pbq

#pragma once

// Residual of the full equation on time-parametrized fields and log-log
// scaling fits of its norms over eps.

#include <string>
#include <vector>

#include "pbq/approximant.hpp"

namespace pbq {

// -u_tt + (a u_x)_x - (b u_xx)_xx + (c (u^2)_x)_x on the operator's grid.
GridField residual_field(const BoussinesqOperator& op, const GridField& u, const GridField& u_tt);
// Same for an approximant, with u_tt from its exact time jet. NonZeroMean when
// the residual is not mean-free to 1e-10 relative to its rms.
GridField residual_field(const Approximant& approx, double t);

struct ResidualNorms {
  double l2 = 0.0, h1 = 0.0;
  double inv_l2 = 0.0, inv_h1 = 0.0;  // of d_x^{-1} Res
};
ResidualNorms residual_norms(const GridField& res);

struct ResidualTrace {
  double eps = 0.0;
  AmplitudeKind kind = AmplitudeKind::kdv;
  Level level = Level::leading;
  std::vector<double> t;
  std::vector<ResidualNorms> norms;

  // Maximum over samples of each norm.
  ResidualNorms sup() const;
  // Columns: eps,t,res_l2,res_h1,inv_l2,inv_h1
  std::string to_csv(bool header = true) const;
};

// Residual norms at the given physical times (at least one sample).
ResidualTrace residual_trace(const Approximant& approx, const std::vector<double>& times);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;   // log C
  double half_width = 0.0;  // 95% confidence half-width of the slope (0 for two points)
  double rms_residual = 0.0;
};

// Least squares of log(value) against log(eps); NonPositiveValue for a
// non-positive entry, InvalidArgument for fewer than two pairs.
ScalingFit fit_power_law(const std::vector<double>& eps, const std::vector<double>& values);

enum class ResidualNorm { l2, h1, inv_l2, inv_h1 };
const char* to_string(ResidualNorm n);
double select(const ResidualNorms& n, ResidualNorm which);
// Fit of the sup-in-time norm across traces (InvalidArgument below four traces).
ScalingFit scaling_fit(const std::vector<ResidualTrace>& traces, ResidualNorm which);

}  // namespace pbq

#pragma once

// Bloch operator L_l = -(d+il)(a (d+il)) + (d+il)^2 (b (d+il)^2) on one 2*pi
// cell, discretized by Fourier-Galerkin truncation.

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

#include "pbq/spectral_core.hpp"

namespace pbq {

// Cell Fourier coefficients, modes first_mode .. first_mode + size - 1.
struct CellFunction {
  int first_mode = 0;
  std::vector<cplx> coeffs;

  CellFunction() = default;
  CellFunction(int first, std::vector<cplx> c) : first_mode(first), coeffs(std::move(c)) {}
  static CellFunction zeros(int lo, int hi) { return CellFunction(lo, std::vector<cplx>(hi - lo + 1)); }

  int last_mode() const { return first_mode + static_cast<int>(coeffs.size()) - 1; }
  cplx coeff(int m) const {
    const int i = m - first_mode;
    return (i >= 0 && i < static_cast<int>(coeffs.size())) ? coeffs[i] : cplx{};
  }
  cplx mean() const { return coeff(0); }
  cplx operator()(double x) const;
  // (1/2pi) int conj(this) other dx
  cplx inner(const CellFunction& other) const;
  double norm() const;
  // Values on the uniform cell grid of n points.
  std::vector<cplx> samples(int n) const;
  CellFunction derivative(double bloch = 0.0) const;
};

CellFunction product(const CellFunction& f, const CellFunction& g);
CellFunction operator+(const CellFunction& f, const CellFunction& g);
CellFunction operator-(const CellFunction& f, const CellFunction& g);
CellFunction operator*(cplx s, const CellFunction& f);

// The media a, b, c as cell Fourier series truncated at `cutoff`.
struct PeriodicCoefficients {
  int cutoff = 0;
  CellFunction a, b, c;
  bool even_symmetric = true;
  double min_a = 0.0;
  double min_b = 0.0;

  // a(x) = sum_k a_cos[k] cos(k x) etc., index 0 is the mean.
  static PeriodicCoefficients from_cosine_series(const std::vector<double>& a_cos,
                                                 const std::vector<double>& b_cos,
                                                 const std::vector<double>& c_cos);
  static PeriodicCoefficients from_fourier(CellFunction a, CellFunction b, CellFunction c);

  bool homogeneous() const;
  double a_at(double x) const { return a(x).real(); }
  double b_at(double x) const { return b(x).real(); }
  double c_at(double x) const { return c(x).real(); }
  double max_a() const;
  double max_b() const;
  // Stable digest of the coefficients, used for cache keys and checkpoints.
  std::string hash() const;
};

// "homogeneous": a = b = c = 1.  "periodic": a = 1 + cos(x)/2, b = c = 1.
// "periodic-full": a = 1 + cos(x)/2, b = 1 + cos(x)/4, c = 1 + 3 cos(x)/10.
PeriodicCoefficients coefficient_preset(std::string_view name);

struct BlochOperatorMatrix {
  double bloch = 0.0;
  int first_mode = 0;
  Eigen::MatrixXcd matrix;

  int last_mode() const { return first_mode + static_cast<int>(matrix.rows()) - 1; }
};

int default_cell_cutoff(const PeriodicCoefficients& coeffs);

BlochOperatorMatrix assemble_bloch_matrix(const PeriodicCoefficients& coeffs, double l, int cutoff);
BlochOperatorMatrix assemble_bloch_matrix(const PeriodicCoefficients& coeffs, double l, int first_mode,
                                          int last_mode);

struct Eigenpair {
  double value = 0.0;
  CellFunction vector;  // orthonormal; band 1 has real positive cell mean
};

// Lowest n_max eigenpairs in ascending order. With enforce_gap a first gap
// below 1e-8 raises DegenerateBranch.
std::vector<Eigenpair> band_eigenpairs(const BlochOperatorMatrix& m, int n_max, bool enforce_gap = false);

struct BlochBand {
  int bands = 1;
  std::vector<double> bloch;                 // samples l_i
  std::vector<std::vector<double>> values;   // values[i][n] = lambda_{n+1}(l_i)
  std::vector<CellFunction> first;           // w_1(l_i), orthonormal and phase fixed
  double gap_margin = 0.0;                   // delta_0
  double gap_tol = 1e-3;
  int cutoff = 0;

  std::vector<double> band(int n) const;
  // CSV with columns l, lambda_1 .. lambda_n.
  std::string to_csv() const;
};

BlochBand dispersion_curve(const PeriodicCoefficients& coeffs, int bands, const std::vector<double>& l_samples,
                           int cutoff = -1, double gap_tol = 1e-3);

// Zero-mean solution of L_0 u = rhs.
CellFunction cell_solve_L0(const PeriodicCoefficients& coeffs, const CellFunction& rhs, int cutoff = -1);

struct FirstBandProjection {
  std::vector<cplx> amplitude;  // per Bloch row; zero where |l| > delta
  BlochField remainder;
};

FirstBandProjection project_first_band(const BlochField& field, const PeriodicCoefficients& coeffs,
                                       const BlochBand& band, double delta);

// Per-row eigendecompositions of the Bloch operator restricted to the modes a
// grid actually represents (the 2/3 band), i.e. the exact Bloch blocks of the
// pseudospectral operator used by the simulators.
class DiscreteBlochOperator {
 public:
  struct Row {
    double bloch = 0.0;
    int first_mode = 0;  // lowest retained cell mode
    int first_col = 0;   // its column in the BlochField row
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;  // columns orthonormal, column 0 phase fixed
  };

  DiscreteBlochOperator(const PeriodicCoefficients& coeffs, const SpectralGrid& grid);

  const SpectralGrid& grid() const { return grid_; }
  const Row& row(int r) const { return rows_[r]; }
  int dim(int r) const { return static_cast<int>(rows_[r].values.size()); }

  // Component of row r along w_1(l_r) (orthonormal convention).
  cplx band1_coefficient(const BlochField& f, int r) const;
  // Solves L_l v = f on the range of P_s for every row; band-1 components of
  // the input are discarded.
  BlochField solve_on_complement(const BlochField& f) const;
  // P_s of a Bloch field.
  BlochField complement(const BlochField& f) const;

 private:
  SpectralGrid grid_;
  std::vector<Row> rows_;
};

}  // namespace pbq

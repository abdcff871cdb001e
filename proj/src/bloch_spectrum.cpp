#include "pbq/bloch_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pbq {

int default_cell_cutoff(const PeriodicCoefficients& coeffs) { return std::max(16, 4 * coeffs.cutoff); }

BlochOperatorMatrix assemble_bloch_matrix(const PeriodicCoefficients& coeffs, double l, int first_mode,
                                          int last_mode) {
  const int n = last_mode - first_mode + 1;
  BlochOperatorMatrix m;
  m.bloch = l;
  m.first_mode = first_mode;
  m.matrix = Eigen::MatrixXcd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    const double kr = first_mode + r + l;
    for (int c = 0; c < n; ++c) {
      const int d = r - c;
      if (std::abs(d) > coeffs.cutoff) continue;
      const double kc = first_mode + c + l;
      m.matrix(r, c) = kr * kc * coeffs.a.coeff(d) + kr * kr * kc * kc * coeffs.b.coeff(d);
    }
  }
  return m;
}

BlochOperatorMatrix assemble_bloch_matrix(const PeriodicCoefficients& coeffs, double l, int cutoff) {
  if (cutoff < 2 * coeffs.cutoff)
    throw Error(ErrorKind::InvalidArgument, "cell cutoff must be at least twice the coefficient cutoff");
  return assemble_bloch_matrix(coeffs, l, -cutoff, cutoff);
}

namespace {

void fix_phase(Eigen::Ref<Eigen::VectorXcd> v, int first_mode, bool first_band) {
  Eigen::Index pivot = -first_mode;
  if (!first_band || pivot < 0 || pivot >= v.size() || std::abs(v(pivot)) < 1e-12) {
    v.cwiseAbs().maxCoeff(&pivot);
  }
  const cplx z = v(pivot);
  if (std::abs(z) > 0.0) v *= std::conj(z) / std::abs(z);
}

CellFunction to_cell(const Eigen::VectorXcd& v, int first_mode) {
  return CellFunction(first_mode, std::vector<cplx>(v.data(), v.data() + v.size()));
}

}  // namespace

std::vector<Eigenpair> band_eigenpairs(const BlochOperatorMatrix& m, int n_max, bool enforce_gap) {
  const int dim = static_cast<int>(m.matrix.rows());
  if (n_max < 1 || n_max > dim) throw Error(ErrorKind::InvalidArgument, "n_max outside 1..2M+1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m.matrix);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "eigensolver failed");
  std::vector<Eigenpair> out;
  out.reserve(n_max);
  for (int n = 0; n < n_max; ++n) {
    Eigen::VectorXcd v = solver.eigenvectors().col(n);
    fix_phase(v, m.first_mode, n == 0);
    // Rayleigh quotient: accurate for small eigenvalues next to large diagonal entries
    const double rq = (v.adjoint() * m.matrix * v)(0, 0).real() / v.squaredNorm();
    out.push_back({rq, to_cell(v, m.first_mode)});
  }
  if (enforce_gap && n_max >= 2 && out[1].value - out[0].value < 1e-8)
    throw Error(ErrorKind::DegenerateBranch,
                "first band not separated at l = " + num_text(m.bloch));
  return out;
}

std::vector<double> BlochBand::band(int n) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& row : values) out.push_back(row.at(n - 1));
  return out;
}

std::string BlochBand::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "l";
  for (int n = 1; n <= bands; ++n) os << ",lambda_" << n;
  os << "\n";
  for (std::size_t i = 0; i < bloch.size(); ++i) {
    os << bloch[i];
    for (int n = 0; n < bands; ++n) os << "," << values[i][n];
    os << "\n";
  }
  return os.str();
}

BlochBand dispersion_curve(const PeriodicCoefficients& coeffs, int bands, const std::vector<double>& l_samples,
                           int cutoff, double gap_tol) {
  if (cutoff < 0) cutoff = default_cell_cutoff(coeffs);
  for (double l : l_samples)
    if (l <= -0.5 - 1e-14 || l > 0.5 + 1e-14)
      throw Error(ErrorKind::InvalidArgument, "Bloch samples must lie in (-1/2, 1/2]");
  BlochBand band;
  band.bands = bands;
  band.bloch = l_samples;
  band.gap_tol = gap_tol;
  band.cutoff = cutoff;
  const std::size_t ns = l_samples.size();
  band.values.assign(ns, {});
  band.first.assign(ns, {});
  std::vector<double> gaps(ns);

  std::vector<std::size_t> order(ns);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return std::abs(l_samples[x]) < std::abs(l_samples[y]); });

  const CellFunction* previous = nullptr;
  for (std::size_t idx : order) {
    const auto m = assemble_bloch_matrix(coeffs, l_samples[idx], cutoff);
    auto pairs = band_eigenpairs(m, std::max(bands, 2));
    for (int n = 0; n < bands; ++n) band.values[idx].push_back(pairs[n].value);
    gaps[idx] = pairs[1].value - pairs[0].value;
    CellFunction w = pairs[0].vector;
    // continuity in l where the cell mean cannot fix the phase
    if (previous != nullptr && std::abs(w.mean()) < 1e-8) {
      const cplx overlap = previous->inner(w);
      if (std::abs(overlap) > 0.0) w = (std::conj(overlap) / std::abs(overlap)) * w;
    }
    band.first[idx] = std::move(w);
    previous = &band.first[idx];
  }

  band.gap_margin = 0.0;
  for (std::size_t idx : order) {
    if (gaps[idx] <= gap_tol) break;
    band.gap_margin = std::abs(l_samples[idx]);
  }
  return band;
}

CellFunction cell_solve_L0(const PeriodicCoefficients& coeffs, const CellFunction& rhs, int cutoff) {
  if (cutoff < 0) cutoff = default_cell_cutoff(coeffs);
  // keep the default margin beyond the rhs bandwidth so the Galerkin tail stays negligible
  cutoff = std::max(cutoff, std::max(std::abs(rhs.first_mode), std::abs(rhs.last_mode()))) + cutoff / 2;
  cutoff = std::max(cutoff, 2 * coeffs.cutoff);
  const double scale = rhs.norm();
  if (std::abs(rhs.mean()) > 1e-10 * scale)
    throw Error(ErrorKind::NonZeroMean, "cell problem right-hand side must be mean free");
  const auto full = assemble_bloch_matrix(coeffs, 0.0, -cutoff, cutoff);
  const int n = 2 * cutoff;
  Eigen::MatrixXcd reduced(n, n);
  Eigen::VectorXcd b(n);
  auto full_index = [&](int i) { return i < cutoff ? i : i + 1; };
  for (int i = 0; i < n; ++i) {
    b(i) = rhs.coeff(full_index(i) - cutoff);
    for (int k = 0; k < n; ++k) reduced(i, k) = full.matrix(full_index(i), full_index(k));
  }
  Eigen::VectorXcd x = reduced.ldlt().solve(b);
  CellFunction out = CellFunction::zeros(-cutoff, cutoff);
  for (int i = 0; i < n; ++i) out.coeffs[full_index(i)] = x(i);
  return out;
}

FirstBandProjection project_first_band(const BlochField& field, const PeriodicCoefficients& coeffs,
                                       const BlochBand& band, double delta) {
  if (delta > band.gap_margin + 1e-14)
    throw Error(ErrorKind::GapViolation, "projection half-width exceeds the spectral gap margin");
  const SpectralGrid& grid = field.grid;
  FirstBandProjection out;
  out.amplitude.assign(field.rows(), cplx{});
  out.remainder = field;
  const int p = field.cols();
  for (int r = 0; r < field.rows(); ++r) {
    const double l = bloch_number(grid, r);
    if (std::abs(l) > delta + 1e-14) continue;
    const int m0 = first_cell_mode(grid, r);
    const auto matrix = assemble_bloch_matrix(coeffs, l, m0, m0 + p - 1);
    const auto pairs = band_eigenpairs(matrix, 2, true);
    const CellFunction& w = pairs[0].vector;
    cplx coef{};
    for (int c = 0; c < p; ++c) coef += std::conj(w.coeffs[c]) * field.at(r, c);
    out.amplitude[r] = coef;
    for (int c = 0; c < p; ++c) out.remainder.at(r, c) -= coef * w.coeffs[c];
  }
  return out;
}

DiscreteBlochOperator::DiscreteBlochOperator(const PeriodicCoefficients& coeffs, const SpectralGrid& grid)
    : grid_(grid) {
  rows_.resize(grid.cells);
  const int nc = grid.cells;
  for (int r = 0; r < nc; ++r) {
    const int j = bloch_index(grid, r);
    const int m0 = first_cell_mode(grid, r);
    int lo = m0 + grid.points_per_cell, hi = m0 - 1;
    for (int c = 0; c < grid.points_per_cell; ++c) {
      if (grid.retained(j + (m0 + c) * nc)) {
        lo = std::min(lo, m0 + c);
        hi = std::max(hi, m0 + c);
      }
    }
    Row& row = rows_[r];
    row.bloch = bloch_number(grid, r);
    row.first_mode = lo;
    row.first_col = lo - m0;
    const auto m = assemble_bloch_matrix(coeffs, row.bloch, lo, hi);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m.matrix);
    row.values = solver.eigenvalues();
    row.vectors = solver.eigenvectors();
    fix_phase(row.vectors.col(0), lo, true);
    for (Eigen::Index k = 0; k < row.values.size(); ++k) {
      const auto v = row.vectors.col(k);
      row.values(k) = (v.adjoint() * m.matrix * v)(0, 0).real();
    }
  }
}

cplx DiscreteBlochOperator::band1_coefficient(const BlochField& f, int r) const {
  const Row& row = rows_[r];
  cplx acc{};
  for (Eigen::Index i = 0; i < row.vectors.rows(); ++i)
    acc += std::conj(row.vectors(i, 0)) * f.at(r, row.first_col + static_cast<int>(i));
  return acc;
}

BlochField DiscreteBlochOperator::complement(const BlochField& f) const {
  BlochField out(grid_);
  for (int r = 0; r < grid_.cells; ++r) {
    const Row& row = rows_[r];
    const cplx coef = band1_coefficient(f, r);
    for (Eigen::Index i = 0; i < row.vectors.rows(); ++i) {
      const int col = row.first_col + static_cast<int>(i);
      out.at(r, col) = f.at(r, col) - coef * row.vectors(i, 0);
    }
  }
  return out;
}

BlochField DiscreteBlochOperator::solve_on_complement(const BlochField& f) const {
  BlochField out(grid_);
  for (int r = 0; r < grid_.cells; ++r) {
    const Row& row = rows_[r];
    const Eigen::Index d = row.vectors.rows();
    Eigen::VectorXcd rhs(d);
    for (Eigen::Index i = 0; i < d; ++i) rhs(i) = f.at(r, row.first_col + static_cast<int>(i));
    Eigen::VectorXcd y = row.vectors.adjoint() * rhs;
    y(0) = 0.0;
    for (Eigen::Index k = 1; k < d; ++k) y(k) /= row.values(k);
    const Eigen::VectorXcd v = row.vectors * y;
    for (Eigen::Index i = 0; i < d; ++i) out.at(r, row.first_col + static_cast<int>(i)) = v(i);
  }
  return out;
}

}  // namespace pbq

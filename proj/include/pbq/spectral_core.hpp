#pragma once

// Periodic spectral primitives on the torus [0, 2*pi*cells) sampled with
// `points_per_cell` points per 2*pi cell, plus the discrete Bloch transform.
//
// Spectral coefficients are normalized so that u(x_r) = sum_n u_n exp(i k_n x_r)
// with k_n = n / cells and n in [-N/2, N/2).

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <vector>

#include "pbq/error.hpp"

namespace pbq {

using cplx = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

struct SpectralGrid {
  int cells = 1;
  int points_per_cell = 16;

  SpectralGrid() = default;
  SpectralGrid(int cells_, int points_per_cell_);

  int size() const noexcept { return cells * points_per_cell; }
  double spacing() const noexcept { return 2.0 * kPi / points_per_cell; }
  double length() const noexcept { return 2.0 * kPi * cells; }
  double x(int r) const noexcept { return r * spacing(); }
  // Physical wavenumber of signed mode index n.
  double wavenumber(int n) const noexcept { return static_cast<double>(n) / cells; }
  // Signed mode index of FFT slot idx in [0, N).
  int signed_mode(int idx) const noexcept { return idx < size() / 2 ? idx : idx - size(); }
  int slot(int n) const noexcept { return n >= 0 ? n : n + size(); }
  // Modes kept by the 2/3 rule.
  bool retained(int n) const noexcept { return 3 * std::abs(n) < size(); }

  bool operator==(const SpectralGrid&) const = default;
};

struct GridField {
  SpectralGrid grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(const SpectralGrid& g) : grid(g), values(static_cast<std::size_t>(g.size()), 0.0) {}
  GridField(const SpectralGrid& g, std::vector<double> v);

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

struct ComplexField {
  SpectralGrid grid;
  std::vector<cplx> values;

  ComplexField() = default;
  explicit ComplexField(const SpectralGrid& g) : grid(g), values(static_cast<std::size_t>(g.size())) {}
  ComplexField(const SpectralGrid& g, std::vector<cplx> v);
};

// Full-spectrum coefficients u_n in FFT slot order.
std::vector<cplx> spectrum(const GridField& f);
std::vector<cplx> spectrum(const ComplexField& f);
// Inverse of spectrum(); the real version reads only the Hermitian half.
GridField real_from_spectrum(const SpectralGrid& grid, std::span<const cplx> coeffs);
ComplexField complex_from_spectrum(const SpectralGrid& grid, std::span<const cplx> coeffs);

// Half-spectrum (N/2+1 entries) transforms used on hot paths.
void forward_half(std::span<const double> in, std::span<cplx> out);
void inverse_half(std::span<const cplx> in, std::span<double> out);

GridField spectral_derivative(const GridField& f, int order);
ComplexField spectral_derivative(const ComplexField& f, int order);

// Zero-mean antiderivative; throws NonZeroMean unless |mean| <= tol * rms(f).
GridField antiderivative(const GridField& f, double tol = 1e-10);

double mean(const GridField& f);
double l2_norm(const GridField& f);
double sobolev_norm(const GridField& f, double s);

GridField dealiased_product(const GridField& f, const GridField& g);
// Zeroes every mode outside the 2/3 band.
GridField dealias(const GridField& f);

GridField operator+(const GridField& a, const GridField& b);
GridField operator-(const GridField& a, const GridField& b);
GridField operator*(double s, const GridField& a);
double max_abs(const GridField& f);

// Bloch-space data: one row per Bloch number l_j in (-1/2, 1/2], P cell Fourier
// coefficients per row. Row j holds cell modes m = first_mode(j) ... + P - 1.
struct BlochField {
  SpectralGrid grid;
  std::vector<cplx> values;

  BlochField() = default;
  explicit BlochField(const SpectralGrid& g)
      : grid(g), values(static_cast<std::size_t>(g.size())) {}

  int rows() const noexcept { return grid.cells; }
  int cols() const noexcept { return grid.points_per_cell; }
  cplx& at(int row, int col) { return values[static_cast<std::size_t>(row) * cols() + col]; }
  cplx at(int row, int col) const { return values[static_cast<std::size_t>(row) * cols() + col]; }
};

// Integer Bloch index j of row r, with l_j = j / cells in (-1/2, 1/2].
int bloch_index(const SpectralGrid& grid, int row);
double bloch_number(const SpectralGrid& grid, int row);
int bloch_row(const SpectralGrid& grid, int j);
// Lowest cell mode stored in row r.
int first_cell_mode(const SpectralGrid& grid, int row);

BlochField bloch_forward(const GridField& f);
BlochField bloch_forward(const ComplexField& f);
ComplexField bloch_inverse(const BlochField& b);
// Real part, after checking the imaginary part is below tol * max|value|.
GridField real_part(const ComplexField& f, double tol = 1e-12);

// Cell function values of row r on the P-point cell grid.
std::vector<cplx> cell_samples(const BlochField& b, int row);

// Discrete Bloch-space convolution with continuation across l = +-1/2; both
// inputs and the output are restricted to the 2/3 band, so the result equals
// bloch_forward(dealiased_product(f, g)).
BlochField bloch_convolve(const BlochField& b1, const BlochField& b2);
// Multiplication by a 2*pi-periodic function given by its cell Fourier
// coefficients chi[r + R], r in [-R, R]; modes leaving the row window are dropped.
BlochField bloch_multiply(const BlochField& b, std::span<const cplx> chi);

// Worst errors of the Bloch identities over random fields: round trip,
// isometry (relative), multiplication by a periodic function, convolution.
struct BlochSelftest {
  int draws = 0;
  double round_trip = 0.0, isometry = 0.0, multiply = 0.0, convolve = 0.0;
  double worst() const;
};
BlochSelftest bloch_selftest(int draws, unsigned seed);

}  // namespace pbq

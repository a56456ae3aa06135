#pragma once

#include <array>

#include "alignrecon/grid.hpp"

namespace alignrecon {

// Lattice of control-point displacements spanning the full image extent:
// control (i, j) sits at row i*(H-1)/(rows-1), column j*(W-1)/(cols-1).
struct ControlGrid {
  static constexpr std::size_t kDefaultSide = 9;

  RealGrid dx;
  RealGrid dy;

  ControlGrid() : ControlGrid(kDefaultSide, kDefaultSide) {}
  ControlGrid(std::size_t rows, std::size_t cols) : dx(rows, cols), dy(rows, cols) {}

  std::size_t rows() const { return dx.height(); }
  std::size_t cols() const { return dx.width(); }
};

// Bilinear sample of a grid at (x = column, y = row) with border clamping.
// Coordinates outside [0, W-1] x [0, H-1] are clamped to the border, where
// the sample is constant, so the reported derivative there is zero.
template <typename T>
struct BilinearSample {
  T value{};
  T d_dx{};
  T d_dy{};
};

template <typename T>
BilinearSample<T> sample_bilinear(const Grid<T>& img, double x, double y);

template <typename T>
T sample_bilinear_value(const Grid<T>& img, double x, double y) {
  return sample_bilinear(img, x, y).value;
}

// output(p) = img(p + field(p)), real and imaginary parts interpolated independently.
ComplexImage warp(const ComplexImage& img, const DisplacementField& field);
RealImage warp(const RealImage& img, const DisplacementField& field);

// field(p) = R_theta (p - c) + c + t - p, c the geometric image center ((W-1)/2, (H-1)/2).
DisplacementField affine_to_field(double theta, std::array<double, 2> translation, Shape shape);

// Separable Catmull-Rom interpolation of the control lattice over the image.
DisplacementField upsample_bicubic(const ControlGrid& grid, Shape shape);

// Interpolant of upsample_bicubic at a fractional pixel position.
std::array<double, 2> evaluate_control_grid(const ControlGrid& grid, Shape shape, double row, double col);

// out(p) = inner(p) + outer(p + inner(p)), outer looked up bilinearly.
DisplacementField compose(const DisplacementField& outer, const DisplacementField& inner);

// Field g with compose(field, g) ~ 0, i.e. warp(warp(img, field), g) ~ img
// away from the clamped border. Fixed-point iteration g(p) = -field(p + g(p)).
DisplacementField inverse_field(const DisplacementField& field, int iterations = 30);

// Largest per-component displacement magnitude.
double max_abs_component(const DisplacementField& field);

// Mean per-pixel Euclidean length of (a - b).
double mean_endpoint_error(const DisplacementField& a, const DisplacementField& b);

// Separable Gaussian smoothing with replicated borders; sigma <= 0 is a no-op.
RealGrid gaussian_smooth(const RealGrid& in, double sigma);
DisplacementField gaussian_smooth(const DisplacementField& in, double sigma);

}  // namespace alignrecon

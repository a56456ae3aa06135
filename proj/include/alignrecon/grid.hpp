#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alignrecon/errors.hpp"

namespace alignrecon {

using cplx = std::complex<double>;

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

// Row-major 2D array. Concrete grid types derive from this to get distinct
// static types for image-domain and frequency-domain data.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  explicit Grid(Shape shape, T fill = T{}) : shape_(shape), data_(shape.size(), fill) {}
  Grid(std::size_t height, std::size_t width, T fill = T{}) : Grid(Shape{height, width}, fill) {}

  Shape shape() const { return shape_; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return data_[row * shape_.width + col]; }
  const T& operator()(std::size_t row, std::size_t col) const { return data_[row * shape_.width + col]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 protected:
  Shape shape_;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;

// Real-valued image (magnitudes, error maps, single displacement planes).
class RealImage : public Grid<double> {
 public:
  using Grid::Grid;
  RealImage() = default;
  explicit RealImage(Grid<double> g) : Grid(std::move(g)) {}
};

// Complex image-domain grid; at least 8x8.
class ComplexImage : public Grid<cplx> {
 public:
  ComplexImage() = default;
  explicit ComplexImage(Shape shape, cplx fill = {});
  ComplexImage(std::size_t height, std::size_t width, cplx fill = {}) : ComplexImage(Shape{height, width}, fill) {}

  static ComplexImage from_real(const RealImage& real);
  RealImage real() const;
  RealImage imag() const;
  RealImage magnitude() const;
};

// Centered k-space grid (DC at row H/2, column W/2, floor division).
class KSpace : public Grid<cplx> {
 public:
  KSpace() = default;
  explicit KSpace(Shape shape, cplx fill = {});
  KSpace(std::size_t height, std::size_t width, cplx fill = {}) : KSpace(Shape{height, width}, fill) {}
};

// Cartesian 1D sampling pattern: mask(r, c) = columns[c].
class SamplingMask {
 public:
  SamplingMask() = default;
  SamplingMask(std::size_t height, std::vector<std::uint8_t> columns);

  Shape shape() const { return {height_, columns_.size()}; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return columns_.size(); }
  bool sampled(std::size_t col) const { return columns_[col] != 0; }
  bool operator()(std::size_t /*row*/, std::size_t col) const { return sampled(col); }
  std::span<const std::uint8_t> columns() const { return columns_; }
  std::size_t sampled_count() const;

  static SamplingMask full(Shape shape);

  friend bool operator==(const SamplingMask&, const SamplingMask&) = default;

 private:
  std::size_t height_ = 0;
  std::vector<std::uint8_t> columns_;
};

// Per-pixel sampling offset in pixels: warped(p) = image(p + (dx, dy)), with
// dx along columns and dy along rows.
struct DisplacementField {
  RealGrid dx;
  RealGrid dy;

  DisplacementField() = default;
  explicit DisplacementField(Shape shape) : dx(shape), dy(shape) {}

  Shape shape() const { return dx.shape(); }
  friend bool operator==(const DisplacementField&, const DisplacementField&) = default;
};

void require_same_shape(Shape a, Shape b, const char* context);
bool all_finite(std::span<const cplx> values);
bool all_finite(std::span<const double> values);

}  // namespace alignrecon

#include "alignrecon/grid.hpp"

#include <algorithm>
#include <cmath>

namespace alignrecon {

namespace {

constexpr std::size_t kMinImageSide = 8;

void require_min_side(Shape shape, const char* what) {
  if (shape.height < kMinImageSide || shape.width < kMinImageSide) {
    throw DimensionError(std::string(what) + " must be at least 8x8, got " + to_string(shape));
  }
}

}  // namespace

std::string to_string(const Shape& shape) {
  return std::to_string(shape.height) + "x" + std::to_string(shape.width);
}

ComplexImage::ComplexImage(Shape shape, cplx fill) : Grid(shape, fill) { require_min_side(shape, "ComplexImage"); }

ComplexImage ComplexImage::from_real(const RealImage& real) {
  ComplexImage out(real.shape());
  for (std::size_t i = 0; i < real.size(); ++i) out[i] = cplx(real[i], 0.0);
  return out;
}

RealImage ComplexImage::real() const {
  RealImage out(shape_);
  for (std::size_t i = 0; i < size(); ++i) out[i] = data_[i].real();
  return out;
}

RealImage ComplexImage::imag() const {
  RealImage out(shape_);
  for (std::size_t i = 0; i < size(); ++i) out[i] = data_[i].imag();
  return out;
}

RealImage ComplexImage::magnitude() const {
  RealImage out(shape_);
  for (std::size_t i = 0; i < size(); ++i) out[i] = std::abs(data_[i]);
  return out;
}

KSpace::KSpace(Shape shape, cplx fill) : Grid(shape, fill) { require_min_side(shape, "KSpace"); }

SamplingMask::SamplingMask(std::size_t height, std::vector<std::uint8_t> columns)
    : height_(height), columns_(std::move(columns)) {
  for (auto& c : columns_) c = c ? 1 : 0;
  if (height_ == 0 || columns_.empty()) throw DimensionError("SamplingMask must be non-empty");
  if (sampled_count() == 0) throw InvalidSpec("SamplingMask must sample at least one column");
}

std::size_t SamplingMask::sampled_count() const {
  return static_cast<std::size_t>(std::count(columns_.begin(), columns_.end(), std::uint8_t{1}));
}

SamplingMask SamplingMask::full(Shape shape) {
  return SamplingMask(shape.height, std::vector<std::uint8_t>(shape.width, 1));
}

void require_same_shape(Shape a, Shape b, const char* context) {
  if (a != b) {
    throw DimensionError(std::string(context) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
  }
}

bool all_finite(std::span<const cplx> values) {
  return std::all_of(values.begin(), values.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace alignrecon

#include "alignrecon/warp.hpp"

#include <algorithm>
#include <cmath>

namespace alignrecon {

template <typename T>
BilinearSample<T> sample_bilinear(const Grid<T>& img, double x, double y) {
  const std::size_t h = img.height(), w = img.width();
  const double xmax = static_cast<double>(w - 1), ymax = static_cast<double>(h - 1);
  const bool inside_x = x >= 0.0 && x <= xmax;
  const bool inside_y = y >= 0.0 && y <= ymax;
  const double cx = std::clamp(x, 0.0, xmax);
  const double cy = std::clamp(y, 0.0, ymax);
  const std::size_t x0 = std::min(static_cast<std::size_t>(cx), w - 2);
  const std::size_t y0 = std::min(static_cast<std::size_t>(cy), h - 2);
  const double fx = cx - static_cast<double>(x0);
  const double fy = cy - static_cast<double>(y0);

  const T& v00 = img(y0, x0);
  const T& v01 = img(y0, x0 + 1);
  const T& v10 = img(y0 + 1, x0);
  const T& v11 = img(y0 + 1, x0 + 1);

  BilinearSample<T> s;
  s.value = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11);
  if (inside_x) s.d_dx = (1.0 - fy) * (v01 - v00) + fy * (v11 - v10);
  if (inside_y) s.d_dy = (1.0 - fx) * (v10 - v00) + fx * (v11 - v01);
  return s;
}

template BilinearSample<double> sample_bilinear(const Grid<double>&, double, double);
template BilinearSample<cplx> sample_bilinear(const Grid<cplx>&, double, double);

namespace {

template <typename Image>
Image warp_impl(const Image& img, const DisplacementField& field) {
  require_same_shape(img.shape(), field.shape(), "warp");
  Image out(img.shape());
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c)
      out(r, c) = sample_bilinear_value<typename Image::value_type>(
          img, static_cast<double>(c) + field.dx(r, c), static_cast<double>(r) + field.dy(r, c));
  return out;
}

std::array<double, 4> catmull_rom_weights(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (-3.0 * t3 + 4.0 * t2 + t),
          0.5 * (t3 - t2)};
}

// Lattice value with linear extrapolation one node past each end, so linear
// ramps are reproduced all the way to the border.
double lattice_at(const RealGrid& g, long i, long j) {
  const long rows = static_cast<long>(g.height()), cols = static_cast<long>(g.width());
  auto col_value = [&](long ii) {
    if (j < 0) return 2.0 * g(ii, 0) - g(ii, 1);
    if (j >= cols) return 2.0 * g(ii, cols - 1) - g(ii, cols - 2);
    return g(ii, j);
  };
  if (i < 0) return 2.0 * col_value(0) - col_value(1);
  if (i >= rows) return 2.0 * col_value(rows - 1) - col_value(rows - 2);
  return col_value(i);
}

struct LatticePos {
  long index;
  double frac;
};

LatticePos lattice_pos(double pixel, std::size_t pixels, std::size_t nodes) {
  const double u = pixel * static_cast<double>(nodes - 1) / static_cast<double>(pixels - 1);
  long i = static_cast<long>(std::floor(u));
  i = std::clamp(i, 0L, static_cast<long>(nodes) - 2);
  return {i, u - static_cast<double>(i)};
}

double interpolate(const RealGrid& g, LatticePos pr, LatticePos pc) {
  const auto wr = catmull_rom_weights(pr.frac);
  const auto wc = catmull_rom_weights(pc.frac);
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double row_acc = 0.0;
    for (int b = 0; b < 4; ++b) row_acc += wc[b] * lattice_at(g, pr.index - 1 + a, pc.index - 1 + b);
    acc += wr[a] * row_acc;
  }
  return acc;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

}  // namespace

ComplexImage warp(const ComplexImage& img, const DisplacementField& field) { return warp_impl(img, field); }
RealImage warp(const RealImage& img, const DisplacementField& field) { return warp_impl(img, field); }

DisplacementField affine_to_field(double theta, std::array<double, 2> translation, Shape shape) {
  if (!std::isfinite(theta) || !std::isfinite(translation[0]) || !std::isfinite(translation[1]))
    throw InvalidParameter("affine_to_field: non-finite parameters");
  if (std::abs(theta) >= M_PI) throw InvalidParameter("affine_to_field: |theta| must be < pi");
  DisplacementField f(shape);
  const double cx = 0.5 * static_cast<double>(shape.width - 1);
  const double cy = 0.5 * static_cast<double>(shape.height - 1);
  const double cs = std::cos(theta), sn = std::sin(theta);
  for (std::size_t r = 0; r < shape.height; ++r) {
    for (std::size_t c = 0; c < shape.width; ++c) {
      const double px = static_cast<double>(c) - cx, py = static_cast<double>(r) - cy;
      f.dx(r, c) = cs * px - sn * py - px + translation[0];
      f.dy(r, c) = sn * px + cs * py - py + translation[1];
    }
  }
  return f;
}

std::array<double, 2> evaluate_control_grid(const ControlGrid& grid, Shape shape, double row, double col) {
  const auto pr = lattice_pos(row, shape.height, grid.rows());
  const auto pc = lattice_pos(col, shape.width, grid.cols());
  return {interpolate(grid.dx, pr, pc), interpolate(grid.dy, pr, pc)};
}

DisplacementField upsample_bicubic(const ControlGrid& grid, Shape shape) {
  if (grid.rows() < 2 || grid.cols() < 2) throw DimensionError("control grid needs at least 2x2 nodes");
  if (shape.height < grid.rows() || shape.width < grid.cols())
    throw DimensionError("upsample_bicubic: target " + to_string(shape) + " smaller than control grid");
  DisplacementField f(shape);
  for (std::size_t r = 0; r < shape.height; ++r) {
    const auto pr = lattice_pos(static_cast<double>(r), shape.height, grid.rows());
    for (std::size_t c = 0; c < shape.width; ++c) {
      const auto pc = lattice_pos(static_cast<double>(c), shape.width, grid.cols());
      f.dx(r, c) = interpolate(grid.dx, pr, pc);
      f.dy(r, c) = interpolate(grid.dy, pr, pc);
    }
  }
  return f;
}

DisplacementField compose(const DisplacementField& outer, const DisplacementField& inner) {
  require_same_shape(outer.shape(), inner.shape(), "compose");
  DisplacementField out(inner.shape());
  for (std::size_t r = 0; r < inner.dx.height(); ++r) {
    for (std::size_t c = 0; c < inner.dx.width(); ++c) {
      const double x = static_cast<double>(c) + inner.dx(r, c);
      const double y = static_cast<double>(r) + inner.dy(r, c);
      out.dx(r, c) = inner.dx(r, c) + sample_bilinear_value(outer.dx, x, y);
      out.dy(r, c) = inner.dy(r, c) + sample_bilinear_value(outer.dy, x, y);
    }
  }
  return out;
}

DisplacementField inverse_field(const DisplacementField& field, int iterations) {
  DisplacementField g(field.shape());
  for (int it = 0; it < iterations; ++it) {
    DisplacementField next(field.shape());
    for (std::size_t r = 0; r < field.dx.height(); ++r)
      for (std::size_t c = 0; c < field.dx.width(); ++c) {
        const double x = static_cast<double>(c) + g.dx(r, c);
        const double y = static_cast<double>(r) + g.dy(r, c);
        next.dx(r, c) = -sample_bilinear_value(field.dx, x, y);
        next.dy(r, c) = -sample_bilinear_value(field.dy, x, y);
      }
    g = std::move(next);
  }
  return g;
}

double max_abs_component(const DisplacementField& field) {
  double m = 0.0;
  for (std::size_t i = 0; i < field.dx.size(); ++i)
    m = std::max({m, std::abs(field.dx[i]), std::abs(field.dy[i])});
  return m;
}

double mean_endpoint_error(const DisplacementField& a, const DisplacementField& b) {
  require_same_shape(a.shape(), b.shape(), "mean_endpoint_error");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dx.size(); ++i) acc += std::hypot(a.dx[i] - b.dx[i], a.dy[i] - b.dy[i]);
  return acc / static_cast<double>(a.dx.size());
}

RealGrid gaussian_smooth(const RealGrid& in, double sigma) {
  if (!(sigma > 0.0)) return in;
  const auto k = gaussian_kernel(sigma);
  const long radius = static_cast<long>(k.size() / 2);
  const long h = static_cast<long>(in.height()), w = static_cast<long>(in.width());
  RealGrid tmp(in.shape()), out(in.shape());
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c) {
      double acc = 0.0;
      for (long i = -radius; i <= radius; ++i) acc += k[i + radius] * in(r, std::clamp(c + i, 0L, w - 1));
      tmp(r, c) = acc;
    }
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c) {
      double acc = 0.0;
      for (long i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp(std::clamp(r + i, 0L, h - 1), c);
      out(r, c) = acc;
    }
  return out;
}

DisplacementField gaussian_smooth(const DisplacementField& in, double sigma) {
  DisplacementField out;
  out.dx = gaussian_smooth(in.dx, sigma);
  out.dy = gaussian_smooth(in.dy, sigma);
  return out;
}

}  // namespace alignrecon

#pragma once

#include <cmath>
#include <random>

#include "alignrecon/grid.hpp"
#include "alignrecon/similarity.hpp"

namespace testutil {

using namespace alignrecon;

inline ComplexImage random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexImage img(h, w);
  for (auto& v : img.data()) v = {n(rng), n(rng)};
  return img;
}

inline RealImage random_real(std::size_t h, std::size_t w, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  RealImage img(h, w);
  for (auto& v : img.data()) v = u(rng);
  return img;
}

inline KSpace random_kspace(std::size_t h, std::size_t w, std::uint64_t seed) {
  const ComplexImage img = random_image(h, w, seed);
  KSpace k(img.shape());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = img[i];
  return k;
}

// Smooth random field: a few low-frequency sinusoids.
inline RealImage smooth_real(std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
  RealImage img(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t col = 0; col < w; ++col) {
      const double y = static_cast<double>(r) / static_cast<double>(h);
      const double x = static_cast<double>(col) / static_cast<double>(w);
      img(r, col) = 1.0 + 0.5 * std::sin(3.0 * x + a) * std::cos(2.5 * y + b) + 0.3 * std::sin(4.0 * (x + y) + c) +
                    0.2 * d * x * y;
    }
  return img;
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double l2(std::span<const cplx> a) {
  double acc = 0.0;
  for (const auto& v : a) acc += std::norm(v);
  return std::sqrt(acc);
}

inline EdgeField random_edges(Shape s, std::uint64_t seed) {
  return edge_field(random_real(s.height, s.width, seed), 0.3);
}

inline ComplexImage smooth_complex(std::size_t n, std::uint64_t seed) {
  const RealImage re = smooth_real(n, n, seed), im = smooth_real(n, n, seed + 1000);
  ComplexImage out(n, n);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {re[i], 0.5 * im[i]};
  return out;
}

}  // namespace testutil

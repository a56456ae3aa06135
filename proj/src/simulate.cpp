#include "alignrecon/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "alignrecon/transform.hpp"

namespace alignrecon {

namespace {

struct Ellipse {
  double cx, cy, a, b, angle;

  bool contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double u = std::cos(angle) * dx + std::sin(angle) * dy;
    const double v = -std::sin(angle) * dx + std::cos(angle) * dy;
    return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
  }
};

void normalize_to_unit_max(ComplexImage& img) {
  double m = 0.0;
  for (const auto& v : img.data()) m = std::max(m, v.real());
  if (m > 0.0)
    for (auto& v : img.data()) v = cplx(v.real() / m, 0.0);
}

}  // namespace

PhantomPair phantom_pair(std::size_t size, std::uint64_t seed) {
  if (size < 64) throw DimensionError("phantom size must be >= 64, got " + std::to_string(size));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double n = static_cast<double>(size);
  const double center = 0.5 * (n - 1.0);
  const double disc_radius = 0.45 * n;

  const int count = std::uniform_int_distribution<int>(8, 15)(rng);
  std::vector<Ellipse> ellipses;
  for (int i = 0; i < count; ++i) {
    const double r = 0.28 * n * std::sqrt(unit(rng));
    const double t = uniform(0.0, 2.0 * M_PI);
    ellipses.push_back({center + r * std::cos(t), center + r * std::sin(t), uniform(0.04, 0.16) * n,
                        uniform(0.04, 0.16) * n, uniform(0.0, M_PI)});
  }
  // Label 1 is the disc; labels 2.. are ellipses. Intensities for each contrast
  // are drawn independently so the two maps share geometry but not values.
  std::vector<double> target_values{0.0, uniform(0.2, 0.5)}, reference_values{0.0, uniform(0.2, 0.5)};
  for (int i = 0; i < count; ++i) {
    target_values.push_back(uniform(0.05, 1.0));
    reference_values.push_back(uniform(0.05, 1.0));
  }

  PhantomPair pair{ComplexImage(size, size), ComplexImage(size, size), Grid<int>(size, size), seed};
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double x = static_cast<double>(c), y = static_cast<double>(r);
      int label = 0;
      if (std::hypot(x - center, y - center) <= disc_radius) {
        label = 1;
        for (int i = 0; i < count; ++i)
          if (ellipses[i].contains(x, y)) label = 2 + i;
      }
      pair.labels(r, c) = label;
      pair.target(r, c) = target_values[label];
      pair.reference(r, c) = reference_values[label];
    }
  }
  normalize_to_unit_max(pair.target);
  normalize_to_unit_max(pair.reference);
  return pair;
}

KSpace acquire(const ComplexImage& x_gt, const SamplingMask& mask, double noise_sigma, std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) throw InvalidParameter("noise_sigma must be >= 0");
  KSpace k = forward_masked(x_gt, mask);
  if (noise_sigma == 0.0) return k;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (std::size_t r = 0; r < k.height(); ++r)
    for (std::size_t c = 0; c < k.width(); ++c)
      if (mask.sampled(c)) {
        const double re = noise(rng);
        const double im = noise(rng);
        k(r, c) += cplx(re, im);
      }
  return k;
}

MisalignParams draw_misalignment(const MisalignSpec& spec, std::size_t image_size) {
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) throw InvalidParameter("misalignment sigma must be >= 0");
  const double n = static_cast<double>(image_size);
  const double rot = 0.01 * M_PI * spec.sigma, shift = 0.05 * n * spec.sigma, ctrl = 0.02 * n * spec.sigma;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  MisalignParams p;
  p.theta = rot * unit(rng);
  p.translation = {shift * unit(rng), shift * unit(rng)};
  for (std::size_t i = 0; i < p.control.dx.size(); ++i) {
    p.control.dx[i] = ctrl * unit(rng);
    p.control.dy[i] = ctrl * unit(rng);
  }
  return p;
}

Misaligned misalign(const ComplexImage& x_ref, const MisalignSpec& spec) {
  const Shape shape = x_ref.shape();
  const MisalignParams params = draw_misalignment(spec, std::max(shape.height, shape.width));
  const DisplacementField affine = affine_to_field(params.theta, params.translation, shape);
  const DisplacementField freeform = upsample_bicubic(params.control, shape);
  DisplacementField field = compose(freeform, affine);
  return {warp(x_ref, field), std::move(field), params};
}

}  // namespace alignrecon

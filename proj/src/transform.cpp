#include "alignrecon/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace alignrecon {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created in place with FFTW_UNALIGNED so any buffer may be used.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t height, std::size_t width, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(height, width, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> scratch(height * width);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(height), static_cast<int>(width), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw NumericalError("FFTW failed to create a plan for " + to_string({height, width}));
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// buf[r][c] = src[(r + H/2) % H][(c + W/2) % W]
std::vector<cplx> ifftshift(std::span<const cplx> src, Shape shape) {
  const std::size_t h = shape.height, w = shape.width, fh = h / 2, fw = w / 2;
  std::vector<cplx> out(src.size());
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t sr = (r + fh) % h;
    for (std::size_t c = 0; c < w; ++c) out[r * w + c] = src[sr * w + (c + fw) % w];
  }
  return out;
}

// dst[r][c] = buf[(r - H/2) mod H][(c - W/2) mod W] * scale
void fftshift_scaled(std::span<const cplx> buf, std::span<cplx> dst, Shape shape, double scale) {
  const std::size_t h = shape.height, w = shape.width, fh = h / 2, fw = w / 2;
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t sr = (r + h - fh) % h;
    for (std::size_t c = 0; c < w; ++c) dst[r * w + c] = buf[sr * w + (c + w - fw) % w] * scale;
  }
}

void centered_transform(std::span<const cplx> src, std::span<cplx> dst, Shape shape, int sign) {
  if (!all_finite(src)) throw InvalidInput("Fourier transform input contains non-finite values");
  auto buf = ifftshift(src, shape);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(plan_cache().get(shape.height, shape.width, sign), p, p);
  fftshift_scaled(buf, dst, shape, 1.0 / std::sqrt(static_cast<double>(shape.size())));
}

}  // namespace

KSpace fft2c(const ComplexImage& img) {
  KSpace out(img.shape());
  centered_transform(img.data(), out.data(), img.shape(), FFTW_FORWARD);
  return out;
}

ComplexImage ifft2c(const KSpace& k) {
  ComplexImage out(k.shape());
  centered_transform(k.data(), out.data(), k.shape(), FFTW_BACKWARD);
  return out;
}

void apply_mask(KSpace& k, const SamplingMask& mask) {
  require_same_shape(k.shape(), mask.shape(), "apply_mask");
  for (std::size_t r = 0; r < k.height(); ++r)
    for (std::size_t c = 0; c < k.width(); ++c)
      if (!mask.sampled(c)) k(r, c) = cplx{};
}

KSpace forward_masked(const ComplexImage& img, const SamplingMask& mask) {
  require_same_shape(img.shape(), mask.shape(), "forward_masked");
  KSpace k = fft2c(img);
  apply_mask(k, mask);
  return k;
}

ComplexImage adjoint_masked(const KSpace& k, const SamplingMask& mask) {
  require_same_shape(k.shape(), mask.shape(), "adjoint_masked");
  KSpace masked = k;
  apply_mask(masked, mask);
  return ifft2c(masked);
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw DimensionError("inner: length mismatch");
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm2(std::span<const cplx> a) {
  double acc = 0.0;
  for (const auto& v : a) acc += std::norm(v);
  return std::sqrt(acc);
}

}  // namespace alignrecon

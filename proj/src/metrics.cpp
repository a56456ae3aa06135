#include "alignrecon/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace alignrecon {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> w{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    w[i] = std::exp(-0.5 * d * d / (kWindowSigma * kWindowSigma));
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  return w;
}

// Separable 'valid' filtering: output is (H-10) x (W-10).
RealGrid filter_valid(const RealGrid& in, const std::array<double, kWindow>& w) {
  const std::size_t oh = in.height() - kWindow + 1, ow = in.width() - kWindow + 1;
  RealGrid rows(in.height(), ow), out(oh, ow);
  for (std::size_t r = 0; r < in.height(); ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += w[k] * in(r, c + k);
      rows(r, c) = acc;
    }
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += w[k] * rows(r + k, c);
      out(r, c) = acc;
    }
  return out;
}

double max_value(const RealImage& img) {
  return img.empty() ? 0.0 : *std::max_element(img.data().begin(), img.data().end());
}

}  // namespace

double psnr(const RealImage& a, const RealImage& b, double data_range) {
  require_same_shape(a.shape(), b.shape(), "psnr");
  if (!(data_range > 0.0)) throw InvalidParameter("psnr data_range must be > 0");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(data_range * data_range / mse));
}

double ssim(const RealImage& a, const RealImage& b, double data_range) {
  require_same_shape(a.shape(), b.shape(), "ssim");
  if (a.height() < kWindow || a.width() < kWindow)
    throw DimensionError("ssim needs images of at least 11x11, got " + to_string(a.shape()));
  if (!(data_range > 0.0)) throw InvalidParameter("ssim data_range must be > 0");
  const auto w = gaussian_window();
  RealGrid aa(a.shape()), bb(a.shape()), ab(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const RealGrid mu_a = filter_valid(a, w), mu_b = filter_valid(b, w);
  const RealGrid e_aa = filter_valid(aa, w), e_bb = filter_valid(bb, w), e_ab = filter_valid(ab, w);
  const double c1 = (kK1 * data_range) * (kK1 * data_range);
  const double c2 = (kK2 * data_range) * (kK2 * data_range);
  double acc = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma, vb = e_bb[i] - mb * mb, cov = e_ab[i] - ma * mb;
    acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return acc / static_cast<double>(mu_a.size());
}

double mae(const RealImage& a, const RealImage& b) {
  require_same_shape(a.shape(), b.shape(), "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

MetricReport evaluate(const RealImage& image, const RealImage& truth) {
  const double range = max_value(truth) > 0.0 ? max_value(truth) : 1.0;
  return {psnr(image, truth, range), ssim(image, truth, range), mae(image, truth)};
}

MetricReport evaluate(const ComplexImage& image, const ComplexImage& truth) {
  return evaluate(image.magnitude(), truth.magnitude());
}

}  // namespace alignrecon

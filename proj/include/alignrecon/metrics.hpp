#pragma once

#include <string>

#include "alignrecon/grid.hpp"

namespace alignrecon {

inline constexpr double kPsnrCapDb = 100.0;

struct MetricReport {
  double psnr = 0.0;  // dB, capped at kPsnrCapDb
  double ssim = 0.0;
  double mae = 0.0;
};

// 10 log10(range^2 / MSE), identical images (or anything above the cap) -> 100 dB.
double psnr(const RealImage& a, const RealImage& b, double data_range);

// Mean local SSIM over all fully-contained 11x11 Gaussian (sigma 1.5) windows,
// K1 = 0.01, K2 = 0.03.
double ssim(const RealImage& a, const RealImage& b, double data_range);

double mae(const RealImage& a, const RealImage& b);

// Magnitude-domain metrics with data_range = max |truth|.
MetricReport evaluate(const ComplexImage& image, const ComplexImage& truth);
MetricReport evaluate(const RealImage& image, const RealImage& truth);

}  // namespace alignrecon

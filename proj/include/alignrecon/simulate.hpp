#pragma once

#include <cstdint>

#include "alignrecon/grid.hpp"
#include "alignrecon/warp.hpp"

namespace alignrecon {

// Two contrasts over one piecewise-constant geometry: a disc of background
// tissue holding 8-15 random ellipses. Both images are real-valued and
// normalized so their maximum is 1.
struct PhantomPair {
  ComplexImage target;     // T2-like contrast
  ComplexImage reference;  // T1-like contrast
  Grid<int> labels;        // 0 outside the disc, 1 disc, 2+ ellipses
  std::uint64_t seed = 0;
};

PhantomPair phantom_pair(std::size_t size, std::uint64_t seed);

// k = F_m x + n, n complex Gaussian (std noise_sigma per real/imag part) at sampled bins only.
KSpace acquire(const ComplexImage& x_gt, const SamplingMask& mask, double noise_sigma, std::uint64_t seed);

struct MisalignSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct MisalignParams {
  double theta = 0.0;                  // U[-0.01 pi sigma, 0.01 pi sigma]
  std::array<double, 2> translation{};  // per axis U[-0.05 N sigma, 0.05 N sigma]
  ControlGrid control;                 // 9x9, per component U[-0.02 N sigma, 0.02 N sigma]
};

MisalignParams draw_misalignment(const MisalignSpec& spec, std::size_t image_size);

// Field = compose(free-form, affine); returns the warped reference and the field.
struct Misaligned {
  ComplexImage image;
  DisplacementField field;
  MisalignParams params;
};

Misaligned misalign(const ComplexImage& x_ref, const MisalignSpec& spec);

}  // namespace alignrecon

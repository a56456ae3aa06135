#pragma once

#include "alignrecon/grid.hpp"

namespace alignrecon {

// Centered, orthonormal 2D DFT. DC lands on bin (H/2, W/2) (floor division)
// and both directions carry a 1/sqrt(HW) factor, so ifft2c is the exact
// adjoint of fft2c. Throws InvalidInput on non-finite data.
KSpace fft2c(const ComplexImage& img);
ComplexImage ifft2c(const KSpace& k);

// F_m = M F: k-space of img at sampled columns, exactly zero elsewhere.
KSpace forward_masked(const ComplexImage& img, const SamplingMask& mask);

// F_m^H = F^H M^H. Applied to measured k-space this is the zero-filled image.
ComplexImage adjoint_masked(const KSpace& k, const SamplingMask& mask);

// Zeroes unsampled columns in place.
void apply_mask(KSpace& k, const SamplingMask& mask);

// Complex inner product <a, b> = sum conj(a) * b.
cplx inner(std::span<const cplx> a, std::span<const cplx> b);
double norm2(std::span<const cplx> a);

}  // namespace alignrecon

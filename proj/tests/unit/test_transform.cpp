#include <doctest.h>

#include "alignrecon/sampling.hpp"
#include "alignrecon/transform.hpp"
#include "helpers.hpp"

using namespace alignrecon;
using namespace testutil;

namespace {

// Direct O(N^4) centered orthonormal DFT: index u runs over bins with DC at
// floor(N/2), so frequency (u - N/2) pairs with pixel (x - N/2).
KSpace naive_dft(const ComplexImage& img) {
  const long h = static_cast<long>(img.height()), w = static_cast<long>(img.width());
  KSpace out(img.shape());
  const double norm = 1.0 / std::sqrt(static_cast<double>(h * w));
  for (long u = 0; u < h; ++u)
    for (long v = 0; v < w; ++v) {
      cplx acc{};
      for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
          const double phase = -2.0 * M_PI *
                               (static_cast<double>((u - h / 2) * (y - h / 2)) / static_cast<double>(h) +
                                static_cast<double>((v - w / 2) * (x - w / 2)) / static_cast<double>(w));
          acc += img(y, x) * cplx(std::cos(phase), std::sin(phase));
        }
      out(u, v) = acc * norm;
    }
  return out;
}

SamplingMask single_column(Shape s, std::size_t col) {
  std::vector<std::uint8_t> cols(s.width, 0);
  cols[col] = 1;
  return SamplingMask(s.height, cols);
}

}  // namespace

TEST_SUITE("transform") {
  TEST_CASE("constant 8x8 image has a single centered bin of 8") {
    const KSpace k = fft2c(ComplexImage(8, 8, {1.0, 0.0}));
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 8; ++c) {
        const double expect = (r == 4 && c == 4) ? 8.0 : 0.0;
        CHECK(std::abs(k(r, c) - cplx(expect, 0.0)) < 1e-12);
      }
  }

  TEST_CASE("center delta inverts to all ones") {
    KSpace k(8, 8);
    k(4, 4) = 8.0;
    const ComplexImage img = ifft2c(k);
    for (const auto& v : img.data()) CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-12);
  }

  TEST_CASE("matches a direct DFT on even and odd sizes") {
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{16, 16}, {9, 12}, {11, 13}}) {
      const ComplexImage img = random_image(h, w, h * 31 + w);
      CHECK(max_abs_diff(fft2c(img).data(), naive_dft(img).data()) < 1e-10);
    }
  }

  TEST_CASE("Parseval and round trip") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const ComplexImage img = random_image(32, 24, s);
      const KSpace k = fft2c(img);
      CHECK(std::abs(l2(k.data()) - l2(img.data())) < 1e-10 * l2(img.data()));
      CHECK(max_abs_diff(ifft2c(k).data(), img.data()) < 1e-10 * l2(img.data()));
    }
  }

  TEST_CASE("linearity of the inverse") {
    const KSpace k1 = random_kspace(16, 16, 1), k2 = random_kspace(16, 16, 2);
    const cplx a(0.7, -1.3);
    KSpace mix(k1.shape());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * k1[i] + k2[i];
    const ComplexImage lhs = ifft2c(mix);
    const ComplexImage i1 = ifft2c(k1), i2 = ifft2c(k2);
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(std::abs(lhs[i] - (a * i1[i] + i2[i])) < 1e-10);
  }

  TEST_CASE("non-finite input is rejected") {
    ComplexImage img(8, 8);
    img(2, 3) = {std::nan(""), 0.0};
    CHECK_THROWS_AS(fft2c(img), InvalidInput);
    KSpace k(8, 8);
    k(0, 0) = {0.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(ifft2c(k), InvalidInput);
  }

  TEST_CASE("grids below 8x8 are rejected") {
    CHECK_THROWS_AS(ComplexImage(7, 8), DimensionError);
    CHECK_THROWS_AS(KSpace(8, 4), DimensionError);
  }

  TEST_CASE("full mask equals the plain transform") {
    const ComplexImage img = random_image(16, 16, 5);
    const SamplingMask full = SamplingMask::full(img.shape());
    CHECK(forward_masked(img, full) == fft2c(img));
    const KSpace k = random_kspace(16, 16, 6);
    CHECK(adjoint_masked(k, full) == ifft2c(k));
  }

  TEST_CASE("single-column mask leaves exactly one nonzero column") {
    const ComplexImage img = random_image(16, 16, 7);
    const KSpace k = forward_masked(img, single_column(img.shape(), 5));
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c) {
        if (c == 5)
          CHECK(k(r, c) != cplx{});
        else
          CHECK(k(r, c) == cplx{});
      }
  }

  TEST_CASE("zero k-space maps to the zero image") {
    const SamplingMask m = equispaced_mask({16, 4.0, 0.32, 0}, 16);
    const auto computed = adjoint_masked(KSpace(16, 16), m);
    for (const auto& v : computed.data()) CHECK(v == cplx{});
  }

  TEST_CASE("masked adjoint identity on random instances") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const SamplingMask m = random_mask({16, 4.0, 0.32, s}, 16);
      const ComplexImage x = random_image(16, 16, 100 + s);
      const KSpace y = random_kspace(16, 16, 200 + s);
      const cplx lhs = inner(forward_masked(x, m).data(), y.data());
      const cplx rhs = inner(x.data(), adjoint_masked(y, m).data());
      CHECK(std::abs(lhs - rhs) <= 1e-10 * l2(x.data()) * l2(y.data()));
    }
  }

  TEST_CASE("masking is idempotent at sampled bins") {
    const SamplingMask m = equispaced_mask({16, 4.0, 0.32, 0}, 16);
    const KSpace k = random_kspace(16, 16, 9);
    const KSpace once = forward_masked(adjoint_masked(k, m), m);
    const KSpace twice = forward_masked(adjoint_masked(once, m), m);
    CHECK(max_abs_diff(once.data(), twice.data()) < 1e-12);
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c)
        if (m.sampled(c)) CHECK(std::abs(once(r, c) - k(r, c)) < 1e-12);
  }

  TEST_CASE("shape mismatch is a dimension error") {
    const SamplingMask m = SamplingMask::full({16, 16});
    CHECK_THROWS_AS(forward_masked(ComplexImage(16, 12), m), DimensionError);
    CHECK_THROWS_AS(adjoint_masked(KSpace(12, 16), m), DimensionError);
  }
}

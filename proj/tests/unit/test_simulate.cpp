#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "alignrecon/sampling.hpp"
#include "alignrecon/simulate.hpp"
#include "alignrecon/transform.hpp"
#include "alignrecon/warp.hpp"
#include "helpers.hpp"

using namespace alignrecon;
using namespace testutil;

namespace {

double correlation(const RealImage& a, const RealImage& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("phantom pairs are deterministic and share geometry") {
    const PhantomPair a = phantom_pair(64, 7), b = phantom_pair(64, 7);
    CHECK(a.target == b.target);
    CHECK(a.reference == b.reference);
    CHECK(a.labels == b.labels);
    CHECK_FALSE(phantom_pair(64, 8).target == a.target);
  }

  TEST_CASE("phantom contents") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const PhantomPair p = phantom_pair(128, s);
      std::set<int> labels(p.labels.data().begin(), p.labels.data().end());
      CHECK(labels.count(0) == 1);
      CHECK(labels.count(1) == 1);
      CHECK(labels.size() >= 3);
      CHECK(labels.size() <= 17);
      double tmax = 0.0, rmax = 0.0;
      for (std::size_t i = 0; i < p.target.size(); ++i) {
        CHECK(p.target[i].imag() == 0.0);
        CHECK(p.target[i].real() >= 0.0);
        CHECK(p.reference[i].real() >= 0.0);
        tmax = std::max(tmax, p.target[i].real());
        rmax = std::max(rmax, p.reference[i].real());
      }
      CHECK(tmax == doctest::Approx(1.0));
      CHECK(rmax == doctest::Approx(1.0));
      // Piecewise constant on the shared labels: one value per label in each contrast.
      std::map<int, double> tv, rv;
      bool constant = true;
      for (std::size_t i = 0; i < p.labels.size(); ++i) {
        const int l = p.labels[i];
        if (tv.count(l) && (tv[l] != p.target[i].real() || rv[l] != p.reference[i].real())) constant = false;
        tv[l] = p.target[i].real();
        rv[l] = p.reference[i].real();
      }
      CHECK(constant);
      CHECK(correlation(p.target.real(), p.reference.real()) < 0.999);
    }
    CHECK_THROWS_AS(phantom_pair(32, 0), DimensionError);
  }

  TEST_CASE("noiseless acquisition is the masked transform") {
    const PhantomPair p = phantom_pair(64, 1);
    const SamplingMask m = equispaced_mask({64, 4.0, 0.32, 0}, 64);
    CHECK(acquire(p.target, m, 0.0, 5) == forward_masked(p.target, m));
  }

  TEST_CASE("noise statistics and support") {
    const ComplexImage zero(100, 100);
    const SamplingMask full = SamplingMask::full(zero.shape());
    const double sigma = 0.5;
    const KSpace k = acquire(zero, full, sigma, 11);
    double s2 = 0.0, mean = 0.0;
    for (const auto& v : k.data()) mean += v.real();
    mean /= static_cast<double>(k.size());
    for (const auto& v : k.data()) s2 += (v.real() - mean) * (v.real() - mean);
    const double sd = std::sqrt(s2 / static_cast<double>(k.size() - 1));
    CHECK(std::abs(sd - sigma) < 0.05 * sigma);
    CHECK(acquire(zero, full, sigma, 11) == k);

    const SamplingMask m = random_mask({100, 4.0, 0.32, 3}, 100);
    const KSpace km = acquire(zero, m, sigma, 12);
    for (std::size_t r = 0; r < 100; ++r)
      for (std::size_t c = 0; c < 100; ++c)
        if (!m.sampled(c)) CHECK(km(r, c) == cplx{});
    CHECK_THROWS_AS(acquire(zero, m, -1.0, 0), InvalidParameter);
  }

  TEST_CASE("zero sigma misalignment is the identity") {
    const PhantomPair p = phantom_pair(64, 2);
    const Misaligned m = misalign(p.reference, {0.0, 9});
    CHECK(m.image == p.reference);
    CHECK(max_abs_component(m.field) == 0.0);
  }

  TEST_CASE("field magnitude bound over 100 seeds") {
    const std::size_t n = 64;
    const double nd = static_cast<double>(n);
    for (double sigma : {0.5, 1.0, 2.0}) {
      const double bound = 0.05 * nd * sigma + 0.02 * nd * sigma + nd / std::sqrt(2.0) * 0.01 * M_PI * sigma;
      double worst = 0.0;
      for (std::uint64_t s = 0; s < 100; ++s) {
        const MisalignParams prm = draw_misalignment({sigma, s}, n);
        CHECK(std::abs(prm.theta) <= 0.01 * M_PI * sigma);
        CHECK(std::abs(prm.translation[0]) <= 0.05 * nd * sigma);
        CHECK(std::abs(prm.translation[1]) <= 0.05 * nd * sigma);
        for (double v : prm.control.dx.data()) CHECK(std::abs(v) <= 0.02 * nd * sigma);
        const Misaligned m = misalign(ComplexImage(n, n), {sigma, s});
        worst = std::max(worst, max_abs_component(m.field));
      }
      MESSAGE("sigma " << sigma << ": worst " << worst << " bound " << bound);
      CHECK(worst <= bound);
    }
  }

  TEST_CASE("misalignment is seeded") {
    const PhantomPair p = phantom_pair(64, 3);
    const Misaligned a = misalign(p.reference, {1.0, 4}), b = misalign(p.reference, {1.0, 4});
    CHECK(a.image == b.image);
    CHECK(a.field == b.field);
  }

  TEST_CASE("severity grows with sigma") {
    const std::size_t n = 64;
    double prev = -1.0;
    for (double sigma : {0.0, 0.5, 1.0, 2.0}) {
      double total = 0.0;
      for (std::uint64_t s = 0; s < 50; ++s)
        total += mean_endpoint_error(misalign(ComplexImage(n, n), {sigma, s}).field, DisplacementField({n, n}));
      CHECK(total / 50.0 >= prev);
      prev = total / 50.0;
    }
  }
}

#include <doctest.h>

#include <cmath>

#include "alignrecon/metrics.hpp"
#include "alignrecon/pipeline.hpp"
#include "alignrecon/sampling.hpp"
#include "alignrecon/simulate.hpp"
#include "alignrecon/solver.hpp"
#include "alignrecon/transform.hpp"
#include "alignrecon/warp.hpp"
#include "helpers.hpp"

using namespace alignrecon;
using namespace testutil;

namespace {

struct DcCase {
  ComplexImage z, s;
  KSpace k;
  SamplingMask mask;
};

DcCase random_case(std::uint64_t seed) {
  return {random_image(16, 16, 3 * seed), random_image(16, 16, 3 * seed + 1), random_kspace(16, 16, 3 * seed + 2),
          random_mask({16, 4.0, 0.32, seed}, 16)};
}

// The closed form with the diagonal printed without the mask term.
ComplexImage printed_form(const DcCase& c, double b1, double b2) {
  const KSpace fz = fft2c(c.z), fs = fft2c(c.s);
  KSpace num(c.k.shape());
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t col = 0; col < 16; ++col) {
      const double m = c.mask.sampled(col) ? 1.0 : 0.0;
      num(r, col) = (m * c.k(r, col) + b1 * fz(r, col) + b2 * fs(r, col)) / (b1 + b2);
    }
  return ifft2c(num);
}

DisplacementField constant_field(Shape s, double dx, double dy) {
  DisplacementField f(s);
  for (auto& v : f.dx.data()) v = dx;
  for (auto& v : f.dy.data()) v = dy;
  return f;
}

Smoothing alignment_level(const ComplexImage& ref, const ComplexImage& x0) {
  const Smoothing sm = resolve_smoothing(SolverConfig{}, ref, x0);
  return {sm.align_eps, sm.delta, sm.align_eps};
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("closed-form data consistency agrees with conjugate gradients") {
    int n = 0;
    for (double beta : {0.1, 1.0, 10.0})
      for (std::uint64_t s = 0; s < 7; ++s, ++n) {
        const DcCase c = random_case(100 * n + s);
        const double b2 = beta * (s % 2 ? 2.0 : 0.5);
        const ComplexImage x = data_consistency(c.z, c.s, c.k, c.mask, beta, b2);
        const CgResult cg = dc_oracle_cg(c.z, c.s, c.k, c.mask, beta, b2, 1e-12);
        CHECK(max_abs_diff(x.data(), cg.x.data()) < 1e-8);
        CHECK(cg.iterations <= 2);
        // The diagonal without the mask term is not the minimizer.
        CHECK(max_abs_diff(printed_form(c, beta, b2).data(), cg.x.data()) > 1e-3);
      }
  }

  TEST_CASE("closed form is the minimizer of its objective") {
    const DcCase c = random_case(1);
    const ComplexImage x = data_consistency(c.z, c.s, c.k, c.mask, 0.7, 1.3);
    const double best = dc_objective(x, c.z, c.s, c.k, c.mask, 0.7, 1.3);
    for (std::uint64_t t = 0; t < 5; ++t) {
      ComplexImage y = x;
      const ComplexImage d = random_image(16, 16, 50 + t);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += 1e-3 * d[i];
      CHECK(dc_objective(y, c.z, c.s, c.k, c.mask, 0.7, 1.3) > best);
    }
  }

  TEST_CASE("data consistency: consistent inputs and unsampled bins") {
    const ComplexImage gt = random_image(16, 16, 2);
    const SamplingMask full = SamplingMask::full(gt.shape());
    CHECK(max_abs_diff(data_consistency(gt, gt, fft2c(gt), full, 1.0, 1.0).data(), gt.data()) < 1e-10);

    const SamplingMask m = equispaced_mask({16, 4.0, 0.32, 0}, 16);
    const ComplexImage zero(16, 16);
    const KSpace fx = fft2c(data_consistency(zero, zero, forward_masked(gt, m), m, 1.0, 1.0));
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t col = 0; col < 16; ++col)
        if (!m.sampled(col)) CHECK(std::abs(fx(r, col)) < 1e-12);
    CHECK_THROWS_AS(data_consistency(zero, zero, KSpace(16, 16), m, 0.0, 0.0), InvalidParameter);
  }

  TEST_CASE("CG with vanishing penalties recovers the inverse transform") {
    const KSpace k = random_kspace(16, 16, 3);
    const ComplexImage zero(16, 16);
    const CgResult cg = dc_oracle_cg(zero, zero, k, SamplingMask::full(k.shape()), 1e-6, 1e-6, 1e-12);
    CHECK(max_abs_diff(cg.x.data(), ifft2c(k).data()) < 1e-4);
  }

  TEST_CASE("large penalties average z and s") {
    const DcCase c = random_case(4);
    const ComplexImage x = data_consistency(c.z, c.s, c.k, c.mask, 1e3, 1e3);
    ComplexImage avg(c.z.shape());
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = 0.5 * (c.z[i] + c.s[i]);
    CHECK(l2(ComplexImage(x).data()) > 0.0);
    double diff = 0.0;
    for (std::size_t i = 0; i < avg.size(); ++i) diff += std::norm(x[i] - avg[i]);
    // Deviation is O(1/beta) relative to the data.
    CHECK(std::sqrt(diff) < 2e-3 * (l2(c.k.data()) + l2(c.z.data()) + l2(c.s.data())));
  }

  TEST_CASE("zero-filled image") {
    const ComplexImage gt = random_image(16, 16, 5);
    const SamplingMask full = SamplingMask::full(gt.shape());
    CHECK(max_abs_diff(zero_filled(fft2c(gt), full).data(), gt.data()) < 1e-12);
    const auto computed = zero_filled(KSpace(16, 16), full);
    for (const auto& v : computed.data()) CHECK(v == cplx{});
  }

  TEST_CASE("align step leaves phi alone for a constant image") {
    const PhantomPair p = phantom_pair(64, 1);
    const ComplexImage flat(64, 64, {0.5, 0.0});
    const DisplacementField phi = constant_field(flat.shape(), 0.3, -0.2);
    const AlignStepResult res = align_step(flat, p.reference, phi, SolverConfig{}, alignment_level(p.reference, flat));
    CHECK(res.phi == phi);
  }

  TEST_CASE("aligned phantom pair barely moves") {
    const PhantomPair p = phantom_pair(128, 2);
    const ComplexImage x = ComplexImage::from_real(p.target.magnitude());
    const ComplexImage ref = ComplexImage::from_real(p.reference.magnitude());
    const AlignStepResult res =
        align_step(x, ref, DisplacementField(x.shape()), SolverConfig{}, alignment_level(ref, x));
    MESSAGE("max change " << max_abs_component(res.phi));
    CHECK(max_abs_component(res.phi) < 1e-3);
    CHECK(res.objective_after <= res.objective_before);
  }

  TEST_CASE("2 px translation: objective decreases over 10 steps") {
    const PhantomPair p = phantom_pair(128, 3);
    const ComplexImage x = ComplexImage::from_real(p.target.magnitude());
    const ComplexImage ref = ComplexImage::from_real(
        warp(p.reference.magnitude(), constant_field(x.shape(), 2.0, 0.0)));
    const Smoothing level = alignment_level(ref, x);
    SolverConfig cfg;
    DisplacementField phi(x.shape());
    const double start = align_objective(x, ref, phi, level.eps, level.delta);
    double prev = start;
    for (int k = 0; k < 10; ++k) {
      const AlignStepResult res = align_step(x, ref, phi, cfg, level);
      CHECK(res.objective_before == doctest::Approx(prev).epsilon(1e-12));
      CHECK(res.objective_after <= res.objective_before);
      prev = res.objective_after;
      phi = res.phi;
    }
    MESSAGE("objective " << start << " -> " << prev);
    CHECK(prev < start);
  }

  TEST_CASE("translation search finds a known integer shift") {
    const PhantomPair p = phantom_pair(128, 4);
    const ComplexImage x = ComplexImage::from_real(p.target.magnitude());
    // Shifted reference: shifted(q) = ref(q + (3, -2)); aligning needs phi = (-3, 2).
    const ComplexImage shifted = ComplexImage::from_real(
        warp(p.reference.magnitude(), constant_field(x.shape(), 3.0, -2.0)));
    const auto found = search_translation(x, shifted, 6, alignment_level(shifted, x));
    CHECK(found[0] == -3);
    CHECK(found[1] == 2);

    const ComplexImage ref = ComplexImage::from_real(p.reference.magnitude());
    const auto none = search_translation(x, ref, 6, alignment_level(ref, x));
    CHECK(none[0] == 0);
    CHECK(none[1] == 0);

    const LocalSearch local = search_local_shifts(x, ref, {0, 0}, 2, alignment_level(ref, x));
    const double epe = mean_endpoint_error(local.field, DisplacementField(x.shape()));
    MESSAGE("local search mean shift " << epe);
    CHECK(epe < 0.1);
  }

  TEST_CASE("zero stages return the zero-filled image") {
    const ExperimentInputs in = prepare_experiment({64, MaskPattern::Equispaced, 4.0, 0.32, 0.01, 0.0, 1});
    SolverConfig cfg;
    cfg.stages = 0;
    const Reconstruction r = reconstruct(in.ktilde, in.mask, in.reference.image, cfg);
    CHECK(r.x == zero_filled(in.ktilde, in.mask));
    CHECK(r.phi == DisplacementField(r.x.shape()));
    CHECK(r.trace.stages.empty());
  }

  TEST_CASE("full mask without regularization reproduces the data") {
    const PhantomPair p = phantom_pair(64, 5);
    const SamplingMask full = SamplingMask::full(p.target.shape());
    const KSpace k = acquire(p.target, full, 0.0, 0);
    SolverConfig cfg;
    cfg.lambda = 0.0;
    cfg.eta = 0.0;
    cfg.align_substeps = 0;
    const Reconstruction r = reconstruct(k, full, p.reference, cfg, p.target);
    REQUIRE(r.trace.stages.size() == 12);
    CHECK(r.trace.stages[0].data_fidelity <= 1e-6);
    CHECK(*r.trace.stages.back().psnr >= psnr(p.target.magnitude(), zero_filled(k, full).magnitude(), 1.0) - 1e-6);
  }

  TEST_CASE("lambda 0 without alignment is single-modal HQS-TV bit for bit") {
    const ExperimentInputs in = prepare_experiment({64, MaskPattern::Equispaced, 4.0, 0.32, 0.01, 0.0, 2});
    SolverConfig cfg;
    cfg.stages = 4;
    cfg.lambda = 0.0;
    cfg.align_substeps = 0;
    const Reconstruction a = reconstruct(in.ktilde, in.mask, in.reference.image, cfg);
    const Reconstruction b = reconstruct_single_modal(in.ktilde, in.mask, cfg);
    CHECK(a.x == b.x);
  }

  TEST_CASE("deterministic and descent invariants hold") {
    const ExperimentInputs in = prepare_experiment({64, MaskPattern::Equispaced, 4.0, 0.32, 0.01, 1.0, 3});
    SolverConfig cfg;
    cfg.stages = 4;
    cfg.align_substeps = 2;
    const Reconstruction a = reconstruct(in.ktilde, in.mask, in.reference.image, cfg, in.phantom.target);
    const Reconstruction b = reconstruct(in.ktilde, in.mask, in.reference.image, cfg, in.phantom.target);
    CHECK(a.x == b.x);
    CHECK(a.phi == b.phi);
    for (const StageRecord& s : a.trace.stages) {
      CHECK(std::isfinite(s.data_fidelity));
      CHECK(s.z_objective <= s.z_objective_at_input);
      CHECK(s.s_objective <= s.s_objective_at_input);
      CHECK(s.x_objective <= s.x_objective_at_input);
      for (std::size_t k = 1; k < s.align_objective.size(); ++k)
        CHECK(s.align_objective[k] <= s.align_objective[k - 1]);
    }
  }

  TEST_CASE("invalid configurations") {
    SolverConfig cfg;
    cfg.beta1 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg = {};
    cfg.stages = -1;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg = {};
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg = {};
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg = {};
    cfg.align_tol = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  }

  TEST_CASE("default configuration gains at least 3 dB over zero filling") {
    double gain = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const ExperimentInputs in = prepare_experiment({128, MaskPattern::Equispaced, 4.0, 0.32, 0.01, 0.0, seed});
      gain += run_variant(in, SolverConfig{}, Variant::MultiAlign).metrics.psnr -
              run_variant(in, SolverConfig{}, Variant::ZeroFilled).metrics.psnr;
    }
    gain /= 3.0;
    MESSAGE("mean gain " << gain << " dB");
    CHECK(gain >= 3.0);
  }
}

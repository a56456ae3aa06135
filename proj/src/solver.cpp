#include "alignrecon/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alignrecon/metrics.hpp"
#include "alignrecon/prox.hpp"
#include "alignrecon/transform.hpp"
#include "alignrecon/warp.hpp"

namespace alignrecon {

namespace {

constexpr int kMaxHalvings = 20;
constexpr double kArmijo = 1e-4;
constexpr double kEdgeEpsFraction = 0.05;
constexpr double kAlignEpsFraction = 0.3;
// Relative cost increase of a node shift at the full local radius.
constexpr double kLocalPenalty = 0.2;

void require_beta(double beta1, double beta2) {
  if (!(beta1 + beta2 > 0.0) || !std::isfinite(beta1 + beta2))
    throw InvalidParameter("beta1 + beta2 must be > 0");
}

double half_sq_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
  return 0.5 * acc;
}

ComplexImage magnitude_image(const ComplexImage& x) { return ComplexImage::from_real(x.magnitude()); }

// (F_m^H F_m + (b1 + b2) I) x
ComplexImage normal_operator(const ComplexImage& x, const SamplingMask& mask, double beta) {
  ComplexImage out = adjoint_masked(forward_masked(x, mask), mask);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += beta * x[i];
  return out;
}

std::optional<double> stage_psnr(const ComplexImage& x, const std::optional<ComplexImage>& gt) {
  if (!gt) return std::nullopt;
  return evaluate(x, *gt).psnr;
}

struct StageInputs {
  const KSpace& ktilde;
  const SamplingMask& mask;
  const SolverConfig& cfg;
};

// z, s and x updates shared by the multi-modal and single-modal loops.
ComplexImage reconstruction_update(const ComplexImage& x, const ComplexImage& z, const StageInputs& in,
                                   StageRecord& rec) {
  const auto& cfg = in.cfg;
  const ProxConfig s_cfg{cfg.eta / cfg.beta2, cfg.prox_inner};
  ComplexImage s = prox_tv(x, s_cfg);
  rec.s_objective_at_input = prox_tv_objective(x, x, s_cfg.weight);
  rec.s_objective = prox_tv_objective(x, s, s_cfg.weight);

  ComplexImage next = data_consistency(z, s, in.ktilde, in.mask, cfg.beta1, cfg.beta2);
  rec.x_objective_at_input = dc_objective(x, z, s, in.ktilde, in.mask, cfg.beta1, cfg.beta2);
  rec.x_objective = dc_objective(next, z, s, in.ktilde, in.mask, cfg.beta1, cfg.beta2);
  rec.data_fidelity = data_fidelity(next, in.ktilde, in.mask);
  rec.tv = tv_value(next);
  return next;
}

}  // namespace

void SolverConfig::validate() const {
  if (stages < 0) throw InvalidParameter("stages must be >= 0");
  if (!(alpha > 0.0)) throw InvalidParameter("alpha must be > 0");
  if (!(lambda >= 0.0) || !(eta >= 0.0)) throw InvalidParameter("lambda and eta must be >= 0");
  if (!(beta1 > 0.0) || !(beta2 > 0.0)) throw InvalidParameter("beta1 and beta2 must be > 0");
  if (prox_inner < 1) throw InvalidParameter("prox_inner must be >= 1");
  if (align_substeps < 0) throw InvalidParameter("align_substeps must be >= 0");
  if (!(smooth_sigma >= 0.0)) throw InvalidParameter("smooth_sigma must be >= 0");
  if (align_start < 0) throw InvalidParameter("align_start must be >= 0");
  if (align_search < 0 || align_search_local < 0) throw InvalidParameter("align search radii must be >= 0");
  if (!(align_tol >= 0.0) || !(align_tol < 1.0)) throw InvalidParameter("align_tol must be in [0, 1)");
  for (double v : {alpha, lambda, eta, beta1, beta2, smooth_sigma, align_tol, eps, delta, align_eps})
    if (!std::isfinite(v)) throw InvalidParameter("solver parameters must be finite");
}

Smoothing resolve_smoothing(const SolverConfig& cfg, const ComplexImage& x_ref, const ComplexImage& x0) {
  Smoothing s;
  const RealImage mag = x_ref.magnitude();
  const double gmax = max_gradient_magnitude(mag, EdgeStencil::Forward);
  const double gmax_align = max_gradient_magnitude(mag, EdgeStencil::Central);
  // A flat reference gives xi = 0 for any positive scale.
  s.eps = cfg.eps > 0.0 ? cfg.eps : (gmax > 0.0 ? kEdgeEpsFraction * gmax : 1e-3);
  s.align_eps = cfg.align_eps > 0.0 ? cfg.align_eps : (gmax_align > 0.0 ? kAlignEpsFraction * gmax_align : 1e-3);
  if (cfg.delta > 0.0) {
    s.delta = cfg.delta;
  } else {
    const auto mag = x0.magnitude();
    const double range = mag.empty() ? 0.0 : *std::max_element(mag.data().begin(), mag.data().end());
    s.delta = range > 0.0 ? 1e-3 * range : 1e-6;
  }
  return s;
}

ComplexImage zero_filled(const KSpace& ktilde, const SamplingMask& mask) { return adjoint_masked(ktilde, mask); }

ComplexImage data_consistency(const ComplexImage& z, const ComplexImage& s, const KSpace& ktilde,
                              const SamplingMask& mask, double beta1, double beta2) {
  require_beta(beta1, beta2);
  require_same_shape(z.shape(), s.shape(), "data_consistency");
  require_same_shape(z.shape(), ktilde.shape(), "data_consistency");
  require_same_shape(z.shape(), mask.shape(), "data_consistency");
  const KSpace fz = fft2c(z), fs = fft2c(s);
  KSpace num(z.shape());
  for (std::size_t r = 0; r < num.height(); ++r)
    for (std::size_t c = 0; c < num.width(); ++c) {
      const double m = mask.sampled(c) ? 1.0 : 0.0;
      const cplx measured = mask.sampled(c) ? ktilde(r, c) : cplx{};
      num(r, c) = (measured + beta1 * fz(r, c) + beta2 * fs(r, c)) / (m + beta1 + beta2);
    }
  return ifft2c(num);
}

CgResult dc_oracle_cg(const ComplexImage& z, const ComplexImage& s, const KSpace& ktilde, const SamplingMask& mask,
                      double beta1, double beta2, double tol, int max_iters) {
  require_beta(beta1, beta2);
  if (!(tol > 0.0)) throw InvalidParameter("dc_oracle_cg tol must be > 0");
  require_same_shape(z.shape(), s.shape(), "dc_oracle_cg");
  require_same_shape(z.shape(), ktilde.shape(), "dc_oracle_cg");
  const double beta = beta1 + beta2;

  ComplexImage b = adjoint_masked(ktilde, mask);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += beta1 * z[i] + beta2 * s[i];
  const double b_norm = norm2(b.data());

  CgResult res{ComplexImage(z.shape()), 0, 0.0};
  if (b_norm == 0.0) return res;
  ComplexImage r = b, p = b;
  double rr = std::real(inner(r.data(), r.data()));
  while (std::sqrt(rr) / b_norm > tol) {
    if (res.iterations >= max_iters)
      throw NumericalError("conjugate gradient did not converge in " + std::to_string(max_iters) +
                           " iterations (relative residual " + std::to_string(std::sqrt(rr) / b_norm) + ")");
    const ComplexImage ap = normal_operator(p, mask, beta);
    const double a = rr / std::real(inner(p.data(), ap.data()));
    for (std::size_t i = 0; i < r.size(); ++i) {
      res.x[i] += a * p[i];
      r[i] -= a * ap[i];
    }
    const double rr_next = std::real(inner(r.data(), r.data()));
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + (rr_next / rr) * p[i];
    rr = rr_next;
    ++res.iterations;
  }
  // Report the true residual rather than the recursively updated one.
  const ComplexImage ax = normal_operator(res.x, mask, beta);
  double acc = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) acc += std::norm(b[i] - ax[i]);
  res.relative_residual = std::sqrt(acc) / b_norm;
  return res;
}

double data_fidelity(const ComplexImage& x, const KSpace& ktilde, const SamplingMask& mask) {
  const KSpace fx = forward_masked(x, mask);
  KSpace measured = ktilde;
  apply_mask(measured, mask);
  return half_sq_diff(fx.data(), measured.data());
}

double dc_objective(const ComplexImage& x, const ComplexImage& z, const ComplexImage& s, const KSpace& ktilde,
                    const SamplingMask& mask, double beta1, double beta2) {
  return data_fidelity(x, ktilde, mask) + beta1 * half_sq_diff(x.data(), z.data()) +
         beta2 * half_sq_diff(x.data(), s.data());
}

AlignStepResult align_step(const ComplexImage& x, const ComplexImage& x_ref, const DisplacementField& phi,
                           const SolverConfig& cfg, Smoothing smoothing) {
  AlignStepResult res{phi, 0.0, 0.0, 0.0};
  res.objective_before = align_objective(x, x_ref, phi, smoothing.eps, smoothing.delta);
  res.objective_after = res.objective_before;
  const DisplacementField raw = align_grad_phi(x, x_ref, phi, smoothing.eps, smoothing.delta);
  const DisplacementField grad = gaussian_smooth(raw, cfg.smooth_sigma);
  if (max_abs_component(grad) == 0.0) return res;

  double slope = 0.0;  // <raw gradient, step direction>
  for (std::size_t i = 0; i < raw.dx.size(); ++i) slope += raw.dx[i] * grad.dx[i] + raw.dy[i] * grad.dy[i];
  slope = std::max(slope, 0.0);

  double alpha = cfg.alpha;
  for (int halving = 0; halving <= kMaxHalvings; ++halving, alpha *= 0.5) {
    DisplacementField trial = phi;
    for (std::size_t i = 0; i < trial.dx.size(); ++i) {
      trial.dx[i] -= alpha * grad.dx[i];
      trial.dy[i] -= alpha * grad.dy[i];
    }
    const double obj = align_objective(x, x_ref, trial, smoothing.eps, smoothing.delta);
    const double required = std::max(kArmijo * alpha * slope, cfg.align_tol * res.objective_before);
    if (obj <= res.objective_before - required) {
      res.phi = std::move(trial);
      res.alpha_used = alpha;
      res.objective_after = obj;
      return res;
    }
  }
  return res;
}

std::array<int, 2> search_translation(const ComplexImage& x, const ComplexImage& x_ref, int radius,
                                      Smoothing smoothing) {
  if (radius < 0) throw InvalidParameter("search radius must be >= 0");
  DisplacementField shift(x.shape());
  auto cost = [&](int dx, int dy) {
    std::fill(shift.dx.data().begin(), shift.dx.data().end(), static_cast<double>(dx));
    std::fill(shift.dy.data().begin(), shift.dy.data().end(), static_cast<double>(dy));
    return align_objective(x, x_ref, shift, smoothing.eps, smoothing.delta);
  };
  std::array<int, 2> best{0, 0};
  double best_cost = cost(0, 0);
  auto consider = [&](int dx, int dy) {
    if (std::abs(dx) > radius || std::abs(dy) > radius) return;
    const double c = cost(dx, dy);
    const bool closer = std::abs(dx) + std::abs(dy) < std::abs(best[0]) + std::abs(best[1]);
    if (c < best_cost || (c == best_cost && closer)) {
      best_cost = c;
      best = {dx, dy};
    }
  };
  for (int dy = -radius; dy <= radius; dy += 2)
    for (int dx = -radius; dx <= radius; dx += 2)
      if (dx != 0 || dy != 0) consider(dx, dy);
  const auto coarse = best;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      if (dx != 0 || dy != 0) consider(coarse[0] + dx, coarse[1] + dy);
  return best;
}

LocalSearch search_local_shifts(const ComplexImage& x, const ComplexImage& x_ref, std::array<int, 2> global,
                                int local_radius, Smoothing smoothing) {
  if (local_radius < 0) throw InvalidParameter("local search radius must be >= 0");
  require_same_shape(x.shape(), x_ref.shape(), "search_local_shifts");
  const Shape shape = x.shape();
  LocalSearch res{ControlGrid(), DisplacementField(shape)};
  const std::size_t rows = res.nodes.rows(), cols = res.nodes.cols();
  const long h = static_cast<long>(shape.height), w = static_cast<long>(shape.width);
  const long half_r = std::lround(static_cast<double>(h - 1) / static_cast<double>(rows - 1));
  const long half_c = std::lround(static_cast<double>(w - 1) / static_cast<double>(cols - 1));

  const RealImage ref_mag = x_ref.magnitude();
  std::vector<double> best(rows * cols, std::numeric_limits<double>::infinity());
  std::vector<double> sat((h + 1) * (w + 1));
  DisplacementField shift(shape);
  const double radius = static_cast<double>(std::max(local_radius, 1));

  for (int dy = -local_radius; dy <= local_radius; ++dy) {
    for (int dx = -local_radius; dx <= local_radius; ++dx) {
      const int sx = global[0] + dx, sy = global[1] + dy;
      std::fill(shift.dx.data().begin(), shift.dx.data().end(), static_cast<double>(sx));
      std::fill(shift.dy.data().begin(), shift.dy.data().end(), static_cast<double>(sy));
      const RealGrid cost =
          dtv_cost_map(x, edge_field(warp(RealImage(ref_mag), shift), smoothing.eps, EdgeStencil::Central),
                       smoothing.delta);
      // Summed-area table for window sums.
      for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c)
          sat[(r + 1) * (w + 1) + c + 1] =
              cost(r, c) + sat[r * (w + 1) + c + 1] + sat[(r + 1) * (w + 1) + c] - sat[r * (w + 1) + c];
      const double penalty = 1.0 + kLocalPenalty * std::hypot(dx, dy) / radius;
      // Window sums carry round-off from the table; differences below this count as ties.
      const double tol = 1e-9 * std::abs(sat.back());
      for (std::size_t i = 0; i < rows; ++i) {
        const long cr = std::lround(static_cast<double>(i) * static_cast<double>(h - 1) / static_cast<double>(rows - 1));
        const long r0 = std::max(0L, cr - half_r), r1 = std::min(h, cr + half_r + 1);
        for (std::size_t j = 0; j < cols; ++j) {
          const long cc =
              std::lround(static_cast<double>(j) * static_cast<double>(w - 1) / static_cast<double>(cols - 1));
          const long c0 = std::max(0L, cc - half_c), c1 = std::min(w, cc + half_c + 1);
          const double sum =
              sat[r1 * (w + 1) + c1] - sat[r0 * (w + 1) + c1] - sat[r1 * (w + 1) + c0] + sat[r0 * (w + 1) + c0];
          const double score = sum * penalty;
          const bool at_global = dx == 0 && dy == 0;
          // Strict improvement, except that the global shift wins ties.
          if (score < best[i * cols + j] - tol || (at_global && score <= best[i * cols + j] + tol)) {
            best[i * cols + j] = score;
            res.nodes.dx(i, j) = sx;
            res.nodes.dy(i, j) = sy;
          }
        }
      }
    }
  }
  res.field = upsample_bicubic(res.nodes, shape);
  return res;
}

Reconstruction reconstruct(const KSpace& ktilde, const SamplingMask& mask, const ComplexImage& x_ref,
                           const SolverConfig& cfg, const std::optional<ComplexImage>& ground_truth) {
  cfg.validate();
  require_same_shape(ktilde.shape(), mask.shape(), "reconstruct");
  require_same_shape(ktilde.shape(), x_ref.shape(), "reconstruct");
  if (ground_truth) require_same_shape(ktilde.shape(), ground_truth->shape(), "reconstruct");

  Reconstruction out{zero_filled(ktilde, mask), DisplacementField(ktilde.shape()), {}};
  const Smoothing smoothing = resolve_smoothing(cfg, x_ref, out.x);
  out.trace.smoothing = smoothing;
  const StageInputs in{ktilde, mask, cfg};
  const ComplexImage ref_mag = magnitude_image(x_ref);
  const Smoothing level{smoothing.align_eps, smoothing.delta, smoothing.align_eps};

  for (int t = 0; t < cfg.stages; ++t) {
    StageRecord rec;
    rec.stage = t + 1;
    const ComplexImage& x = out.x;

    if (cfg.align_substeps > 0 && t >= cfg.align_start) {
      const ComplexImage x_mag = magnitude_image(x);
      if (t == cfg.align_start && (cfg.align_search > 0 || cfg.align_search_local > 0)) {
        const auto shift = search_translation(x_mag, ref_mag, cfg.align_search, level);
        if (cfg.align_search_local > 0) {
          out.phi = search_local_shifts(x_mag, ref_mag, shift, cfg.align_search_local, level).field;
        } else {
          std::fill(out.phi.dx.data().begin(), out.phi.dx.data().end(), static_cast<double>(shift[0]));
          std::fill(out.phi.dy.data().begin(), out.phi.dy.data().end(), static_cast<double>(shift[1]));
        }
      }
      for (int j = 0; j < cfg.align_substeps; ++j) {
        AlignStepResult step = align_step(x_mag, ref_mag, out.phi, cfg, level);
        rec.align_objective.push_back(step.objective_before);
        rec.alpha_used = step.alpha_used;
        out.phi = std::move(step.phi);
        if (j + 1 == cfg.align_substeps) rec.align_objective.push_back(step.objective_after);
      }
    }

    const EdgeField xi = edge_field(warp(x_ref, out.phi).magnitude(), smoothing.eps);
    const ProxConfig z_cfg{cfg.lambda / cfg.beta1, cfg.prox_inner};
    const ComplexImage z = prox_dtv(x, xi, z_cfg);
    rec.z_objective_at_input = prox_objective(x, x, xi, z_cfg.weight);
    rec.z_objective = prox_objective(x, z, xi, z_cfg.weight);

    ComplexImage next = reconstruction_update(x, z, in, rec);
    rec.psi = dtv_value(next, xi);
    rec.psnr = stage_psnr(next, ground_truth);
    out.x = std::move(next);
    out.trace.stages.push_back(std::move(rec));
  }
  return out;
}

Reconstruction reconstruct_single_modal(const KSpace& ktilde, const SamplingMask& mask, const SolverConfig& cfg,
                                        const std::optional<ComplexImage>& ground_truth) {
  cfg.validate();
  require_same_shape(ktilde.shape(), mask.shape(), "reconstruct_single_modal");
  if (ground_truth) require_same_shape(ktilde.shape(), ground_truth->shape(), "reconstruct_single_modal");

  Reconstruction out{zero_filled(ktilde, mask), DisplacementField(ktilde.shape()), {}};
  const StageInputs in{ktilde, mask, cfg};
  for (int t = 0; t < cfg.stages; ++t) {
    StageRecord rec;
    rec.stage = t + 1;
    const ComplexImage z = out.x;
    ComplexImage next = reconstruction_update(out.x, z, in, rec);
    rec.psnr = stage_psnr(next, ground_truth);
    out.x = std::move(next);
    out.trace.stages.push_back(std::move(rec));
  }
  return out;
}

}  // namespace alignrecon

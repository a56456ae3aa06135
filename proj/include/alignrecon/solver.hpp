#pragma once

#include <array>
#include <optional>
#include <vector>

#include "alignrecon/grid.hpp"
#include "alignrecon/similarity.hpp"
#include "alignrecon/warp.hpp"

namespace alignrecon {

struct SolverConfig {
  int stages = 12;
  double alpha = 1.0;  // displacement step size (absorbs the step/coupling product)
  double lambda = 0.01;
  double eta = 0.005;
  double beta1 = 1.0;
  double beta2 = 1.0;
  int prox_inner = 30;
  int align_substeps = 1;
  double smooth_sigma = 1.0;
  // Alignment starts at this 0-based stage; earlier stages keep phi = 0.
  int align_start = 0;
  // Before the first align step, phi is initialized by search: the constant
  // integer translation within [-align_search, align_search]^2 minimizing the
  // alignment objective, then per control node of a 9x9 lattice the shift
  // within align_search_local of it minimizing the objective over the node's
  // neighbourhood. 0 disables the respective level.
  int align_search = 0;
  int align_search_local = 0;
  // An align step is accepted only if it lowers the objective by at least
  // this fraction of its current value; 0 accepts any decrease.
  double align_tol = 0.0;
  // Non-positive values select data-driven defaults, see resolve_smoothing().
  double eps = 0.0;
  double delta = 0.0;
  double align_eps = 0.0;  // edge scale of the alignment objective

  void validate() const;
};

// eps and delta actually used by a run.
struct Smoothing {
  double eps = 0.0;
  double delta = 0.0;
  double align_eps = 0.0;
};

// eps <= 0  -> 0.05 * max |grad |x_ref|| (forward stencil)
// align_eps <= 0 -> 0.3 * max |grad |x_ref|| (central stencil)
// delta <= 0 -> 1e-3 * max |x0| (intensity range of the initial estimate)
Smoothing resolve_smoothing(const SolverConfig& cfg, const ComplexImage& x_ref, const ComplexImage& x0);

struct StageRecord {
  int stage = 0;
  double data_fidelity = 0.0;  // 0.5 |F_m x - k|^2 at the stage output
  double psi = 0.0;            // dtv of the stage output against the aligned reference
  double tv = 0.0;
  std::optional<double> psnr;
  double alpha_used = 0.0;  // last align substep; 0 when no step was taken

  // Per-stage subproblem objectives, before -> after.
  std::vector<double> align_objective;  // smoothed Psi at phi before each substep and after the last
  double z_objective_at_input = 0.0;
  double z_objective = 0.0;
  double s_objective_at_input = 0.0;
  double s_objective = 0.0;
  double x_objective_at_input = 0.0;
  double x_objective = 0.0;
};

struct SolverTrace {
  std::vector<StageRecord> stages;
  Smoothing smoothing;
};

struct Reconstruction {
  ComplexImage x;
  DisplacementField phi;
  SolverTrace trace;
};

struct AlignStepResult {
  DisplacementField phi;
  double alpha_used = 0.0;
  double objective_before = 0.0;
  double objective_after = 0.0;
};

// x^0 = F^H M^H k.
ComplexImage zero_filled(const KSpace& ktilde, const SamplingMask& mask);

// Exact minimizer of 0.5|F_m x - k|^2 + b1/2 |x - z|^2 + b2/2 |x - s|^2:
// x = F^H [(M k + b1 F z + b2 F s) / (m + b1 + b2)].
ComplexImage data_consistency(const ComplexImage& z, const ComplexImage& s, const KSpace& ktilde,
                              const SamplingMask& mask, double beta1, double beta2);

// The same minimizer by conjugate gradients on the normal equations.
// Throws NumericalError if the relative residual does not reach tol.
struct CgResult {
  ComplexImage x;
  int iterations = 0;
  double relative_residual = 0.0;
};
CgResult dc_oracle_cg(const ComplexImage& z, const ComplexImage& s, const KSpace& ktilde, const SamplingMask& mask,
                      double beta1, double beta2, double tol, int max_iters = 100);

double data_fidelity(const ComplexImage& x, const KSpace& ktilde, const SamplingMask& mask);

// 0.5|F_m x - k|^2 + b1/2 |x - z|^2 + b2/2 |x - s|^2
double dc_objective(const ComplexImage& x, const ComplexImage& z, const ComplexImage& s, const KSpace& ktilde,
                    const SamplingMask& mask, double beta1, double beta2);

// One backtracking gradient step on the displacement field. The gradient is
// Gaussian-smoothed (cfg.smooth_sigma); alpha starts at cfg.alpha and is
// halved up to 20 times until the objective shows sufficient decrease
// (Armijo, c = 1e-4, and at least cfg.align_tol relative), which in particular
// never increases it. If every trial fails, phi is returned unchanged with
// alpha_used = 0.
AlignStepResult align_step(const ComplexImage& x, const ComplexImage& x_ref, const DisplacementField& phi,
                           const SolverConfig& cfg, Smoothing smoothing);

// Constant translation (dx, dy) in [-radius, radius]^2 minimizing the
// alignment objective, searched on a step-2 lattice and refined to 1 px.
// Ties keep the smaller shift, so an aligned pair stays at (0, 0).
std::array<int, 2> search_translation(const ComplexImage& x, const ComplexImage& x_ref, int radius,
                                      Smoothing smoothing);

// Per-node refinement of a global shift. Node (i, j) of the lattice sits at
// the control-grid position; its window extends one lattice spacing each way.
// Each node takes the integer shift within local_radius of `global` that
// minimizes the windowed objective, lightly penalized by distance from
// `global` so featureless windows keep it. Returns the interpolated field.
struct LocalSearch {
  ControlGrid nodes;
  DisplacementField field;
};
LocalSearch search_local_shifts(const ComplexImage& x, const ComplexImage& x_ref, std::array<int, 2> global,
                                int local_radius, Smoothing smoothing);

Reconstruction reconstruct(const KSpace& ktilde, const SamplingMask& mask, const ComplexImage& x_ref,
                           const SolverConfig& cfg, const std::optional<ComplexImage>& ground_truth = std::nullopt);

// HQS-TV without a reference: z = x^t, s = prox_tv(x^t), x = data_consistency(z, s).
Reconstruction reconstruct_single_modal(const KSpace& ktilde, const SamplingMask& mask, const SolverConfig& cfg,
                                        const std::optional<ComplexImage>& ground_truth = std::nullopt);

}  // namespace alignrecon

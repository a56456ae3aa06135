#pragma once

#include <vector>

#include "alignrecon/grid.hpp"
#include "alignrecon/similarity.hpp"

namespace alignrecon {

struct ProxConfig {
  double weight = 0.0;
  int inner_iters = 500;
  double dual_step = 1.0 / 8.0;

  void validate() const;
};

// Optional per-call diagnostics. dual_objective holds 0.5*|v - A^T p|^2 for
// the starting dual point and after every inner iteration, per channel.
struct ProxDiagnostics {
  std::vector<double> dual_objective;
  bool fell_back_to_input = false;
};

// argmin_z 0.5*|v - z|^2 + weight * dtv_value(z, xi), approximated by
// projected gradient on the dual. Never returns a point with a larger
// objective than v itself.
ComplexImage prox_dtv(const ComplexImage& v, const EdgeField& xi, const ProxConfig& cfg,
                      ProxDiagnostics* diag = nullptr);

// argmin_s 0.5*|v - s|^2 + weight * TV(s).
ComplexImage prox_tv(const ComplexImage& v, const ProxConfig& cfg, ProxDiagnostics* diag = nullptr);

// Single real channel; xi == nullptr means isotropic TV.
RealImage prox_dtv_channel(const RealImage& v, const EdgeField* xi, const ProxConfig& cfg,
                           ProxDiagnostics* diag = nullptr);

// 0.5*|v - z|^2 + weight * dtv_value(z, xi)
double prox_objective(const ComplexImage& v, const ComplexImage& z, const EdgeField& xi, double weight);
double prox_tv_objective(const ComplexImage& v, const ComplexImage& s, double weight);

}  // namespace alignrecon

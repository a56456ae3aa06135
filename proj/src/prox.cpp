#include "alignrecon/prox.hpp"

#include <cmath>

namespace alignrecon {

namespace {

double channel_objective(const RealImage& v, const RealImage& z, const EdgeField* xi, double weight) {
  RealGrid gx, gy;
  forward_gradient(z, gx, gy);
  double fit = 0.0, reg = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - z[i];
    fit += d * d;
    double vx = gx[i], vy = gy[i];
    if (xi) {
      const double dot = xi->xi_x[i] * vx + xi->xi_y[i] * vy;
      vx -= xi->xi_x[i] * dot;
      vy -= xi->xi_y[i] * dot;
    }
    reg += std::sqrt(vx * vx + vy * vy);
  }
  return 0.5 * fit + weight * reg;
}

// In-place (I - xi xi^T) on a pair of planes.
void apply_projection(const EdgeField* xi, RealGrid& px, RealGrid& py) {
  if (!xi) return;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double ax = xi->xi_x[i], ay = xi->xi_y[i];
    const double dot = ax * px[i] + ay * py[i];
    px[i] -= ax * dot;
    py[i] -= ay * dot;
  }
}

double half_sq_norm(const RealGrid& u) {
  double acc = 0.0;
  for (double x : u.data()) acc += x * x;
  return 0.5 * acc;
}

ComplexImage combine(const RealImage& re, const RealImage& im) {
  ComplexImage out(re.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cplx(re[i], im[i]);
  return out;
}

}  // namespace

void ProxConfig::validate() const {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw InvalidParameter("prox weight must be >= 0");
  if (inner_iters < 1) throw InvalidParameter("prox inner_iters must be >= 1");
  if (!(dual_step > 0.0 && dual_step <= 1.0 / 8.0)) throw InvalidParameter("prox dual_step must lie in (0, 1/8]");
}

RealImage prox_dtv_channel(const RealImage& v, const EdgeField* xi, const ProxConfig& cfg, ProxDiagnostics* diag) {
  cfg.validate();
  if (xi) require_same_shape(v.shape(), xi->shape(), "prox_dtv");
  if (cfg.weight == 0.0) return v;

  // Dual of min_z 0.5|v - z|^2 + w sum |A z|, A = P D:
  //   min_{|p| <= w} 0.5 |v - A^T p|^2,  z = v - A^T p.
  const Shape shape = v.shape();
  RealGrid px(shape), py(shape), ax(shape), ay(shape), adj(shape);
  RealImage z = v;
  if (diag) diag->dual_objective.push_back(half_sq_norm(z));
  const double w = cfg.weight, tau = cfg.dual_step;
  for (int it = 0; it < cfg.inner_iters; ++it) {
    forward_gradient(z, ax, ay);
    apply_projection(xi, ax, ay);
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double qx = px[i] + tau * ax[i], qy = py[i] + tau * ay[i];
      const double n = std::sqrt(qx * qx + qy * qy);
      const double scale = n > w ? w / n : 1.0;
      px[i] = qx * scale;
      py[i] = qy * scale;
    }
    ax = px;
    ay = py;
    apply_projection(xi, ax, ay);
    forward_gradient_adjoint(ax, ay, adj);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = v[i] - adj[i];
    if (diag) diag->dual_objective.push_back(half_sq_norm(z));
  }

  if (channel_objective(v, z, xi, w) > channel_objective(v, v, xi, w)) {
    if (diag) diag->fell_back_to_input = true;
    return v;
  }
  return z;
}

ComplexImage prox_dtv(const ComplexImage& v, const EdgeField& xi, const ProxConfig& cfg, ProxDiagnostics* diag) {
  require_same_shape(v.shape(), xi.shape(), "prox_dtv");
  cfg.validate();
  if (cfg.weight == 0.0) return v;
  return combine(prox_dtv_channel(v.real(), &xi, cfg, diag), prox_dtv_channel(v.imag(), &xi, cfg, diag));
}

ComplexImage prox_tv(const ComplexImage& v, const ProxConfig& cfg, ProxDiagnostics* diag) {
  cfg.validate();
  if (cfg.weight == 0.0) return v;
  return combine(prox_dtv_channel(v.real(), nullptr, cfg, diag), prox_dtv_channel(v.imag(), nullptr, cfg, diag));
}

double prox_objective(const ComplexImage& v, const ComplexImage& z, const EdgeField& xi, double weight) {
  require_same_shape(v.shape(), z.shape(), "prox_objective");
  return channel_objective(v.real(), z.real(), &xi, weight) + channel_objective(v.imag(), z.imag(), &xi, weight);
}

double prox_tv_objective(const ComplexImage& v, const ComplexImage& s, double weight) {
  require_same_shape(v.shape(), s.shape(), "prox_tv_objective");
  return channel_objective(v.real(), s.real(), nullptr, weight) +
         channel_objective(v.imag(), s.imag(), nullptr, weight);
}

}  // namespace alignrecon

#include "alignrecon/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "alignrecon/warp.hpp"

namespace alignrecon {

namespace {

struct Stencil {
  std::size_t lo, hi;
  double scale;  // derivative = scale * (v[hi] - v[lo])
};

Stencil central_stencil(std::size_t j, std::size_t n) {
  if (j == 0) return {0, 1, 1.0};
  if (j + 1 == n) return {n - 2, n - 1, 1.0};
  return {j - 1, j + 1, 0.5};
}

void central_gradient(const RealGrid& r, RealGrid& nx, RealGrid& ny) {
  const std::size_t h = r.height(), w = r.width();
  nx = RealGrid(r.shape());
  ny = RealGrid(r.shape());
  for (std::size_t i = 0; i < h; ++i) {
    const auto sr = central_stencil(i, h);
    for (std::size_t j = 0; j < w; ++j) {
      const auto sc = central_stencil(j, w);
      nx(i, j) = sc.scale * (r(i, sc.hi) - r(i, sc.lo));
      ny(i, j) = sr.scale * (r(sr.hi, j) - r(sr.lo, j));
    }
  }
}

void central_gradient_adjoint(const RealGrid& gx, const RealGrid& gy, RealGrid& out) {
  const std::size_t h = gx.height(), w = gx.width();
  out = RealGrid(gx.shape());
  for (std::size_t i = 0; i < h; ++i) {
    const auto sr = central_stencil(i, h);
    for (std::size_t j = 0; j < w; ++j) {
      const auto sc = central_stencil(j, w);
      out(i, sc.hi) += sc.scale * gx(i, j);
      out(i, sc.lo) -= sc.scale * gx(i, j);
      out(sr.hi, j) += sr.scale * gy(i, j);
      out(sr.lo, j) -= sr.scale * gy(i, j);
    }
  }
}

void reference_gradient(const RealGrid& r, EdgeStencil stencil, RealGrid& nx, RealGrid& ny) {
  if (stencil == EdgeStencil::Central)
    central_gradient(r, nx, ny);
  else
    forward_gradient(r, nx, ny);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter(std::string(name) + " must be > 0");
}

// Projected gradient (I - xi xi^T) g.
inline void project(double ax, double ay, double gx, double gy, double& vx, double& vy) {
  const double dot = ax * gx + ay * gy;
  vx = gx - ax * dot;
  vy = gy - ay * dot;
}

template <typename PerPixel>
void for_each_channel_gradient(const ComplexImage& x, PerPixel&& fn) {
  RealGrid gx, gy;
  for (int ch = 0; ch < 2; ++ch) {
    const RealImage u = ch == 0 ? x.real() : x.imag();
    forward_gradient(u, gx, gy);
    for (std::size_t i = 0; i < u.size(); ++i) fn(ch, i, gx[i], gy[i]);
  }
}

template <typename Sink>
void dtv_terms(const ComplexImage& x, const EdgeField* xi, double delta, Sink&& sink) {
  if (xi) require_same_shape(x.shape(), xi->shape(), "dtv_value");
  for_each_channel_gradient(x, [&](int, std::size_t i, double gx, double gy) {
    double vx = gx, vy = gy;
    if (xi) project(xi->xi_x[i], xi->xi_y[i], gx, gy, vx, vy);
    const double n2 = vx * vx + vy * vy;
    sink(i, delta > 0.0 ? std::sqrt(n2 + delta * delta) - delta : std::sqrt(n2));
  });
}

double dtv_sum(const ComplexImage& x, const EdgeField* xi, double delta) {
  double acc = 0.0;
  dtv_terms(x, xi, delta, [&](std::size_t, double v) { acc += v; });
  return acc;
}

}  // namespace

void forward_gradient(const RealGrid& u, RealGrid& gx, RealGrid& gy) {
  const std::size_t h = u.height(), w = u.width();
  gx = RealGrid(u.shape());
  gy = RealGrid(u.shape());
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      if (j + 1 < w) gx(i, j) = u(i, j + 1) - u(i, j);
      if (i + 1 < h) gy(i, j) = u(i + 1, j) - u(i, j);
    }
}

void forward_gradient_adjoint(const RealGrid& px, const RealGrid& py, RealGrid& out) {
  const std::size_t h = px.height(), w = px.width();
  out = RealGrid(px.shape());
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      double v = 0.0;
      if (j + 1 < w) v -= px(i, j);
      if (j > 0) v += px(i, j - 1);
      if (i + 1 < h) v -= py(i, j);
      if (i > 0) v += py(i - 1, j);
      out(i, j) = v;
    }
}

RealGrid dtv_cost_map(const ComplexImage& x, const EdgeField& xi, double delta) {
  if (delta < 0.0) throw InvalidParameter("dtv_cost_map delta must be >= 0");
  RealGrid out(x.shape());
  dtv_terms(x, &xi, delta, [&](std::size_t i, double v) { out[i] += v; });
  return out;
}

EdgeField edge_field(const RealImage& ref_mag, double eps, EdgeStencil stencil) {
  require_positive(eps, "edge_field eps");
  RealGrid nx, ny;
  reference_gradient(ref_mag, stencil, nx, ny);
  EdgeField xi(ref_mag.shape());
  for (std::size_t i = 0; i < nx.size(); ++i) {
    const double s = std::sqrt(nx[i] * nx[i] + ny[i] * ny[i] + eps * eps);
    xi.xi_x[i] = nx[i] / s;
    xi.xi_y[i] = ny[i] / s;
  }
  return xi;
}

double max_gradient_magnitude(const RealImage& ref_mag, EdgeStencil stencil) {
  RealGrid nx, ny;
  reference_gradient(ref_mag, stencil, nx, ny);
  double m = 0.0;
  for (std::size_t i = 0; i < nx.size(); ++i) m = std::max(m, std::hypot(nx[i], ny[i]));
  return m;
}

double default_edge_eps(const RealImage& ref_mag) { return 0.05 * max_gradient_magnitude(ref_mag); }

double dtv_value(const ComplexImage& x, const EdgeField& xi) { return dtv_sum(x, &xi, 0.0); }

double dtv_value_smoothed(const ComplexImage& x, const EdgeField& xi, double delta) {
  require_positive(delta, "dtv delta");
  return dtv_sum(x, &xi, delta);
}

double tv_value(const ComplexImage& x) { return dtv_sum(x, nullptr, 0.0); }

ComplexImage dtv_grad_x(const ComplexImage& x, const EdgeField& xi, double delta) {
  require_positive(delta, "dtv_grad_x delta");
  require_same_shape(x.shape(), xi.shape(), "dtv_grad_x");
  RealGrid qx[2] = {RealGrid(x.shape()), RealGrid(x.shape())};
  RealGrid qy[2] = {RealGrid(x.shape()), RealGrid(x.shape())};
  for_each_channel_gradient(x, [&](int ch, std::size_t i, double gx, double gy) {
    const double ax = xi.xi_x[i], ay = xi.xi_y[i];
    double vx, vy;
    project(ax, ay, gx, gy, vx, vy);
    const double c = std::sqrt(vx * vx + vy * vy + delta * delta);
    // P is symmetric, so d/dg sqrt(|Pg|^2 + d^2) = P (Pg) / c.
    double wx, wy;
    project(ax, ay, vx / c, vy / c, wx, wy);
    qx[ch][i] = wx;
    qy[ch][i] = wy;
  });
  RealGrid gre, gim;
  forward_gradient_adjoint(qx[0], qy[0], gre);
  forward_gradient_adjoint(qx[1], qy[1], gim);
  ComplexImage out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cplx(gre[i], gim[i]);
  return out;
}

double align_objective(const ComplexImage& x, const ComplexImage& x_ref, const DisplacementField& phi, double eps,
                       double delta) {
  require_same_shape(x.shape(), x_ref.shape(), "align_objective");
  require_same_shape(x.shape(), phi.shape(), "align_objective");
  return dtv_value_smoothed(x, edge_field(warp(x_ref, phi).magnitude(), eps, EdgeStencil::Central), delta);
}

DisplacementField align_grad_phi(const ComplexImage& x, const ComplexImage& x_ref, const DisplacementField& phi,
                                 double eps, double delta) {
  require_positive(eps, "align_grad_phi eps");
  require_positive(delta, "align_grad_phi delta");
  require_same_shape(x.shape(), x_ref.shape(), "align_grad_phi");
  require_same_shape(x.shape(), phi.shape(), "align_grad_phi");
  const Shape shape = x.shape();
  const std::size_t n = shape.size();

  // Forward pass: warped reference, its magnitude and the edge field.
  std::vector<BilinearSample<cplx>> warped(n);
  RealImage mag(shape);
  for (std::size_t r = 0; r < shape.height; ++r)
    for (std::size_t c = 0; c < shape.width; ++c) {
      const std::size_t i = r * shape.width + c;
      warped[i] = sample_bilinear(static_cast<const Grid<cplx>&>(x_ref), static_cast<double>(c) + phi.dx[i],
                                  static_cast<double>(r) + phi.dy[i]);
      mag[i] = std::abs(warped[i].value);
    }
  RealGrid nx, ny;
  central_gradient(mag, nx, ny);

  // dJ/dxi, summed over both channels of x.
  RealGrid g_xi_x(shape), g_xi_y(shape);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sqrt(nx[i] * nx[i] + ny[i] * ny[i] + eps * eps);
  for_each_channel_gradient(x, [&](int, std::size_t i, double gx, double gy) {
    const double ax = nx[i] / s[i], ay = ny[i] / s[i];
    const double dot = ax * gx + ay * gy;
    const double vx = gx - ax * dot, vy = gy - ay * dot;
    const double c = std::sqrt(vx * vx + vy * vy + delta * delta);
    const double v_xi = vx * ax + vy * ay;
    g_xi_x[i] -= (v_xi * gx + dot * vx) / c;
    g_xi_y[i] -= (v_xi * gy + dot * vy) / c;
  });

  // Through xi = n / s(n): Jacobian (I - n n^T / s^2) / s.
  RealGrid g_nx(shape), g_ny(shape);
  for (std::size_t i = 0; i < n; ++i) {
    const double nd = nx[i] * g_xi_x[i] + ny[i] * g_xi_y[i];
    const double s2 = s[i] * s[i];
    g_nx[i] = (g_xi_x[i] - nx[i] * nd / s2) / s[i];
    g_ny[i] = (g_xi_y[i] - ny[i] * nd / s2) / s[i];
  }
  RealGrid g_mag;
  central_gradient_adjoint(g_nx, g_ny, g_mag);

  // Through |u| and the bilinear sample position.
  DisplacementField grad(shape);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx u = warped[i].value;
    const double m = mag[i];
    if (m == 0.0) continue;
    const double gre = g_mag[i] * u.real() / m, gim = g_mag[i] * u.imag() / m;
    grad.dx[i] = gre * warped[i].d_dx.real() + gim * warped[i].d_dx.imag();
    grad.dy[i] = gre * warped[i].d_dy.real() + gim * warped[i].d_dy.imag();
  }
  return grad;
}

}  // namespace alignrecon

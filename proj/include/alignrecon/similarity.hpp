#pragma once

#include "alignrecon/grid.hpp"

namespace alignrecon {

// Normalized reference gradient xi = grad r / sqrt(|grad r|^2 + eps^2), so |xi| < 1.
struct EdgeField {
  RealGrid xi_x;
  RealGrid xi_y;

  EdgeField() = default;
  explicit EdgeField(Shape shape) : xi_x(shape), xi_y(shape) {}
  Shape shape() const { return xi_x.shape(); }
};

// Forward: the dTV stencil (Neumann boundary), so an edge of r is annihilated
// exactly where D x sees it. Central: central differences, one-sided at the
// borders; the band around each edge is wider, which the alignment objective
// needs to have a nonzero gradient for offsets of a few pixels.
enum class EdgeStencil { Forward, Central };

EdgeField edge_field(const RealImage& ref_mag, double eps, EdgeStencil stencil = EdgeStencil::Forward);

double max_gradient_magnitude(const RealImage& ref_mag, EdgeStencil stencil = EdgeStencil::Forward);

// Default edge scale: 0.05 * max |grad r|.
double default_edge_eps(const RealImage& ref_mag);

// Sum over pixels and over the real/imaginary channels of
// |(I - xi xi^T) D x(p)|_2, D forward differences with Neumann boundary.
double dtv_value(const ComplexImage& x, const EdgeField& xi);

// Charbonnier-smoothed variant: sum sqrt(|.|^2 + delta^2) - delta.
double dtv_value_smoothed(const ComplexImage& x, const EdgeField& xi, double delta);

// Per-pixel terms of dtv_value_smoothed (delta > 0) or dtv_value (delta = 0),
// real and imaginary channels added.
RealGrid dtv_cost_map(const ComplexImage& x, const EdgeField& xi, double delta);

// Isotropic TV; identical to dtv_value with a zero edge field.
double tv_value(const ComplexImage& x);

// Gradient of dtv_value_smoothed with respect to the real and imaginary parts of x.
ComplexImage dtv_grad_x(const ComplexImage& x, const EdgeField& xi, double delta);

// phi -> dtv_value_smoothed(x, edge_field(|warp(x_ref, phi)|, eps, Central), delta)
double align_objective(const ComplexImage& x, const ComplexImage& x_ref, const DisplacementField& phi, double eps,
                       double delta);

// Analytic gradient of align_objective with respect to the displacement field,
// chained through the bilinear warp, the magnitude, and the edge-field map.
DisplacementField align_grad_phi(const ComplexImage& x, const ComplexImage& x_ref, const DisplacementField& phi,
                                 double eps, double delta);

// Forward differences (Neumann) and their adjoint, as used by dTV and the prox operators.
void forward_gradient(const RealGrid& u, RealGrid& gx, RealGrid& gy);
void forward_gradient_adjoint(const RealGrid& px, const RealGrid& py, RealGrid& out);

}  // namespace alignrecon

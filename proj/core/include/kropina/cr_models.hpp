// kropina - Heisenberg CR models, conformal rescalings, Tanaka-Webster curvature
#ifndef KROPINA_CR_MODELS_HPP_
#define KROPINA_CR_MODELS_HPP_

#include <complex>

#include "kropina/expr.hpp"
#include "kropina/structure.hpp"
#include "kropina/types.hpp"

namespace kropina {

/// Heisenberg CR data: dimension n (manifold dimension 2n+1) and a real
/// conformal factor Upsilon over the coordinates (x_1..x_n, y_1..y_n, t),
/// z_alpha = x_alpha + i y_alpha. All frame derivatives of Upsilon come from
/// tree differentiation, so they are exact to any order.
struct CRModelSpec {
  int cr_dim = 1;
  ExprPtr upsilon;
  std::string label;
};

/// Coordinate names: (x, y, t) for n = 1, (x1..xn, y1..yn, t) otherwise.
std::vector<std::string> cr_coord_names(int n);

CRModelSpec cr_model_from_text(int n, const std::string& upsilon_text,
                               std::string label = {});

/// Upsilon = -2 log rho with rho = (|z|^4 + t^2)^{1/4}, as an expression tree.
ExprPtr burns_shnider_upsilon(int n);

/// The flat model: omega = dt + 2 sum(x dy - y dx), g = 2 sum(dx^2 + dy^2).
/// g annihilates d_t; the structure is degenerate but nondegenerate on ker
/// omega.
KropinaStructure heisenberg_kropina(int n);

struct PluriharmonicReport {
  double res1 = 0.0;  // defect of the trace condition (0 by convention, n = 1)
  double res2 = 0.0;  // |grad_a grad_b grad^b Upsilon|
  bool ok = true;
};

/// Kropina structure of the rescaled contact form theta = e^Upsilon theta_0
/// with the curvature term folded into g. Presumes pseudo-Einstein theta,
/// i.e. CR-pluriharmonic Upsilon; computed regardless, with the residual
/// reported through `report` when given (warning-grade).
KropinaStructure rescaled_kropina(const CRModelSpec& spec,
                                  PluriharmonicReport* report = nullptr);

/// Tanaka-Webster scalar curvature of e^Upsilon theta_0 on the flat model via
/// the conformal transformation formula. Throws SingularPoint when Upsilon or
/// its derivatives fail to evaluate finitely.
double tw_scalar_curvature(const CRModelSpec& spec, const Vec& point);

/// Closed form n(n+1)|z|^2 / (2 rho^2); oracle for tw_scalar_curvature on the
/// Burns-Shnider rescaling. Throws OriginExcluded at (z, t) = (0, 0).
double burns_shnider_scalar(int n, const Eigen::VectorXcd& z, double t);
double burns_shnider_scalar(int n, std::complex<double> z, double t);

/// Residuals of the CR-pluriharmonicity conditions at a point.
PluriharmonicReport pluriharmonic_residual(const CRModelSpec& spec, const Vec& point);

/// Coefficient of omega wedge (d omega)^n against the coordinate volume; zero
/// iff the structure fails the contact condition at x. For dim 3 this is the
/// classical triple omega . (curl-type) determinant.
double contact_volume(const KropinaStructure& s, const Vec& x);

}  // namespace kropina

#endif  // KROPINA_CR_MODELS_HPP_

// kropina - connection equivalence, projective shifts, kernel blow-up probes
#ifndef KROPINA_EQUIVALENCE_HPP_
#define KROPINA_EQUIVALENCE_HPP_

#include "kropina/euler_lagrange.hpp"
#include "kropina/ode.hpp"
#include "kropina/structure.hpp"
#include "kropina/types.hpp"

namespace kropina {

/// Christoffel symbols of the affine connection sharing geodesics with
/// F = g/omega when omega is closed:
/// Gamma_ij^k = Gamma^g_ij^k + (nabla^g_i omega_j) omega^k / |omega|_g^2.
/// Throws NotClosed when the antisymmetrized derivative of omega exceeds
/// 1e-8 at x; NullOmega when |omega|_g^2 = 0; DegenerateMetric when g is
/// singular. out[k](i, j), symmetric in (i, j).
Tensor3 closed_form_connection(const KropinaStructure& s, const Vec& x);

/// Max over samples of the component of xdotdot + Gamma(xdot, xdot)
/// orthogonal (coordinate-Euclidean) to xdot; small values certify the
/// trajectory as a pregeodesic of the connection. Accelerations come from the
/// trajectory's stored knot derivatives.
double pregeodesic_residual(const Trajectory& traj,
                            const std::function<Tensor3(const Vec&)>& symbols_at);

/// F -> c F + beta realized as g -> c g + sym(beta (x) omega); beta must be
/// closed (checked at the probe points, default the origin).
KropinaStructure projective_shift(const KropinaStructure& s, double c,
                                  const CovectorField& beta,
                                  const std::vector<Vec>& probe_points = {});

/// Membership test for the exceptional set N = { xi0 in ker omega :
/// |xi0|_g^2 = 0 or (xi0 . d omega)|_H = 0 }. Requires omega(xi0) under the
/// kernel guard (throws NotInKernel otherwise).
bool in_exceptional_set(const KropinaStructure& s, const Vec& x, const Vec& xi0,
                        double tol = 1e-10);

struct BlowupProbe {
  double s = 0.0;
  double omega_xi = 0.0;
  double eta_norm = 0.0;
};

/// Report of a family xi_s = xi0 + s v approaching ker omega: the minimum-norm
/// accelerations eta*(xi_s) and the fitted slope of log|eta*| against
/// log|omega(xi_s)| (expected -1 off the exceptional set).
struct BlowupReport {
  std::vector<BlowupProbe> probes;  // sorted by s descending
  double fitted_exponent = 0.0;
  bool xi0_in_exceptional_set = false;
};

/// Requires xi0 not in the exceptional set and omega(v) = 1.
BlowupReport blowup_probe(const KropinaStructure& s, const Vec& x, const Vec& xi0,
                          const Vec& v, const std::vector<double>& s_values);

}  // namespace kropina

#endif  // KROPINA_EQUIVALENCE_HPP_

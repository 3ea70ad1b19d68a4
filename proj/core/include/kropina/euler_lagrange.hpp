// kropina - the singular geodesic system A(xi) eta = b(xi) and its solver
#ifndef KROPINA_EULER_LAGRANGE_HPP_
#define KROPINA_EULER_LAGRANGE_HPP_

#include <optional>

#include "kropina/ode.hpp"
#include "kropina/structure.hpp"
#include "kropina/types.hpp"

namespace kropina {

/// The linear system of the unparameterized geodesic equation at a point,
/// assembled in the current chart. A is symmetric with A xi = 0 and
/// rank n-1 whenever omega(xi) != 0 and g is nondegenerate on ker omega;
/// solutions of A eta = b form the affine line eta* + R xi.
struct ELSystem {
  Mat A;
  Vec b;
  Vec x;
  Vec xi;
};

/// Parameterization gauge fixing the kernel freedom eta -> eta + lambda xi.
/// OmegaConstant keeps omega(xi) constant along the curve (matches the affine
/// parameter of the null lift and is defined even where F(xi) = 0).
/// FArclength keeps g(xi,xi) - omega(xi) constant, which preserves F = 1
/// arc-length parameterization when seeded with g(xi,xi) = omega(xi) > 0.
enum class Gauge { OmegaConstant, FArclength };

std::string to_string(Gauge g);

/// Christoffel symbols of g: out[k](i,j) = Gamma_ij^k, symmetric in (i,j).
/// Requires g nonsingular.
Tensor3 levi_civita_symbols(const KropinaStructure& s, const Vec& x);

/// Assembles A and b at (x, xi). Throws KernelDirection when omega(xi) is
/// under the guard.
ELSystem assemble_el_system(const KropinaStructure& s, const Vec& x, const Vec& xi);

/// The unique solution of A eta = b that is Euclidean-orthogonal to xi,
/// computed by deflating the known one-dimensional kernel R xi. Throws
/// InconsistentSystem when the residual bound 1e-10 * max(|b|, |A||eta|)
/// fails.
Vec min_norm_acceleration(const ELSystem& sys);

/// Shifts eta_particular along xi so the gauge derivative vanishes.
Vec gauge_fix(const KropinaStructure& s, const Vec& x, const Vec& xi,
              const Vec& eta_particular, Gauge gauge);

/// First-order right-hand side: dx = xi, dxi = gauge-fixed acceleration.
void geodesic_rhs(const KropinaStructure& s, const GeodesicState& st, Gauge gauge,
                  Vec& dx, Vec& dxi);

/// Axis-aligned box event region.
struct Box {
  Vec lo;
  Vec hi;
};

struct TraceOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double accel_cap = 1e8;  // |dxi| > cap * max(1, |xi|) stops the run
  std::optional<Box> box;
  int resample = 0;  // >0: return this many uniform samples instead of knots
};

/// Integrates the geodesic system from (x, xi) over [0, t_max], recording
/// diagnostics (F, omega(xi)) at every sample. Kernel approach, acceleration
/// blow-up (expected behavior near ker omega, recorded, not an error), and
/// box exit stop the run with the corresponding termination reason.
Trajectory trace_geodesic(const KropinaStructure& s, const GeodesicState& init,
                          Gauge gauge, double t_max, const TraceOptions& opts = {});

}  // namespace kropina

#endif  // KROPINA_EULER_LAGRANGE_HPP_

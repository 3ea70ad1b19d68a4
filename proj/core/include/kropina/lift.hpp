// kropina - null geodesics of the lifted metric [[0, omega], [omega^T, g]]
#ifndef KROPINA_LIFT_HPP_
#define KROPINA_LIFT_HPP_

#include "kropina/euler_lagrange.hpp"
#include "kropina/ode.hpp"
#include "kropina/structure.hpp"
#include "kropina/types.hpp"

namespace kropina {

/// The (n+1)-dimensional metric gtilde = g_ij dx^i dx^j + 2 omega_i dx^i dx^0
/// on coordinates (x^0, x^1..x^n). Independent of x^0; K = d/dx^0 is a null
/// Killing field with (K . gtilde)|TM = omega.
struct LiftMetric {
  int dim = 0;  // n + 1
  const KropinaStructure* base = nullptr;

  Mat gtilde(const Vec& x_base) const;
  /// d_k gtilde for k = 1..n packed as [k-1](a, b); the x^0 derivative is zero.
  Tensor3 dgtilde(const Vec& x_base) const;
};

/// State on the lift carrying the null constraint g(xi,xi) + 2 omega(xi) xi0 = 0.
struct LiftState {
  double x0 = 0.0;
  Vec x;
  double xi0 = 0.0;
  Vec xi;

  Vec packed() const;  // (x0, x, xi0, xi)
  static LiftState unpack(const Vec& y, int n);
};

/// Requires g nondegenerate on ker omega at points of use (checked lazily by
/// the linear solves).
LiftMetric lift_metric(const KropinaStructure& s);

/// xi0 = -g(xi,xi) / (2 omega(xi)); the lifted vector is gtilde-null.
LiftState null_initial_lift(const KropinaStructure& s, const GeodesicState& st,
                            double x0_start = 0.0);

/// Affine geodesic right-hand side of gtilde, with Christoffel contractions
/// obtained from pointwise linear solves against gtilde.
void lift_geodesic_rhs(const LiftMetric& L, const LiftState& st, LiftState& dst);

struct LiftSample {
  double t = 0.0;
  LiftState state;
  double p0 = 0.0;      // omega_l xdot^l, conserved along geodesics
  double gnorm = 0.0;   // gtilde(gamma', gamma'), zero for null geodesics
};

struct LiftTrajectory {
  std::vector<LiftSample> samples;
  TrajectoryMeta meta;
  std::shared_ptr<const DenseOutput> dense;  // packed lift state
  int base_dim = 0;
};

LiftTrajectory trace_lift_geodesic(const KropinaStructure& s, const LiftState& init,
                                   double t_max, const TraceOptions& opts = {});

/// Drops (x0, xi0) and recomputes base diagnostics. Throws KernelApproach if
/// |omega(xi)| falls under the guard at any sample. When times is nonempty the
/// projection is taken at those times through the lift's dense output, which
/// puts two integrations on a common grid for sup-distance comparison.
Trajectory project_and_check(const KropinaStructure& s, const LiftTrajectory& lift,
                             const std::vector<double>& times = {});

}  // namespace kropina

#endif  // KROPINA_LIFT_HPP_

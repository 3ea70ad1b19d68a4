// kropina - two-point connection by indicatrix shooting
#ifndef KROPINA_CONNECT_HPP_
#define KROPINA_CONNECT_HPP_

#include <optional>

#include "kropina/euler_lagrange.hpp"
#include "kropina/ode.hpp"
#include "kropina/structure.hpp"
#include "kropina/types.hpp"

namespace kropina {

/// A shot ended early (kernel approach, acceleration cap, or box exit); the
/// enclosing search records it as a failed shot.
class ShotStopped : public KropinaError {
 public:
  ShotStopped(const std::string& what, Termination reason)
      : KropinaError(what), reason(reason) {}
  Termination reason;
};

struct ShootingProblem {
  KropinaStructure structure;
  Vec p, q;
  double delta_cap = -1.0;   // omega exclusion band on the indicatrix; <0 -> 5%
  double t_max = 3.0;
  double endpoint_tol = 1e-6;
  double rel_tol = 1e-9;
  int grid_directions = 96;  // coarse stage
  int grid_times = 24;
  int refine_candidates = 8;
  int max_iterations = 60;   // Levenberg-Marquardt steps per candidate
  int threads = 1;           // workers for the coarse grid (results stay
                             // deterministic; collection is by index)
};

struct ShotResult {
  Vec endpoint;
  Mat jacobian;  // n x n: columns d endpoint / d(dir_params_1.., T)
};

/// Integrates from p along the indicatrix point with hyperspherical direction
/// parameters (n-1 angles) for time T in FArclength gauge; g must be positive
/// definite (apply modify_metric / make_positive_definite first). The Jacobian
/// columns for the angles are central finite differences; the T column is the
/// exact terminal velocity. Throws ShotStopped when the trace ends early.
ShotResult shoot_endpoint(const KropinaStructure& s, const Vec& p,
                          const Vec& dir_params, double T,
                          double delta_cap = -1.0, double rel_tol = 1e-9);

struct ConnectResult {
  bool found = false;
  Trajectory trajectory;     // on the integration structure, FArclength gauge
  double length = 0.0;       // integral of F of the *input* structure
  double residual = 0.0;     // |endpoint - q| of the returned chain
  double best_residual = 0.0;  // best residual seen (reported on NotFound too)
  Vec dir_params;
  double T = 0.0;
  double min_omega = 0.0;    // min omega(xi) along the result
  int distinct_found = 0;    // number of distinct connecting chains
};

/// Coarse indicatrix/time grid followed by damped Gauss-Newton refinement of
/// the endpoint residual. Among successes returns the least-length chain
/// (length measured against the problem's structure, whose geodesics are
/// unchanged by the internal positive-definite modification). A false
/// `found` is not a non-existence certificate.
ConnectResult connect_points(const ShootingProblem& prob);

/// Integral of F(gamma, gamma') dt by composite Simpson quadrature over a
/// dense resampling. Throws NotAdmissible when omega(xi) <= 0 at any sample.
double path_length(const KropinaStructure& s, const Trajectory& traj);

struct QuasiDistanceResult {
  bool found = false;
  double distance = 0.0;     // least found length: an upper bound on d(p, q)
  int multiplicity = 0;      // distinct connecting chains seen
  double best_residual = 0.0;
};

/// Minimum length over connect_points successes at budget levels 1..budget
/// (nested searches, so the result is nonincreasing in budget).
QuasiDistanceResult quasi_distance(const KropinaStructure& s, const Vec& p,
                                   const Vec& q, int budget = 2);

}  // namespace kropina

#endif  // KROPINA_CONNECT_HPP_

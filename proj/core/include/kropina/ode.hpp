// kropina - adaptive explicit Runge-Kutta integration with dense output
#ifndef KROPINA_ODE_HPP_
#define KROPINA_ODE_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kropina/types.hpp"

namespace kropina {

enum class Termination {
  ReachedEnd,
  KernelApproach,
  AccelerationCap,
  LeftBox,
  StepSizeUnderflow,
  EventStop,
  MaxSteps,
};

std::string to_string(Termination t);

/// Right-hand side dy/dt = f(t, y). May throw; a throwing stage evaluation
/// rejects the step and retries with a smaller one.
using OdeRhs = std::function<void(double t, const Vec& y, Vec& dy)>;

/// Scalar event function. Integration stops at the first root of g along the
/// trajectory, where g changes sign from positive to non-positive. dy is the
/// derivative at (t, y), provided so events can inspect accelerations without
/// extra rhs evaluations.
struct OdeEvent {
  std::string name;
  Termination reason = Termination::EventStop;
  std::function<double(double t, const Vec& y, const Vec& dy)> value;
};

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0 -> automatic
  double max_step = 0.0;      // 0 -> span
  long max_steps = 1000000;
  double event_time_tol = 1e-9;  // bracketing width for event localization
};

/// One accepted step with the quartic interpolation coefficients of the
/// Dormand-Prince pair (4th-order continuous extension).
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  Vec f0;  // rhs at (t0, y0); exact knot derivative
  Vec r1, r2, r3, r4, r5;
};

/// Piecewise-quartic dense representation of a solution.
class DenseOutput {
 public:
  DenseOutput(std::vector<DenseStep> steps, double t_begin, double t_end);

  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }

  /// State at time t; throws OutOfSpan outside [t_begin, t_end].
  Vec at(double t) const;
  /// d/dt of the interpolant at time t.
  Vec derivative(double t) const;
  /// Exact rhs value stored at the left knot of the step containing t.
  const Vec& knot_derivative(int step_index) const { return steps_[step_index].f0; }
  int step_count() const { return static_cast<int>(steps_.size()); }
  const DenseStep& step(int i) const { return steps_[i]; }

 private:
  int locate(double t) const;
  std::vector<DenseStep> steps_;
  double t_begin_, t_end_;
};

struct OdeSolution {
  std::vector<double> t;
  std::vector<Vec> y;
  std::shared_ptr<const DenseOutput> dense;
  Termination termination = Termination::ReachedEnd;
  std::string event_name;
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

/// Embedded Dormand-Prince 5(4) with PI step-size control and event stopping.
/// Deterministic: identical inputs give bitwise-identical output.
OdeSolution integrate_adaptive(const OdeRhs& rhs, const Vec& y0, double t0,
                               double t1, const OdeOptions& opts = {},
                               const std::vector<OdeEvent>& events = {});

// ---------------------------------------------------------------------------
// Geodesic trajectories: time-stamped (x, xi) samples with diagnostics.

struct TrajectorySample {
  double t = 0.0;
  Vec x;
  Vec xi;
  double F = 0.0;
  double omega_xi = 0.0;
};

struct TrajectoryMeta {
  std::string structure_label;
  std::string gauge;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  Termination termination = Termination::ReachedEnd;
  long accepted_steps = 0;
  long rejected_steps = 0;
};

/// Diagnostics are recomputed from (x, xi) through this hook, never copied.
using TrajectoryDiagnostics =
    std::function<std::pair<double, double>(const Vec& x, const Vec& xi)>;

struct Trajectory {
  std::vector<TrajectorySample> samples;
  TrajectoryMeta meta;
  std::shared_ptr<const DenseOutput> dense;  // over the packed state [x; xi]
  TrajectoryDiagnostics diagnostics;         // empty for deserialized data

  double t_begin() const { return samples.empty() ? 0.0 : samples.front().t; }
  double t_end() const { return samples.empty() ? 0.0 : samples.back().t; }
  std::vector<Vec> positions() const;
};

/// Interpolates the trajectory at the given times (each within the span).
/// Times landing on stored knots reproduce the stored samples exactly.
Trajectory resample_dense(const Trajectory& traj, const std::vector<double>& times);

std::vector<double> linspace(double a, double b, int count);

}  // namespace kropina

#endif  // KROPINA_ODE_HPP_

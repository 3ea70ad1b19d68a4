#include "kropina/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kropina {

namespace {

// Dormand-Prince RK5(4)7M coefficients (the classic 1980 pair). The dense
// output follows the standard 4th-order continuous extension; see Hairer,
// Norsett, Wanner, Solving ODEs I, for the d-coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;

// error weights: b5 - b4
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

struct StageFailure {};

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedEnd: return "reached-end";
    case Termination::KernelApproach: return "kernel-approach";
    case Termination::AccelerationCap: return "acceleration-cap";
    case Termination::LeftBox: return "left-box";
    case Termination::StepSizeUnderflow: return "step-size-underflow";
    case Termination::EventStop: return "event-stop";
    case Termination::MaxSteps: return "max-steps";
  }
  return "unknown";
}

DenseOutput::DenseOutput(std::vector<DenseStep> steps, double t_begin, double t_end)
    : steps_(std::move(steps)), t_begin_(t_begin), t_end_(t_end) {}

int DenseOutput::locate(double t) const {
  if (steps_.empty()) {
    throw OutOfSpan("dense output holds no accepted steps");
  }
  const double lo = std::min(t_begin_, t_end_);
  const double hi = std::max(t_begin_, t_end_);
  const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  if (t < lo - slack || t > hi + slack) {
    throw OutOfSpan("dense output queried outside the integrated span");
  }
  // steps are ordered in integration direction
  int a = 0, b = static_cast<int>(steps_.size()) - 1;
  const bool fwd = steps_.back().h > 0;
  while (a < b) {
    const int mid = (a + b) / 2;
    const double t_right = steps_[mid].t0 + steps_[mid].h;
    if (fwd ? (t <= t_right) : (t >= t_right)) {
      b = mid;
    } else {
      a = mid + 1;
    }
  }
  return a;
}

Vec DenseOutput::at(double t) const {
  const DenseStep& s = steps_[locate(t)];
  const double th = (t - s.t0) / s.h;
  const double th1 = 1.0 - th;
  return s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
}

Vec DenseOutput::derivative(double t) const {
  const DenseStep& s = steps_[locate(t)];
  const double th = (t - s.t0) / s.h;
  // d/dtheta of r1 + th*(r2 + (1-th)*(r3 + th*(r4 + (1-th)*r5)))
  const double th1 = 1.0 - th;
  Vec dp = s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)) +
           th * (-(s.r3 + th * (s.r4 + th1 * s.r5)) +
                 th1 * (s.r4 + th1 * s.r5 - th * s.r5));
  return dp / s.h;
}

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = a;
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / (count - 1);
  }
  out.back() = b;
  return out;
}

OdeSolution integrate_adaptive(const OdeRhs& rhs, const Vec& y0, double t0,
                               double t1, const OdeOptions& opts,
                               const std::vector<OdeEvent>& events) {
  OdeSolution sol;
  const int n = static_cast<int>(y0.size());
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double hmax = opts.max_step > 0 ? opts.max_step : span;
  const double hmin_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                            std::max({1.0, std::abs(t0), std::abs(t1)});

  auto eval = [&](double t, const Vec& y, Vec& dy) {
    ++sol.rhs_evaluations;
    rhs(t, y, dy);
    if (!dy.allFinite()) throw StageFailure{};
  };

  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  Vec y = y0, ynew(n), yerr(n), ytmp(n);

  double t = t0;
  if (span == 0) {
    sol.t.push_back(t);
    sol.y.push_back(y);
    sol.termination = Termination::ReachedEnd;
    sol.dense = std::make_shared<DenseOutput>(std::vector<DenseStep>{}, t0, t0);
    return sol;
  }
  eval(t, y, k1);

  // event bookkeeping: value of each event at the current accepted point
  std::vector<double> ev_prev(events.size());
  for (size_t i = 0; i < events.size(); ++i) ev_prev[i] = events[i].value(t, y, k1);

  sol.t.push_back(t);
  sol.y.push_back(y);

  // starting step: standard heuristic based on scaled derivative magnitudes
  double h;
  if (opts.initial_step > 0) {
    h = std::min(opts.initial_step, hmax);
  } else {
    const double d0 = y.norm();
    const double d1n = k1.norm();
    double h0 = (d1n <= 1e-10 || d0 <= 1e-10) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, hmax);
    Vec y1 = y + dir * h0 * k1;
    Vec k1b(n);
    bool probe_ok = true;
    try {
      eval(t + dir * h0, y1, k1b);
    } catch (...) {
      probe_ok = false;
    }
    if (probe_ok) {
      const double d2 = (k1b - k1).norm() / h0;
      const double dm = std::max(d1n, d2);
      const double h1 = dm > 1e-15 ? std::pow(0.01 / dm, 0.2) : std::max(1e-6, h0 * 1e-3);
      h = std::min({100.0 * h0, h1, hmax});
    } else {
      h = std::min(1e-6, hmax);
    }
  }
  h = std::max(h, hmin_floor);

  std::vector<DenseStep> steps;
  double err_old = 1e-4;
  bool done = false;

  while (!done) {
    if (sol.accepted + sol.rejected >= opts.max_steps) {
      sol.termination = Termination::MaxSteps;
      break;
    }
    const double remaining = span - std::abs(t - t0);
    bool last = false;
    if (h >= remaining - hmin_floor) {
      h = remaining;
      last = true;
    }
    if (h < hmin_floor) {
      sol.termination = Termination::StepSizeUnderflow;
      break;
    }
    const double hd = dir * h;

    bool stage_failed = false;
    try {
      ytmp = y + hd * (a21 * k1);
      eval(t + c2 * hd, ytmp, k2);
      ytmp = y + hd * (a31 * k1 + a32 * k2);
      eval(t + c3 * hd, ytmp, k3);
      ytmp = y + hd * (a41 * k1 + a42 * k2 + a43 * k3);
      eval(t + c4 * hd, ytmp, k4);
      ytmp = y + hd * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      eval(t + c5 * hd, ytmp, k5);
      ytmp = y + hd * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      eval(t + hd, ytmp, k6);
      ynew = y + hd * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      eval(t + hd, ynew, k7);
    } catch (const StageFailure&) {
      stage_failed = true;
    } catch (const KropinaError&) {
      // rhs undefined inside the attempted step (e.g. omega crossed zero);
      // treated like a failed step so the event machinery stops us cleanly
      stage_failed = true;
    }

    if (stage_failed) {
      ++sol.rejected;
      h *= 0.25;
      if (h < hmin_floor) {
        sol.termination = Termination::StepSizeUnderflow;
        break;
      }
      continue;
    }

    yerr = hd * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc =
          opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double q = yerr[i] / sc;
      err += q * q;
    }
    err = std::sqrt(err / n);

    if (err > 1.0) {
      ++sol.rejected;
      const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= fac;
      if (h < hmin_floor) {
        sol.termination = Termination::StepSizeUnderflow;
        break;
      }
      continue;
    }

    // accepted
    ++sol.accepted;
    DenseStep ds;
    ds.t0 = t;
    ds.h = hd;
    ds.f0 = k1;
    ds.r1 = y;
    ds.r2 = ynew - y;
    ds.r3 = hd * k1 - ds.r2;
    ds.r4 = ds.r2 - hd * k7 - ds.r3;
    ds.r5 = hd * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    steps.push_back(ds);

    const double t_new = last ? t1 : t + hd;

    // event check on [t, t_new] using the fresh dense step
    int hit = -1;
    double t_hit = t_new;
    for (size_t i = 0; i < events.size(); ++i) {
      const double val = events[i].value(t_new, ynew, k7);
      if (ev_prev[i] > 0 && val <= 0) {
        // bisect on the interpolant for the crossing time
        double lo = t, hi = t_new;
        DenseOutput probe({ds}, t, t_new);
        Vec dy_probe(n);
        while (std::abs(hi - lo) > opts.event_time_tol) {
          const double mid = 0.5 * (lo + hi);
          const Vec ym = probe.at(mid);
          const Vec dym = probe.derivative(mid);
          const double vm = events[i].value(mid, ym, dym);
          if (vm > 0) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        if (hit < 0 || (dir > 0 ? hi < t_hit : hi > t_hit)) {
          hit = static_cast<int>(i);
          t_hit = hi;
        }
      }
      ev_prev[i] = val;
    }

    if (hit >= 0) {
      // The quartic coefficients keep the original step width; the dense span
      // is clamped at the event time instead.
      DenseOutput probe({ds}, t, t_new);
      t = t_hit;
      y = probe.at(t_hit);
      sol.t.push_back(t);
      sol.y.push_back(y);
      sol.termination = events[hit].reason;
      sol.event_name = events[hit].name;
      sol.dense = std::make_shared<DenseOutput>(std::move(steps), t0, t);
      return sol;
    }

    t = t_new;
    y = ynew;
    k1 = k7;  // FSAL
    sol.t.push_back(t);
    sol.y.push_back(y);

    if (last) {
      sol.termination = Termination::ReachedEnd;
      break;
    }

    // PI controller
    const double fac =
        0.9 * std::pow(err > 0 ? err : 1e-16, -0.7 / 5.0) * std::pow(err_old, 0.4 / 5.0);
    h = std::min(hmax, h * std::min(5.0, std::max(0.2, fac)));
    err_old = std::max(err, 1e-16);
  }

  sol.dense = std::make_shared<DenseOutput>(std::move(steps), t0, t);
  return sol;
}

std::vector<Vec> Trajectory::positions() const {
  std::vector<Vec> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.x);
  return out;
}

Trajectory resample_dense(const Trajectory& traj, const std::vector<double>& times) {
  if (!traj.dense) {
    throw OutOfSpan("resample_dense: trajectory has no dense representation");
  }
  const int n = traj.samples.empty() ? 0 : static_cast<int>(traj.samples.front().x.size());
  Trajectory out;
  out.meta = traj.meta;
  out.dense = traj.dense;
  out.diagnostics = traj.diagnostics;
  out.samples.reserve(times.size());
  for (double t : times) {
    // snap to stored knots for bitwise reproduction
    const TrajectorySample* knot = nullptr;
    for (const auto& s : traj.samples) {
      if (std::abs(s.t - t) <= 1e-14 * std::max(1.0, std::abs(s.t))) {
        knot = &s;
        break;
      }
    }
    if (knot) {
      out.samples.push_back(*knot);
      continue;
    }
    const Vec y = traj.dense->at(t);
    TrajectorySample smp;
    smp.t = t;
    smp.x = y.head(n);
    smp.xi = y.segment(n, n);
    if (traj.diagnostics) {
      auto [F, om] = traj.diagnostics(smp.x, smp.xi);
      smp.F = F;
      smp.omega_xi = om;
    }
    out.samples.push_back(smp);
  }
  return out;
}

}  // namespace kropina

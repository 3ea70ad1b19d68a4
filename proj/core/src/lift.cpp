#include "kropina/lift.hpp"

#include <Eigen/LU>

#include <cmath>

namespace kropina {

Mat LiftMetric::gtilde(const Vec& x_base) const {
  const int n = base->dim;
  Mat gt = Mat::Zero(n + 1, n + 1);
  gt.block(1, 1, n, n) = base->metric(x_base);
  const Vec w = base->oneform(x_base);
  gt.block(0, 1, 1, n) = w.transpose();
  gt.block(1, 0, n, 1) = w;
  return gt;
}

Tensor3 LiftMetric::dgtilde(const Vec& x_base) const {
  const int n = base->dim;
  const Tensor3 dg = base->dmetric(x_base);
  const Mat dw = base->doneform(x_base);
  Tensor3 out(n, Mat::Zero(n + 1, n + 1));
  for (int k = 0; k < n; ++k) {
    out[k].block(1, 1, n, n) = dg[k];
    out[k].block(0, 1, 1, n) = dw.row(k);
    out[k].block(1, 0, n, 1) = dw.row(k).transpose();
  }
  return out;
}

Vec LiftState::packed() const {
  Vec y(2 * (x.size() + 1));
  y[0] = x0;
  y.segment(1, x.size()) = x;
  y[x.size() + 1] = xi0;
  y.tail(x.size()) = xi;
  return y;
}

LiftState LiftState::unpack(const Vec& y, int n) {
  LiftState st;
  st.x0 = y[0];
  st.x = y.segment(1, n);
  st.xi0 = y[n + 1];
  st.xi = y.tail(n);
  return st;
}

LiftMetric lift_metric(const KropinaStructure& s) {
  // the lift is usable exactly where g|ker omega is nondegenerate; probe at
  // nothing here, the linear solves report degeneracy pointwise
  LiftMetric L;
  L.dim = s.dim + 1;
  L.base = &s;
  return L;
}

LiftState null_initial_lift(const KropinaStructure& s, const GeodesicState& st,
                            double x0_start) {
  const Vec w = s.oneform(st.x);
  const double u = w.dot(st.xi);
  if (std::abs(u) < 1e-12 * w.norm() * st.xi.norm()) {
    throw KernelDirection("null_initial_lift: omega(xi) below kernel guard");
  }
  const Mat g = s.metric(st.x);
  LiftState out;
  out.x0 = x0_start;
  out.x = st.x;
  out.xi = st.xi;
  out.xi0 = -st.xi.dot(g * st.xi) / (2.0 * u);
  return out;
}

void lift_geodesic_rhs(const LiftMetric& L, const LiftState& st, LiftState& dst) {
  const KropinaStructure& s = *L.base;
  const int n = s.dim;
  const Mat gt = L.gtilde(st.x);
  Eigen::FullPivLU<Mat> lu(gt);
  if (!lu.isInvertible()) {
    throw DegenerateMetric("lift_geodesic_rhs: gtilde singular");
  }

  const Tensor3 dg = s.dmetric(st.x);
  const Mat dw = s.doneform(st.x);
  const Vec& xi = st.xi;
  const double xi0 = st.xi0;

  // T_d = (d_b gt_dc) xid^b xid^c - (1/2)(d_d gt_bc) xid^b xid^c, where only
  // base indices b = 1..n differentiate (gt is x^0-independent).
  Vec T(n + 1);
  T[0] = xi.dot(dw * xi);
  for (int i = 0; i < n; ++i) {
    double first = 0.0;
    for (int b = 0; b < n; ++b) {
      first += xi[b] * (dw(b, i) * xi0 + dg[b].row(i).dot(xi));
    }
    const double second = 0.5 * (xi.dot(dg[i] * xi) + 2.0 * xi0 * dw.row(i).dot(xi));
    T[i + 1] = first - second;
  }

  const Vec acc = lu.solve(-T);
  dst.x0 = xi0;
  dst.x = xi;
  dst.xi0 = acc[0];
  dst.xi = acc.tail(n);
}

LiftTrajectory trace_lift_geodesic(const KropinaStructure& s, const LiftState& init,
                                   double t_max, const TraceOptions& opts) {
  const int n = s.dim;
  const LiftMetric L = lift_metric(s);

  OdeRhs rhs = [&L, n](double, const Vec& y, Vec& dy) {
    const LiftState st = LiftState::unpack(y, n);
    LiftState d;
    lift_geodesic_rhs(L, st, d);
    dy = d.packed();
  };

  std::vector<OdeEvent> events;
  events.push_back(
      {"kernel-approach", Termination::KernelApproach,
       [&s, n](double, const Vec& y, const Vec&) {
         const LiftState st = LiftState::unpack(y, n);
         const Vec w = s.oneform(st.x);
         return std::abs(w.dot(st.xi)) - 1e-12 * w.norm() * st.xi.norm();
       }});
  events.push_back({"acceleration-cap", Termination::AccelerationCap,
                    [n, cap = opts.accel_cap](double, const Vec& y, const Vec& dy) {
                      const double scale = std::max(1.0, y.tail(n + 1).norm());
                      return cap * scale - dy.tail(n + 1).norm();
                    }});

  OdeOptions oo;
  oo.rel_tol = opts.rel_tol;
  oo.abs_tol = opts.abs_tol;
  const OdeSolution sol = integrate_adaptive(rhs, init.packed(), 0.0, t_max, oo, events);

  LiftTrajectory traj;
  traj.base_dim = n;
  traj.meta.structure_label = s.label;
  traj.meta.gauge = "affine-lift";
  traj.meta.rel_tol = opts.rel_tol;
  traj.meta.abs_tol = opts.abs_tol;
  traj.meta.termination = sol.termination;
  traj.meta.accepted_steps = sol.accepted;
  traj.meta.rejected_steps = sol.rejected;
  traj.dense = sol.dense;
  for (size_t i = 0; i < sol.t.size(); ++i) {
    LiftSample smp;
    smp.t = sol.t[i];
    smp.state = LiftState::unpack(sol.y[i], n);
    const Vec w = s.oneform(smp.state.x);
    const Mat g = s.metric(smp.state.x);
    smp.p0 = w.dot(smp.state.xi);
    smp.gnorm = smp.state.xi.dot(g * smp.state.xi) + 2.0 * smp.p0 * smp.state.xi0;
    traj.samples.push_back(smp);
  }
  return traj;
}

Trajectory project_and_check(const KropinaStructure& s, const LiftTrajectory& lift,
                             const std::vector<double>& times) {
  const int n = lift.base_dim;
  Trajectory traj;
  traj.meta = lift.meta;
  traj.meta.gauge = "omega-const";  // the affine lift parameter projects to it
  KropinaStructure sc = s;
  traj.diagnostics = [sc](const Vec& x, const Vec& xi) {
    const Vec w = sc.oneform(x);
    const double om = w.dot(xi);
    const Mat g = sc.metric(x);
    const double F = om != 0 ? xi.dot(g * xi) / om : std::numeric_limits<double>::quiet_NaN();
    return std::pair<double, double>(F, om);
  };

  auto push = [&](double t, const LiftState& st) {
    const Vec w = s.oneform(st.x);
    const double om = w.dot(st.xi);
    if (std::abs(om) < 1e-12 * w.norm() * st.xi.norm()) {
      throw KernelApproach("project_and_check: omega(xi) under guard along the lift");
    }
    TrajectorySample smp;
    smp.t = t;
    smp.x = st.x;
    smp.xi = st.xi;
    auto [F, o] = traj.diagnostics(smp.x, smp.xi);
    smp.F = F;
    smp.omega_xi = o;
    traj.samples.push_back(smp);
  };

  if (times.empty()) {
    for (const auto& ls : lift.samples) push(ls.t, ls.state);
  } else {
    if (!lift.dense) throw OutOfSpan("project_and_check: lift has no dense output");
    for (double t : times) push(t, LiftState::unpack(lift.dense->at(t), n));
  }
  // The dense lift state lives in dimension 2(n+1); base-dimension queries go
  // through this projection instead of a rebuilt interpolant.
  traj.dense = nullptr;
  return traj;
}

}  // namespace kropina

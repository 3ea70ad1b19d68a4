#include "kropina/connect.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "kropina/metrics.hpp"

namespace kropina {

namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < count;) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// hyperspherical angles (n-1 of them) -> unit vector in R^n
Vec unit_from_angles(const Vec& a, int n) {
  Vec u(n);
  double s = 1.0;
  for (int k = 0; k < n - 1; ++k) {
    u[k] = s * std::cos(a[k]);
    s *= std::sin(a[k]);
  }
  u[n - 1] = s;
  return u;
}

Vec angles_from_unit(const Vec& u) {
  const int n = static_cast<int>(u.size());
  Vec a(n - 1);
  for (int k = 0; k < n - 2; ++k) {
    a[k] = std::atan2(u.tail(n - 1 - k).norm(), u[k]);
  }
  a[n - 2] = std::atan2(u[n - 1], u[n - 2]);
  return a;
}

struct ShootingContext {
  const KropinaStructure* s = nullptr;
  Vec p;
  Indicatrix ind;
  Mat Lt;  // upper Cholesky factor of g(p)
  double r = 0.0;
  double delta = 0.0;

  Vec direction(const Vec& angles) const {
    const Vec u = unit_from_angles(angles, s->dim);
    return ind.center + Lt.triangularView<Eigen::Upper>().solve(r * u);
  }
};

ShootingContext make_context(const KropinaStructure& s, const Vec& p, double delta_cap) {
  ShootingContext ctx;
  ctx.s = &s;
  ctx.p = p;
  const Mat g = s.metric(p);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) {
    throw DegenerateMetric("shooting requires positive definite g; apply modify_metric");
  }
  ctx.ind = indicatrix_of(s, p);
  ctx.Lt = Mat(llt.matrixL()).transpose();
  ctx.r = std::sqrt(ctx.ind.radius_sq);
  ctx.delta = delta_cap >= 0 ? delta_cap : 0.05 * 4.0 * ctx.ind.radius_sq;
  return ctx;
}

Trajectory shoot_trace(const ShootingContext& ctx, const Vec& angles, double T,
                       double rel_tol) {
  const Vec v = ctx.direction(angles);
  const Vec w = ctx.s->oneform(ctx.p);
  if (w.dot(v) < ctx.delta) {
    throw ShotStopped("shot direction below the omega exclusion band",
                      Termination::KernelApproach);
  }
  TraceOptions opts;
  opts.rel_tol = rel_tol;
  opts.abs_tol = 1e-12;
  Trajectory traj = trace_geodesic(*ctx.s, {ctx.p, v}, Gauge::FArclength, T, opts);
  if (traj.meta.termination != Termination::ReachedEnd) {
    throw ShotStopped("shot stopped before T: " + to_string(traj.meta.termination),
                      traj.meta.termination);
  }
  return traj;
}

}  // namespace

ShotResult shoot_endpoint(const KropinaStructure& s, const Vec& p,
                          const Vec& dir_params, double T, double delta_cap,
                          double rel_tol) {
  const ShootingContext ctx = make_context(s, p, delta_cap);
  const int n = s.dim;
  const Trajectory base = shoot_trace(ctx, dir_params, T, rel_tol);

  ShotResult out;
  out.endpoint = base.samples.back().x;
  out.jacobian = Mat::Zero(n, n);
  // angle columns by central differences
  const double h = 1e-6;
  for (int k = 0; k < n - 1; ++k) {
    Vec ap = dir_params, am = dir_params;
    ap[k] += h;
    am[k] -= h;
    const Trajectory tp = shoot_trace(ctx, ap, T, rel_tol);
    const Trajectory tm = shoot_trace(ctx, am, T, rel_tol);
    out.jacobian.col(k) = (tp.samples.back().x - tm.samples.back().x) / (2 * h);
  }
  // time column: the terminal velocity, exact
  out.jacobian.col(n - 1) = base.samples.back().xi;
  return out;
}

double path_length(const KropinaStructure& s, const Trajectory& traj) {
  for (const auto& smp : traj.samples) {
    const Vec w = s.oneform(smp.x);
    if (w.dot(smp.xi) <= 0) {
      throw NotAdmissible("path_length: omega(xi) <= 0 along the curve");
    }
  }
  // composite Simpson over a uniform dense resample when available
  std::vector<double> ts;
  std::vector<Vec> xs, xis;
  if (traj.dense && traj.samples.size() >= 2) {
    int m = std::max<int>(257, 4 * traj.samples.size() + 1);
    if (m % 2 == 0) ++m;
    ts = linspace(traj.t_begin(), traj.t_end(), m);
    const int n = static_cast<int>(traj.samples.front().x.size());
    for (double t : ts) {
      const Vec y = traj.dense->at(t);
      xs.push_back(y.head(n));
      xis.push_back(y.segment(n, n));
    }
  } else {
    for (const auto& smp : traj.samples) {
      ts.push_back(smp.t);
      xs.push_back(smp.x);
      xis.push_back(smp.xi);
    }
  }
  auto F = [&s](const Vec& x, const Vec& xi) { return eval_F(s, x, xi); };
  double total = 0.0;
  if (ts.size() >= 3 && ts.size() % 2 == 1) {
    const double h = (ts.back() - ts.front()) / (ts.size() - 1);
    double acc = F(xs.front(), xis.front()) + F(xs.back(), xis.back());
    for (size_t i = 1; i + 1 < ts.size(); ++i) {
      acc += (i % 2 == 1 ? 4.0 : 2.0) * F(xs[i], xis[i]);
    }
    total = acc * h / 3.0;
  } else {
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
      total += 0.5 * (F(xs[i], xis[i]) + F(xs[i + 1], xis[i + 1])) * (ts[i + 1] - ts[i]);
    }
  }
  return total;
}

ConnectResult connect_points(const ShootingProblem& prob) {
  const int n = prob.structure.dim;
  if ((prob.p - prob.q).norm() == 0) {
    throw KropinaError("connect_points: p and q must differ");
  }

  // shooting happens on a positive definite structure with the same traces
  KropinaStructure shoot_struct = prob.structure;
  {
    Eigen::LLT<Mat> llt(prob.structure.metric(prob.p));
    if (llt.info() != Eigen::Success) {
      shoot_struct = make_positive_definite(prob.structure, prob.p);
    }
  }
  ConnectResult result;
  result.best_residual = std::numeric_limits<double>::infinity();

  struct Solution {
    Vec angles;
    double T;
    double residual;
    double length;
    Trajectory traj;
  };
  std::vector<Solution> solutions;

  // Shot families whose target sits nearly tangent to ker omega need seeds
  // inside the default exclusion band, so the band is narrowed stepwise until
  // a connection is found.
  for (int band_level = 0; band_level < 4 && solutions.empty(); ++band_level) {
    const double band_scale = std::pow(0.125, band_level);
    ShootingContext ctx = make_context(shoot_struct, prob.p, prob.delta_cap);
    ctx.delta *= band_scale;

    // ---- coarse stage: one integration per direction, endpoints read from
    // the dense output at every time on the grid
    struct Candidate {
      Vec angles;
      double T;
      double residual;
    };
    std::vector<Candidate> candidates;

    const std::vector<Vec> dirs =
        sample_indicatrix(shoot_struct, prob.p, prob.grid_directions, ctx.delta);
    std::vector<std::vector<Candidate>> per_dir(dirs.size());
    parallel_for(static_cast<int>(dirs.size()), prob.threads, [&](int di) {
      const Vec& v = dirs[di];
      const Vec u = ctx.Lt * (v - ctx.ind.center) / ctx.r;
      const Vec angles = angles_from_unit(u);
      Trajectory traj;
      try {
        TraceOptions opts;
        opts.rel_tol = std::max(prob.rel_tol, 1e-8);  // coarse pass
        traj = trace_geodesic(shoot_struct, {prob.p, ctx.direction(angles)},
                              Gauge::FArclength, prob.t_max, opts);
      } catch (const KropinaError&) {
        return;
      }
      const double t_reach = traj.t_end();
      for (int j = 1; j <= prob.grid_times; ++j) {
        const double T = prob.t_max * j / prob.grid_times;
        if (T > t_reach || !traj.dense) break;
        const Vec x = traj.dense->at(T).head(n);
        per_dir[di].push_back({angles, T, (x - prob.q).norm()});
      }
    });
    for (const auto& block : per_dir) {
      for (const auto& cand : block) {
        result.best_residual = std::min(result.best_residual, cand.residual);
        candidates.push_back(cand);
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a,
                                                       const Candidate& b) {
      return a.residual < b.residual;
    });
    if (static_cast<int>(candidates.size()) > prob.refine_candidates) {
      candidates.resize(prob.refine_candidates);
    }

    auto endpoint_only = [&](const Vec& theta) -> std::optional<Vec> {
      if (theta[n - 1] <= 1e-6 || theta[n - 1] > 4.0 * prob.t_max) return std::nullopt;
      try {
        const Trajectory t =
            shoot_trace(ctx, theta.head(n - 1), theta[n - 1], prob.rel_tol);
        return t.samples.back().x;
      } catch (const KropinaError&) {
        return std::nullopt;
      }
    };

    // ---- refinement: Levenberg-Marquardt on (angles, T); infeasible trial
    // steps (omega band, early event stops) just raise the damping
    for (const Candidate& cand : candidates) {
      Vec theta(n);
      theta.head(n - 1) = cand.angles;
      theta[n - 1] = cand.T;

      auto e0 = endpoint_only(theta);
      if (!e0) continue;
      double res = (*e0 - prob.q).norm();
      result.best_residual = std::min(result.best_residual, res);

      double lambda = 1e-3;
      bool ok = res <= prob.endpoint_tol;
      for (int it = 0; it < prob.max_iterations && !ok; ++it) {
        ShotResult shot;
        try {
          shot = shoot_endpoint(shoot_struct, prob.p, theta.head(n - 1), theta[n - 1],
                                ctx.delta, prob.rel_tol);
        } catch (const KropinaError&) {
          break;
        }
        const Vec r = shot.endpoint - prob.q;
        const Mat JtJ = shot.jacobian.transpose() * shot.jacobian;
        const Vec Jtr = shot.jacobian.transpose() * r;
        const Mat scale =
            JtJ.diagonal().asDiagonal().toDenseMatrix() + 1e-12 * Mat::Identity(n, n);

        bool improved = false;
        for (int trial = 0; trial < 12; ++trial) {
          const Vec step = (JtJ + lambda * scale).ldlt().solve(-Jtr);
          if (!step.allFinite()) {
            lambda *= 4;
            continue;
          }
          const Vec theta_try = theta + step;
          const auto etry = endpoint_only(theta_try);
          if (etry) {
            const double res_try = (*etry - prob.q).norm();
            if (res_try < res) {
              theta = theta_try;
              res = res_try;
              result.best_residual = std::min(result.best_residual, res);
              lambda = std::max(lambda / 3, 1e-12);
              improved = true;
              break;
            }
          }
          lambda *= 4;
          if (lambda > 1e10) break;
        }
        if (res <= prob.endpoint_tol) {
          ok = true;
          break;
        }
        if (!improved) break;
      }
      if (!ok) continue;

      Solution sol;
      sol.angles = theta.head(n - 1);
      sol.T = theta[n - 1];
      try {
        sol.traj = shoot_trace(ctx, sol.angles, sol.T, prob.rel_tol);
        sol.residual = (sol.traj.samples.back().x - prob.q).norm();
        sol.length = path_length(prob.structure, sol.traj);
      } catch (const KropinaError&) {
        continue;
      }
      if (sol.residual > prob.endpoint_tol) continue;

      // distinct-solution bookkeeping by trajectory separation
      bool duplicate = false;
      for (const Solution& other : solutions) {
        if (trace_distance(sol.traj.positions(), other.traj.positions(), 64) <
            1e-3 * std::max(1.0, (prob.q - prob.p).norm())) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) solutions.push_back(std::move(sol));
    }
  }

  if (solutions.empty()) {
    result.found = false;
    return result;
  }
  std::sort(solutions.begin(), solutions.end(),
            [](const Solution& a, const Solution& b) { return a.length < b.length; });
  Solution& best = solutions.front();
  result.found = true;
  result.trajectory = std::move(best.traj);
  result.length = best.length;
  result.residual = best.residual;
  result.dir_params = best.angles;
  result.T = best.T;
  result.distinct_found = static_cast<int>(solutions.size());
  result.min_omega = std::numeric_limits<double>::infinity();
  for (const auto& smp : result.trajectory.samples) {
    result.min_omega = std::min(result.min_omega, smp.omega_xi);
  }
  return result;
}

QuasiDistanceResult quasi_distance(const KropinaStructure& s, const Vec& p,
                                   const Vec& q, int budget) {
  QuasiDistanceResult out;
  out.best_residual = std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= std::max(1, budget); ++level) {
    ShootingProblem prob;
    prob.structure = s;
    prob.p = p;
    prob.q = q;
    prob.grid_directions = 48 * level;
    prob.grid_times = 12 * level;
    prob.refine_candidates = 4 + 2 * level;
    const ConnectResult r = connect_points(prob);
    out.best_residual = std::min(out.best_residual, r.best_residual);
    if (r.found) {
      out.found = true;
      best = std::min(best, r.length);
      out.multiplicity = std::max(out.multiplicity, r.distinct_found);
    }
  }
  out.distance = best;
  return out;
}

}  // namespace kropina

#include "kropina/euler_lagrange.hpp"

#include <Eigen/Householder>
#include <Eigen/LU>

#include <cmath>

namespace kropina {

std::string to_string(Gauge g) {
  return g == Gauge::OmegaConstant ? "omega-const" : "f-arclength";
}

Tensor3 levi_civita_symbols(const KropinaStructure& s, const Vec& x) {
  const int n = s.dim;
  const Mat g = s.metric(x);
  Eigen::FullPivLU<Mat> lu(g);
  if (!lu.isInvertible()) {
    throw DegenerateMetric("levi_civita_symbols: g singular");
  }
  const Mat ginv = lu.inverse();
  const Tensor3 dg = s.dmetric(x);

  Tensor3 gamma(n, Mat::Zero(n, n));
  // Gamma_ij^k = (1/2) g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Vec low(n);  // l-indexed: d_i g_jl + d_j g_il - d_l g_ij
      for (int l = 0; l < n; ++l) {
        low[l] = dg[i](j, l) + dg[j](i, l) - dg[l](i, j);
      }
      const Vec up = 0.5 * (ginv * low);
      for (int k = 0; k < n; ++k) {
        gamma[k](i, j) = up[k];
        gamma[k](j, i) = up[k];
      }
    }
  }
  return gamma;
}

ELSystem assemble_el_system(const KropinaStructure& s, const Vec& x, const Vec& xi) {
  const int n = s.dim;
  const Vec w = s.oneform(x);
  const double u = w.dot(xi);
  if (std::abs(u) < 1e-12 * w.norm() * xi.norm()) {
    throw KernelDirection("assemble_el_system: omega(xi) below kernel guard");
  }
  const Mat g = s.metric(x);
  const Vec gxi = g * xi;            // (g xi)_k
  const double q = xi.dot(gxi);      // g(xi, xi)

  ELSystem sys;
  sys.x = x;
  sys.xi = xi;
  sys.A = g - (gxi * w.transpose() + w * gxi.transpose()) / u +
          (q / (u * u)) * (w * w.transpose());

  const Tensor3 dg = s.dmetric(x);
  const Mat dw = s.doneform(x);      // (m, l) = d_m omega_l

  // contractions of the derivative arrays with xi
  Vec P(n);      // P_k = (d_m g_kj) xi^m xi^j
  Vec dgqq(n);   // (d_k g_ij) xi^i xi^j
  double c1 = 0; // (d_m g_ij) xi^m xi^i xi^j
  for (int k = 0; k < n; ++k) {
    double pk = 0;
    for (int m = 0; m < n; ++m) pk += xi[m] * dg[m].row(k).dot(xi);
    P[k] = pk;
    dgqq[k] = xi.dot(dg[k] * xi);
    c1 += xi[k] * dgqq[k];
  }
  const Vec dwT_xi = dw.transpose() * xi;  // (d_m omega_k) xi^m
  const Vec dw_xi = dw * xi;               // (d_k omega_l) xi^l
  const double c2 = xi.dot(dw_xi);         // (d_m omega_l) xi^m xi^l

  sys.b = 0.5 * (-2.0 * P + dgqq +
                 (c1 * w + 2.0 * c2 * gxi + q * (dwT_xi - dw_xi)) / u -
                 (2.0 * q * c2 / (u * u)) * w);
  return sys;
}

Vec min_norm_acceleration(const ELSystem& sys) {
  const int n = static_cast<int>(sys.xi.size());
  Vec eta = Vec::Zero(n);
  if (n > 1) {
    // orthonormal basis of xi-perp from a Householder reflection of xi
    Eigen::HouseholderQR<Mat> qr(sys.xi);
    const Mat Q = qr.householderQ();
    const Mat N = Q.rightCols(n - 1);
    const Mat An = N.transpose() * sys.A * N;
    const Vec bn = N.transpose() * sys.b;
    Eigen::FullPivLU<Mat> lu(An);
    eta = N * lu.solve(bn);
  }
  const double res = (sys.A * eta - sys.b).norm();
  const double bound =
      1e-10 * std::max(sys.b.norm(), sys.A.norm() * eta.norm()) +
      1e-14 * sys.A.norm() * sys.xi.norm();
  if (res > bound) {
    throw InconsistentSystem(
        "min_norm_acceleration: residual bound failed; structure invalid or xi too "
        "close to ker omega");
  }
  return eta;
}

Vec gauge_fix(const KropinaStructure& s, const Vec& x, const Vec& xi,
              const Vec& eta_particular, Gauge gauge) {
  const Vec w = s.oneform(x);
  const double u = w.dot(xi);
  if (std::abs(u) < 1e-12 * w.norm() * xi.norm()) {
    throw KernelDirection("gauge_fix: omega(xi) below kernel guard");
  }
  const Mat dw = s.doneform(x);
  const double c2 = xi.dot(dw * xi);  // d/dt of omega_l along the flow, paired with xi

  if (gauge == Gauge::OmegaConstant) {
    // omega(eta) + (d_k omega_l) xi^k xi^l = 0
    const double lambda = -(w.dot(eta_particular) + c2) / u;
    return eta_particular + lambda * xi;
  }

  // FArclength: 2 g(xi,eta) + (d_k g_ij) xi^k xi^i xi^j = omega(eta) + c2
  const Mat g = s.metric(x);
  const double q = xi.dot(g * xi);
  if (q <= 0) {
    throw GaugeSingular("gauge_fix: FArclength requires g(xi, xi) > 0");
  }
  const Tensor3 dg = s.dmetric(x);
  double c1 = 0;
  for (int k = 0; k < static_cast<int>(xi.size()); ++k) {
    c1 += xi[k] * xi.dot(dg[k] * xi);
  }
  const double denom = 2.0 * q - u;  // equals u on the constraint set
  if (std::abs(denom) < 1e-12 * (std::abs(q) + std::abs(u))) {
    throw GaugeSingular("gauge_fix: FArclength gauge singular, 2 g(xi,xi) = omega(xi)");
  }
  const double lambda =
      (w.dot(eta_particular) + c2 - 2.0 * xi.dot(g * eta_particular) - c1) / denom;
  return eta_particular + lambda * xi;
}

void geodesic_rhs(const KropinaStructure& s, const GeodesicState& st, Gauge gauge,
                  Vec& dx, Vec& dxi) {
  dx = st.xi;
  const ELSystem sys = assemble_el_system(s, st.x, st.xi);
  const Vec eta = min_norm_acceleration(sys);
  dxi = gauge_fix(s, st.x, st.xi, eta, gauge);
}

Trajectory trace_geodesic(const KropinaStructure& s, const GeodesicState& init,
                          Gauge gauge, double t_max, const TraceOptions& opts) {
  const int n = s.dim;
  Vec y0(2 * n);
  y0 << init.x, init.xi;

  OdeRhs rhs = [&s, gauge, n](double, const Vec& y, Vec& dy) {
    GeodesicState st{y.head(n), y.segment(n, n)};
    Vec dx(n), dxi(n);
    geodesic_rhs(s, st, gauge, dx, dxi);
    dy.resize(2 * n);
    dy << dx, dxi;
  };

  std::vector<OdeEvent> events;
  events.push_back(
      {"kernel-approach", Termination::KernelApproach,
       [&s, n](double, const Vec& y, const Vec&) {
         const Vec x = y.head(n);
         const Vec xi = y.segment(n, n);
         const Vec w = s.oneform(x);
         return std::abs(w.dot(xi)) - 1e-12 * w.norm() * xi.norm();
       }});
  events.push_back({"acceleration-cap", Termination::AccelerationCap,
                    [n, cap = opts.accel_cap](double, const Vec& y, const Vec& dy) {
                      const double scale = std::max(1.0, y.segment(n, n).norm());
                      return cap * scale - dy.segment(n, n).norm();
                    }});
  if (opts.box) {
    events.push_back({"left-box", Termination::LeftBox,
                      [box = *opts.box, n](double, const Vec& y, const Vec&) {
                        const Vec x = y.head(n);
                        double margin = std::numeric_limits<double>::infinity();
                        for (int i = 0; i < n; ++i) {
                          margin = std::min(margin, x[i] - box.lo[i]);
                          margin = std::min(margin, box.hi[i] - x[i]);
                        }
                        return margin;
                      }});
  }

  OdeOptions oo;
  oo.rel_tol = opts.rel_tol;
  oo.abs_tol = opts.abs_tol;
  const OdeSolution sol = integrate_adaptive(rhs, y0, 0.0, t_max, oo, events);

  Trajectory traj;
  traj.meta.structure_label = s.label;
  traj.meta.gauge = to_string(gauge);
  traj.meta.rel_tol = opts.rel_tol;
  traj.meta.abs_tol = opts.abs_tol;
  traj.meta.termination = sol.termination;
  traj.meta.accepted_steps = sol.accepted;
  traj.meta.rejected_steps = sol.rejected;
  traj.dense = sol.dense;
  // owned copy so the trajectory can outlive the structure reference
  KropinaStructure sc = s;
  traj.diagnostics = [sc](const Vec& x, const Vec& xi) {
    const Vec w = sc.oneform(x);
    const double om = w.dot(xi);
    const Mat g = sc.metric(x);
    const double F = om != 0 ? xi.dot(g * xi) / om : std::numeric_limits<double>::quiet_NaN();
    return std::pair<double, double>(F, om);
  };

  for (size_t i = 0; i < sol.t.size(); ++i) {
    TrajectorySample smp;
    smp.t = sol.t[i];
    smp.x = sol.y[i].head(n);
    smp.xi = sol.y[i].segment(n, n);
    auto [F, om] = traj.diagnostics(smp.x, smp.xi);
    smp.F = F;
    smp.omega_xi = om;
    traj.samples.push_back(smp);
  }

  if (opts.resample > 1 && traj.samples.size() >= 2) {
    return resample_dense(traj, linspace(traj.t_begin(), traj.t_end(), opts.resample));
  }
  return traj;
}

}  // namespace kropina

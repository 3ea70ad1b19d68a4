// kropina - command-line front end
#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "kropina/config.hpp"
#include "kropina/connect.hpp"
#include "kropina/cr_models.hpp"
#include "kropina/equivalence.hpp"
#include "kropina/euler_lagrange.hpp"
#include "kropina/io.hpp"
#include "kropina/lift.hpp"
#include "kropina/metrics.hpp"
#include "kropina/version.hpp"

using namespace kropina;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerification = 2;

Vec parse_vec(const std::string& text, int expect_dim = -1) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      vals.push_back(std::stod(cell));
    } catch (...) {
      throw KropinaError("cannot parse '" + cell + "' as a number in '" + text + "'");
    }
  }
  if (expect_dim >= 0 && static_cast<int>(vals.size()) != expect_dim) {
    throw KropinaError("expected " + std::to_string(expect_dim) + " components in '" +
                       text + "', got " + std::to_string(vals.size()));
  }
  return Eigen::Map<const Vec>(vals.data(), vals.size());
}

std::string vec_to_string(const Vec& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

std::string join_argv(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += " ";
    out += argv[i];
  }
  return out;
}

Gauge parse_gauge(const std::string& name) {
  if (name == "omega-const") return Gauge::OmegaConstant;
  if (name == "f-arclength") return Gauge::FArclength;
  throw KropinaError("unknown gauge '" + name + "' (omega-const | f-arclength)");
}

// the only environment variable the tool reads
int env_threads() {
  const char* v = std::getenv("KROPINA_THREADS");
  if (!v) return 1;
  try {
    return std::max(1, std::stoi(v));
  } catch (...) {
    return 1;
  }
}

RunManifest base_manifest(const std::string& command, const std::string& model) {
  RunManifest m;
  m.command = command;
  m.model = model;
  m.version = engine_version();
  return m;
}

struct TraceArgs {
  std::string model, point, dir, out;
  std::string gauge = "omega-const";
  double tmax = 1.0;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int samples = 0;
  double x0_start = 0.0;
};

int run_trace(const TraceArgs& a, const std::string& command, bool via_lift) {
  const ResolvedModel model = resolve_model(a.model);
  const int n = model.structure.dim;
  const Vec p = parse_vec(a.point, n);
  const Vec dir = parse_vec(a.dir, n);
  const Gauge gauge = parse_gauge(a.gauge);

  TraceOptions opts;
  opts.rel_tol = a.rel_tol;
  opts.abs_tol = a.abs_tol;
  opts.resample = a.samples;

  Trajectory traj;
  RunManifest man = base_manifest(command, model.structure.label);
  if (via_lift) {
    const LiftState init = null_initial_lift(model.structure, {p, dir}, a.x0_start);
    const LiftTrajectory lift = trace_lift_geodesic(model.structure, init, a.tmax, opts);
    double p0_drift = 0.0, null_drift = 0.0;
    for (const auto& smp : lift.samples) {
      p0_drift = std::max(p0_drift, std::abs(smp.p0 - lift.samples.front().p0));
      null_drift = std::max(null_drift, std::abs(smp.gnorm));
    }
    std::vector<double> times;
    if (a.samples > 1) times = linspace(0.0, lift.samples.back().t, a.samples);
    traj = project_and_check(model.structure, lift, times);
    man.extra["p0_drift"] = format_double(p0_drift);
    man.extra["null_drift"] = format_double(null_drift);
    man.extra["x0_start"] = format_double(a.x0_start);
    man.gauge = "omega-const (projected null lift)";
  } else {
    traj = trace_geodesic(model.structure, {p, dir}, gauge, a.tmax, opts);
    man.gauge = to_string(gauge);
  }

  write_trajectory_csv(traj, a.out);
  man.seeds = {a.point + " ; " + a.dir};
  man.rel_tol = a.rel_tol;
  man.abs_tol = a.abs_tol;
  man.termination = to_string(traj.meta.termination);
  man.output_files = {a.out};
  write_manifest(man, manifest_path_for(a.out));
  std::cout << "wrote " << traj.samples.size() << " samples to " << a.out
            << " (termination: " << man.termination << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kropina - geodesics of Kropina metrics and CR chains"};
  app.set_version_flag("--version", engine_version());
  app.require_subcommand(1);
  const std::string command = join_argv(argc, argv);

  // ---- trace / lift-trace
  TraceArgs targs;
  auto add_trace_opts = [&](CLI::App* cmd, bool lift) {
    cmd->add_option("--model", targs.model, "model name or config file")->required();
    cmd->add_option("--point", targs.point, "start point, comma separated")->required();
    cmd->add_option("--dir", targs.dir, "start direction, comma separated")->required();
    cmd->add_option("--tmax", targs.tmax, "integration horizon");
    cmd->add_option("--rel-tol", targs.rel_tol, "relative tolerance");
    cmd->add_option("--abs-tol", targs.abs_tol, "absolute tolerance");
    cmd->add_option("--samples", targs.samples, "uniform output samples (0: knots)");
    cmd->add_option("--out", targs.out, "output CSV path")->required();
    if (lift) {
      cmd->add_option("--x0-start", targs.x0_start, "starting fiber coordinate");
    } else {
      cmd->add_option("--gauge", targs.gauge, "omega-const | f-arclength");
    }
  };
  CLI::App* trace = app.add_subcommand("trace", "integrate a geodesic");
  add_trace_opts(trace, false);
  CLI::App* lift_trace =
      app.add_subcommand("lift-trace", "integrate a null lift geodesic and project");
  add_trace_opts(lift_trace, true);

  // ---- compare
  std::string cmp_a, cmp_b, cmp_metric = "frechet";
  double cmp_tol = 1e-6;
  CLI::App* compare = app.add_subcommand("compare", "compare two trajectory files");
  compare->add_option("--a", cmp_a)->required();
  compare->add_option("--b", cmp_b)->required();
  compare->add_option("--metric", cmp_metric, "frechet | sup");
  compare->add_option("--tol", cmp_tol, "acceptance tolerance");

  // ---- connect
  std::string con_model, con_p, con_q, con_out;
  double con_tol = 1e-6, con_tmax = 3.0;
  CLI::App* connect = app.add_subcommand("connect", "two-point connection by shooting");
  connect->add_option("--model", con_model)->required();
  connect->add_option("--p", con_p)->required();
  connect->add_option("--q", con_q)->required();
  connect->add_option("--tol", con_tol, "endpoint tolerance");
  connect->add_option("--tmax", con_tmax, "max arc length");
  connect->add_option("--out", con_out, "output CSV for the chain");

  // ---- indicatrix
  std::string ind_model, ind_point, ind_out;
  int ind_samples = 100;
  double ind_cap = -1.0;
  CLI::App* indicatrix = app.add_subcommand("indicatrix", "sample the indicatrix");
  indicatrix->add_option("--model", ind_model)->required();
  indicatrix->add_option("--point", ind_point)->required();
  indicatrix->add_option("--samples", ind_samples);
  indicatrix->add_option("--delta-cap", ind_cap, "omega exclusion band");
  indicatrix->add_option("--out", ind_out)->required();

  // ---- curvature
  std::string cur_model, cur_point;
  double cur_check_tol = -1.0;
  CLI::App* curvature =
      app.add_subcommand("curvature", "Tanaka-Webster scalar curvature");
  curvature->add_option("--model", cur_model)->required();
  curvature->add_option("--point", cur_point)->required();
  curvature->add_option("--check-tol", cur_check_tol,
                        "verify against the closed form (exit 2 on mismatch)");

  // ---- blowup
  std::string blo_model, blo_point, blo_xi0, blo_v, blo_out;
  double blo_smin = 1e-4, blo_smax = 1e-1;
  int blo_count = 13;
  double blo_check = std::nan(""), blo_check_tol = 0.05;
  CLI::App* blowup = app.add_subcommand("blowup", "kernel-approach blow-up probe");
  blowup->add_option("--model", blo_model)->required();
  blowup->add_option("--point", blo_point)->required();
  blowup->add_option("--xi0", blo_xi0, "kernel direction")->required();
  blowup->add_option("--v", blo_v, "transverse direction with omega(v) = 1")->required();
  blowup->add_option("--smin", blo_smin);
  blowup->add_option("--smax", blo_smax);
  blowup->add_option("--count", blo_count, "probe count (log-spaced)");
  blowup->add_option("--check-exponent", blo_check, "expected exponent (exit 2 off)");
  blowup->add_option("--check-tol", blo_check_tol);
  blowup->add_option("--out", blo_out, "report json path");

  // ---- equiv
  CLI::App* equiv = app.add_subcommand("equiv", "equivalence checks");
  equiv->require_subcommand(1);
  std::string eq_model;
  double eq_c = 2.0;
  std::string eq_beta = "0.1*x";
  int eq_seeds = 10;
  double eq_tol = 1e-5;
  unsigned eq_seed = 2024;
  CLI::App* eq_shift =
      equiv->add_subcommand("shift", "projective shift F -> cF + d(expr)");
  eq_shift->add_option("--model", eq_model)->required();
  eq_shift->add_option("--c", eq_c, "nonzero constant");
  eq_shift->add_option("--beta", eq_beta, "potential of the closed shift form");
  eq_shift->add_option("--seeds", eq_seeds);
  eq_shift->add_option("--tol", eq_tol, "trace distance tolerance");
  eq_shift->add_option("--seed", eq_seed, "rng seed");

  std::string eqc_model;
  int eqc_seeds = 10;
  double eqc_tol = 1e-6;
  unsigned eqc_seed = 2024;
  CLI::App* eq_conn =
      equiv->add_subcommand("connection", "closed-omega affine connection check");
  eq_conn->add_option("--model", eqc_model)->required();
  eq_conn->add_option("--seeds", eqc_seeds);
  eq_conn->add_option("--tol", eqc_tol, "pregeodesic residual tolerance");
  eq_conn->add_option("--seed", eqc_seed, "rng seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*trace) return run_trace(targs, command, false);
    if (*lift_trace) return run_trace(targs, command, true);

    if (*compare) {
      const Trajectory a = read_trajectory_csv(cmp_a);
      const Trajectory b = read_trajectory_csv(cmp_b);
      double dist;
      if (cmp_metric == "frechet") {
        dist = trace_distance(a.positions(), b.positions());
      } else if (cmp_metric == "sup") {
        dist = sup_distance(a, b);
      } else {
        throw KropinaError("unknown metric '" + cmp_metric + "' (frechet | sup)");
      }
      std::cout << cmp_metric << " distance = " << format_double(dist)
                << " (tol " << format_double(cmp_tol) << ")\n";
      return dist <= cmp_tol ? kExitOk : kExitVerification;
    }

    if (*connect) {
      const ResolvedModel model = resolve_model(con_model);
      ShootingProblem prob;
      prob.structure = model.structure;
      prob.p = parse_vec(con_p, model.structure.dim);
      prob.q = parse_vec(con_q, model.structure.dim);
      prob.endpoint_tol = con_tol;
      prob.t_max = con_tmax;
      prob.threads = env_threads();
      const ConnectResult res = connect_points(prob);
      if (!res.found) {
        std::cout << "no connecting geodesic found (best residual "
                  << format_double(res.best_residual)
                  << "); not a non-existence certificate\n";
        return kExitVerification;
      }
      std::cout << "chain found: length = " << format_double(res.length)
                << ", residual = " << format_double(res.residual)
                << ", min omega(xi) = " << format_double(res.min_omega)
                << ", distinct = " << res.distinct_found << "\n";
      if (!con_out.empty()) {
        write_trajectory_csv(res.trajectory, con_out);
        RunManifest man = base_manifest(command, model.structure.label);
        man.gauge = "f-arclength";
        man.seeds = {vec_to_string(res.trajectory.samples.front().x) + " ; " +
                     vec_to_string(res.trajectory.samples.front().xi)};
        man.rel_tol = prob.rel_tol;
        man.termination = "connected";
        man.extra["length"] = format_double(res.length);
        man.extra["residual"] = format_double(res.residual);
        man.extra["min_omega"] = format_double(res.min_omega);
        man.extra["distinct"] = std::to_string(res.distinct_found);
        man.extra["T"] = format_double(res.T);
        man.output_files = {con_out};
        write_manifest(man, manifest_path_for(con_out));
      }
      return kExitOk;
    }

    if (*indicatrix) {
      const ResolvedModel model = resolve_model(ind_model);
      const int n = model.structure.dim;
      const Vec p = parse_vec(ind_point, n);
      const auto vs = sample_indicatrix(model.structure, p, ind_samples, ind_cap);
      std::ofstream out(ind_out);
      if (!out) throw IOFailure("cannot open '" + ind_out + "'");
      for (int i = 1; i <= n; ++i) out << (i > 1 ? "," : "") << "v" << i;
      out << ",F\n";
      for (const Vec& v : vs) {
        out << vec_to_string(v) << ","
            << format_double(eval_F(model.structure, p, v)) << "\n";
      }
      out.close();
      RunManifest man = base_manifest(command, model.structure.label);
      man.extra["samples"] = std::to_string(vs.size());
      man.output_files = {ind_out};
      write_manifest(man, manifest_path_for(ind_out));
      std::cout << "wrote " << vs.size() << " indicatrix samples to " << ind_out << "\n";
      return kExitOk;
    }

    if (*curvature) {
      const ResolvedModel model = resolve_model(cur_model);
      if (!model.cr.has_value()) {
        throw KropinaError("model '" + cur_model + "' carries no CR data");
      }
      const int n = model.cr->cr_dim;
      const Vec p = parse_vec(cur_point, 2 * n + 1);
      const double formula = tw_scalar_curvature(*model.cr, p);
      std::cout << "R_formula = " << format_double(formula) << "\n";
      Eigen::VectorXcd z(n);
      for (int a = 0; a < n; ++a) z[a] = std::complex<double>(p[a], p[n + a]);
      const double closed = burns_shnider_scalar(n, z, p[2 * n]);
      std::cout << "R_closed_form = " << format_double(closed)
                << "  (valid for the burns-shnider rescaling)\n";
      if (cur_check_tol > 0) {
        const double diff = std::abs(formula - closed);
        std::cout << "|difference| = " << format_double(diff) << "\n";
        return diff <= cur_check_tol ? kExitOk : kExitVerification;
      }
      return kExitOk;
    }

    if (*blowup) {
      const ResolvedModel model = resolve_model(blo_model);
      const int n = model.structure.dim;
      const Vec p = parse_vec(blo_point, n);
      const Vec xi0 = parse_vec(blo_xi0, n);
      const Vec v = parse_vec(blo_v, n);
      std::vector<double> svals;
      for (int k = 0; k < blo_count; ++k) {
        const double f = blo_count > 1 ? static_cast<double>(k) / (blo_count - 1) : 0.0;
        svals.push_back(blo_smax * std::pow(blo_smin / blo_smax, f));
      }
      const BlowupReport rep = blowup_probe(model.structure, p, xi0, v, svals);
      std::cout << "fitted exponent = " << format_double(rep.fitted_exponent) << "\n";
      RunManifest man = base_manifest(command, model.structure.label);
      man.extra["fitted_exponent"] = format_double(rep.fitted_exponent);
      man.extra["xi0_in_exceptional_set"] = rep.xi0_in_exceptional_set ? "true" : "false";
      std::string probes;
      for (const auto& pr : rep.probes) {
        probes += "(" + format_double(pr.s) + "," + format_double(pr.omega_xi) + "," +
                  format_double(pr.eta_norm) + ")";
      }
      man.extra["probes"] = probes;
      if (!blo_out.empty()) {
        std::ofstream out(blo_out);
        out << "s,omega_xi,eta_norm\n";
        for (const auto& pr : rep.probes) {
          out << format_double(pr.s) << "," << format_double(pr.omega_xi) << ","
              << format_double(pr.eta_norm) << "\n";
        }
        man.output_files = {blo_out};
        write_manifest(man, manifest_path_for(blo_out));
      }
      if (!std::isnan(blo_check)) {
        return std::abs(rep.fitted_exponent - blo_check) <= blo_check_tol
                   ? kExitOk
                   : kExitVerification;
      }
      return kExitOk;
    }

    if (*eq_shift) {
      const ResolvedModel model = resolve_model(eq_model);
      const int n = model.structure.dim;
      const std::vector<std::string> names =
          n == 3 ? std::vector<std::string>{"x", "y", "t"} : cr_coord_names((n - 1) / 2);
      const ExprPtr pot = parse_expression(eq_beta, names);
      std::vector<ExprPtr> dpot(n);
      for (int k = 0; k < n; ++k) dpot[k] = diff(pot, k);
      CovectorField beta;
      beta.value = [dpot, n](const Vec& x) {
        Vec out(n);
        for (int k = 0; k < n; ++k) out[k] = eval(dpot[k], x);
        return out;
      };
      beta.jacobian = [dpot, n](const Vec& x) {
        Mat out(n, n);
        for (int k = 0; k < n; ++k)
          for (int j = 0; j < n; ++j) out(k, j) = eval(diff(dpot[j], k), x);
        return out;
      };
      const auto shifted = projective_shift(model.structure, eq_c, beta);

      std::mt19937 rng(eq_seed);
      std::uniform_real_distribution<double> d(-1.0, 1.0);
      TraceOptions opts;
      opts.rel_tol = 1e-10;
      double worst = 0;
      int used = 0;
      for (int s = 0; s < eq_seeds; ++s) {
        Vec xi(n);
        const Vec w = model.structure.oneform(Vec::Zero(n));
        do {
          for (int i = 0; i < n; ++i) xi[i] = d(rng);
        } while (std::abs(w.dot(xi)) < 0.3 * w.norm() * xi.norm());
        try {
          // shared seed in omega-constant gauge: cF + beta rides the same
          // trajectory for any c != 0
          const auto a = trace_geodesic(model.structure, {Vec::Zero(n), xi},
                                        Gauge::OmegaConstant, 0.8, opts);
          const auto b =
              trace_geodesic(shifted, {Vec::Zero(n), xi}, Gauge::OmegaConstant, 0.8, opts);
          worst = std::max(worst, trace_distance(a.positions(), b.positions()));
          ++used;
        } catch (const KropinaError&) {
          continue;
        }
      }
      std::cout << "max trace distance over " << used
                << " seeds = " << format_double(worst) << " (tol "
                << format_double(eq_tol) << ")\n";
      return (used > 0 && worst <= eq_tol) ? kExitOk : kExitVerification;
    }

    if (*eq_conn) {
      const ResolvedModel model = resolve_model(eqc_model);
      const int n = model.structure.dim;
      try {
        closed_form_connection(model.structure, Vec::Zero(n));
      } catch (const NotClosed&) {
        std::cout << "NotClosed: omega is not closed; no affine connection shares "
                     "these geodesics\n";
        return kExitVerification;
      }
      auto symbols = [&model](const Vec& x) {
        return closed_form_connection(model.structure, x);
      };
      std::mt19937 rng(eqc_seed);
      std::uniform_real_distribution<double> d(-0.4, 0.4);
      TraceOptions opts;
      opts.rel_tol = 1e-10;
      double worst = 0;
      int used = 0;
      for (int s = 0; s < eqc_seeds; ++s) {
        Vec x(n), xi(n);
        for (int i = 0; i < n; ++i) x[i] = d(rng);
        const Vec w = model.structure.oneform(x);
        do {
          for (int i = 0; i < n; ++i) xi[i] = d(rng);
        } while (std::abs(w.dot(xi)) < 0.3 * w.norm() * xi.norm());
        xi /= xi.norm();
        try {
          const auto traj =
              trace_geodesic(model.structure, {x, xi}, Gauge::OmegaConstant, 1.0, opts);
          if (traj.meta.termination != Termination::ReachedEnd) continue;
          worst = std::max(worst, pregeodesic_residual(traj, symbols));
          ++used;
        } catch (const KropinaError&) {
          continue;
        }
      }
      std::cout << "max pregeodesic residual over " << used
                << " seeds = " << format_double(worst) << " (tol "
                << format_double(eqc_tol) << ")\n";
      return (used > 0 && worst <= eqc_tol) ? kExitOk : kExitVerification;
    }
  } catch (const KropinaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

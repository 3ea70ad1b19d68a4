#include "kropina/cr_models.hpp"

#include <Eigen/LU>

#include <cmath>

namespace kropina {

namespace {

// Complex-valued expressions as (re, im) tree pairs. Enough arithmetic for
// the frame calculus below.
struct CExpr {
  ExprPtr re, im;
};

CExpr cx(ExprPtr re, ExprPtr im) { return {std::move(re), std::move(im)}; }
CExpr cx(double re, double im = 0.0) { return {constant(re), constant(im)}; }
CExpr from_real(ExprPtr re) { return {std::move(re), constant(0)}; }

CExpr operator+(const CExpr& a, const CExpr& b) { return {a.re + b.re, a.im + b.im}; }
CExpr operator-(const CExpr& a, const CExpr& b) { return {a.re - b.re, a.im - b.im}; }
CExpr operator*(const CExpr& a, const CExpr& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
CExpr conj(const CExpr& a) { return {a.re, -a.im}; }
ExprPtr norm_sq(const CExpr& a) { return a.re * a.re + a.im * a.im; }

// coordinate layout: x_a -> a, y_a -> n + a, t -> 2n  (a = 0..n-1)
int ix(int a, int) { return a; }
int iy(int a, int n) { return n + a; }
int it(int n) { return 2 * n; }

CExpr cdiff(const CExpr& f, int var) { return {diff(f.re, var), diff(f.im, var)}; }

// Z_a f = (1/2)(d/dx_a - i d/dy_a) f + i conj(z_a) d/dt f
CExpr frame_Z(const CExpr& f, int a, int n) {
  const CExpr dx = cdiff(f, ix(a, n));
  const CExpr dy = cdiff(f, iy(a, n));
  const CExpr dt = cdiff(f, it(n));
  // i (x_a - i y_a) = y_a + i x_a
  const CExpr coef = cx(variable(iy(a, n)), variable(ix(a, n)));
  return cx(0.5) * dx + cx(0.0, -0.5) * dy + coef * dt;
}

// Zbar_a f = (1/2)(d/dx_a + i d/dy_a) f - i z_a d/dt f
CExpr frame_Zbar(const CExpr& f, int a, int n) {
  const CExpr dx = cdiff(f, ix(a, n));
  const CExpr dy = cdiff(f, iy(a, n));
  const CExpr dt = cdiff(f, it(n));
  // -i (x_a + i y_a) = y_a - i x_a
  const CExpr coef = cx(variable(iy(a, n)), -variable(ix(a, n)));
  return cx(0.5) * dx + cx(0.0, 0.5) * dy + coef * dt;
}

// components of the flat contact form theta0 = dt + 2 sum(x dy - y dx)
std::vector<ExprPtr> theta0_components(int n) {
  std::vector<ExprPtr> w(2 * n + 1);
  for (int a = 0; a < n; ++a) {
    w[ix(a, n)] = constant(-2) * variable(iy(a, n));
    w[iy(a, n)] = constant(2) * variable(ix(a, n));
  }
  w[it(n)] = constant(1);
  return w;
}

// components of the complex coframe dz^a
CExpr dz_component(int a, int j, int n) {
  if (j == ix(a, n)) return cx(1.0);
  if (j == iy(a, n)) return cx(0.0, 1.0);
  return cx(0.0);
}

double checked_eval(const ExprPtr& e, const Vec& p) {
  const double v = eval(e, p);
  if (!std::isfinite(v)) {
    throw SingularPoint("expression evaluation not finite at the requested point");
  }
  return v;
}

// e^{-U} [ (n+1) Delta_b U - n(n+1) U_a U^a ] as a tree; Delta_b U =
// -Re sum_a Z_a Zbar_a U on the flat model, U^a = (1/2) Zbar_a U.
ExprPtr tw_curvature_tree(const CRModelSpec& spec) {
  const int n = spec.cr_dim;
  const CExpr U = from_real(spec.upsilon);
  ExprPtr lap = constant(0);   // Re sum Z_a Zbar_a U
  ExprPtr grad = constant(0);  // sum |Z_a U|^2
  for (int a = 0; a < n; ++a) {
    const CExpr Za = frame_Z(U, a, n);
    const CExpr ZZbar = frame_Z(frame_Zbar(U, a, n), a, n);
    lap = lap + ZZbar.re;
    grad = grad + norm_sq(Za);
  }
  const double np1 = n + 1;
  const ExprPtr bracket =
      constant(-np1) * lap - constant(0.5 * n * np1) * grad;
  return exp_expr(-spec.upsilon) * bracket;
}

}  // namespace

std::vector<std::string> cr_coord_names(int n) {
  std::vector<std::string> names(2 * n + 1);
  if (n == 1) {
    names = {"x", "y", "t"};
  } else {
    for (int a = 0; a < n; ++a) {
      names[a] = "x" + std::to_string(a + 1);
      names[n + a] = "y" + std::to_string(a + 1);
    }
    names[2 * n] = "t";
  }
  return names;
}

CRModelSpec cr_model_from_text(int n, const std::string& upsilon_text,
                               std::string label) {
  CRModelSpec spec;
  spec.cr_dim = n;
  spec.upsilon = parse_expression(upsilon_text, cr_coord_names(n));
  spec.label = label.empty() ? ("rescaled:" + std::to_string(n)) : std::move(label);
  return spec;
}

ExprPtr burns_shnider_upsilon(int n) {
  // -2 log rho = -(1/2) log(|z|^4 + t^2)
  ExprPtr zsq = constant(0);
  for (int a = 0; a < n; ++a) {
    zsq = zsq + variable(ix(a, n)) * variable(ix(a, n)) +
          variable(iy(a, n)) * variable(iy(a, n));
  }
  const ExprPtr rho4 = zsq * zsq + variable(it(n)) * variable(it(n));
  return constant(-0.5) * log_expr(rho4);
}

KropinaStructure heisenberg_kropina(int n) {
  const int dim = 2 * n + 1;
  Mat g0 = Mat::Zero(dim, dim);
  for (int a = 0; a < 2 * n; ++a) g0(a, a) = 2.0;

  // d_k omega_j: omega_x = -2y, omega_y = 2x, omega_t = 1
  Mat dw0 = Mat::Zero(dim, dim);
  for (int a = 0; a < n; ++a) {
    dw0(iy(a, n), ix(a, n)) = -2.0;  // d_y omega_x
    dw0(ix(a, n), iy(a, n)) = 2.0;   // d_x omega_y
  }

  KropinaStructure s;
  s.dim = dim;
  s.label = "heisenberg:" + std::to_string(n);
  s.derivative_mode = DerivativeMode::Analytic;
  s.metric = [g0](const Vec&) { return g0; };
  s.oneform = [n, dim](const Vec& x) {
    Vec w = Vec::Zero(dim);
    for (int a = 0; a < n; ++a) {
      w[ix(a, n)] = -2.0 * x[iy(a, n)];
      w[iy(a, n)] = 2.0 * x[ix(a, n)];
    }
    w[it(n)] = 1.0;
    return w;
  };
  s.dmetric = [dim](const Vec&) { return Tensor3(dim, Mat::Zero(dim, dim)); };
  s.doneform = [dw0](const Vec&) { return dw0; };
  return s;
}

KropinaStructure rescaled_kropina(const CRModelSpec& spec, PluriharmonicReport* report) {
  const int n = spec.cr_dim;
  const int dim = 2 * n + 1;
  const CExpr U = from_real(spec.upsilon);
  const ExprPtr eU = exp_expr(spec.upsilon);
  const std::vector<ExprPtr> th0 = theta0_components(n);
  const ExprPtr Rhat = tw_curvature_tree(spec);

  // hatted coframe theta^a + i Upsilon^a theta0, Upsilon^a = (1/2) Zbar_a U
  std::vector<std::vector<CExpr>> coframe(n, std::vector<CExpr>(dim));
  for (int a = 0; a < n; ++a) {
    const CExpr Uup = cx(0.5) * frame_Zbar(U, a, n);
    const CExpr iUup = cx(0.0, 1.0) * Uup;
    for (int j = 0; j < dim; ++j) {
      coframe[a][j] = dz_component(a, j, n) + iUup * from_real(th0[j]);
    }
  }

  // g_ij = 2 e^U sum_a Re(theta^a_i conj(theta^a_j))
  //        + (e^{2U} Rhat / (n(n+1))) theta0_i theta0_j
  const ExprPtr curv_coef =
      eU * eU * Rhat / constant(static_cast<double>(n) * (n + 1));
  std::vector<std::vector<ExprPtr>> g(dim, std::vector<ExprPtr>(dim));
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      ExprPtr levi = constant(0);
      for (int a = 0; a < n; ++a) {
        levi = levi + (coframe[a][i] * conj(coframe[a][j])).re;
      }
      ExprPtr gij = constant(2) * eU * levi + curv_coef * th0[i] * th0[j];
      g[i][j] = gij;
      g[j][i] = gij;
    }
  }
  std::vector<ExprPtr> omega(dim);
  for (int j = 0; j < dim; ++j) omega[j] = eU * th0[j];

  // derivative trees
  std::vector<std::vector<std::vector<ExprPtr>>> dg(
      dim, std::vector<std::vector<ExprPtr>>(dim, std::vector<ExprPtr>(dim)));
  std::vector<std::vector<ExprPtr>> dw(dim, std::vector<ExprPtr>(dim));
  for (int k = 0; k < dim; ++k) {
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        dg[k][i][j] = diff(g[i][j], k);
        dg[k][j][i] = dg[k][i][j];
      }
      dw[k][i] = diff(omega[i], k);
    }
  }

  KropinaStructure s;
  s.dim = dim;
  s.label = spec.label.empty() ? "rescaled" : spec.label;
  s.derivative_mode = DerivativeMode::Analytic;
  s.metric = [g, dim](const Vec& x) {
    Mat out(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        out(i, j) = eval(g[i][j], x);
        out(j, i) = out(i, j);
      }
    return out;
  };
  s.oneform = [omega, dim](const Vec& x) {
    Vec out(dim);
    for (int j = 0; j < dim; ++j) out[j] = eval(omega[j], x);
    return out;
  };
  s.dmetric = [dg, dim](const Vec& x) {
    Tensor3 out(dim, Mat(dim, dim));
    for (int k = 0; k < dim; ++k)
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
          out[k](i, j) = eval(dg[k][i][j], x);
          out[k](j, i) = out[k](i, j);
        }
    return out;
  };
  s.doneform = [dw, dim](const Vec& x) {
    Mat out(dim, dim);
    for (int k = 0; k < dim; ++k)
      for (int j = 0; j < dim; ++j) out(k, j) = eval(dw[k][j], x);
    return out;
  };

  if (report) {
    // probe the pluriharmonicity residual away from coordinate axes, where
    // typical conformal factors (Heisenberg-norm powers) are smooth
    *report = PluriharmonicReport{};
    const std::vector<double> offsets = {0.6, -0.45, 0.8, 1.1, -0.7};
    int used = 0;
    for (size_t trial = 0; trial < offsets.size(); ++trial) {
      Vec p(dim);
      for (int j = 0; j < dim; ++j) {
        p[j] = offsets[(trial + j) % offsets.size()] * (1.0 + 0.1 * j);
      }
      try {
        const PluriharmonicReport r = pluriharmonic_residual(spec, p);
        report->res1 = std::max(report->res1, r.res1);
        report->res2 = std::max(report->res2, r.res2);
        ++used;
      } catch (const SingularPoint&) {
        continue;
      }
    }
    report->ok = used > 0 && report->res1 <= 1e-6 && report->res2 <= 1e-6;
  }
  return s;
}

double tw_scalar_curvature(const CRModelSpec& spec, const Vec& point) {
  const ExprPtr tree = tw_curvature_tree(spec);
  return checked_eval(tree, point);
}

double burns_shnider_scalar(int n, const Eigen::VectorXcd& z, double t) {
  const double zsq = z.squaredNorm();
  if (zsq == 0.0 && t == 0.0) {
    throw OriginExcluded("burns_shnider_scalar: Heisenberg norm vanishes at the origin");
  }
  const double rho_sq = std::sqrt(zsq * zsq + t * t);
  return n * (n + 1) * zsq / (2.0 * rho_sq);
}

double burns_shnider_scalar(int n, std::complex<double> z, double t) {
  Eigen::VectorXcd v(1);
  v[0] = z;
  return burns_shnider_scalar(n, v, t);
}

PluriharmonicReport pluriharmonic_residual(const CRModelSpec& spec, const Vec& point) {
  const int n = spec.cr_dim;
  const CExpr U = from_real(spec.upsilon);

  // trace part: D = grad_g grad^g U = (1/2) sum_g Z_g Zbar_g U
  CExpr D = cx(0.0);
  for (int g = 0; g < n; ++g) {
    D = D + cx(0.5) * frame_Z(frame_Zbar(U, g, n), g, n);
  }

  PluriharmonicReport rep;
  // first condition: grad_a grad_bbar U = (1/n) D h_{a bbar}, h = 2 delta;
  // holds identically for n = 1
  double sum1 = 0.0;
  if (n >= 2) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        // grad_a grad_bbar U = Z_a (Zbar_b U) on the flat model
        CExpr defect = frame_Z(frame_Zbar(U, b, n), a, n);
        if (a == b) defect = defect - cx(2.0 / n) * D;
        const double re = checked_eval(defect.re, point);
        const double im = checked_eval(defect.im, point);
        sum1 += re * re + im * im;
      }
    }
  }
  rep.res1 = std::sqrt(sum1);

  // second condition: grad_a grad_b grad^b U = 0 on the flat model
  double sum2 = 0.0;
  for (int a = 0; a < n; ++a) {
    const CExpr third = frame_Z(D, a, n);
    const double re = checked_eval(third.re, point);
    const double im = checked_eval(third.im, point);
    sum2 += re * re + im * im;
  }
  rep.res2 = std::sqrt(sum2);
  rep.ok = rep.res1 <= 1e-6 && rep.res2 <= 1e-6;
  return rep;
}

double contact_volume(const KropinaStructure& s, const Vec& x) {
  const int n = s.dim;
  const Vec w = s.oneform(x);
  const Mat dwm = s.doneform(x);
  const Mat C = dwm - dwm.transpose();  // d omega(X, Y) = X^T C Y
  if (n == 3) {
    // omega wedge d omega against dx^1 dx^2 dx^3
    return w[0] * C(1, 2) - w[1] * C(0, 2) + w[2] * C(0, 1);
  }
  // general odd dimension: the skew bordered matrix [[0, w^T], [-w, C]] is
  // nonsingular exactly when omega wedge (d omega)^m does not vanish
  Mat B = Mat::Zero(n + 1, n + 1);
  B.block(0, 1, 1, n) = w.transpose();
  B.block(1, 0, n, 1) = -w;
  B.block(1, 1, n, n) = C;
  return B.determinant();
}

}  // namespace kropina

#include "ipd/prox.hpp"

#include <algorithm>
#include <cmath>

#include "ipd/operators.hpp"

namespace ipd {

std::string to_string(ApproxType t) {
  switch (t) {
    case ApproxType::exact: return "exact";
    case ApproxType::type0: return "type0";
    case ApproxType::type1: return "type1";
    case ApproxType::type2: return "type2";
    case ApproxType::type3: return "type3";
  }
  return "unknown";
}

ProxSubproblem::ProxSubproblem(RealGrid a, double t, double l)
    : anchor(std::move(a)), tau(t), lambda(l) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error("ProxSubproblem: tau must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error("ProxSubproblem: lambda must be nonnegative");
  }
}

double tv_seminorm(const RealGrid& u) { return norms(apply_gradient(u)).l1; }

double ProxSubproblem::primal_value(const RealGrid& x) const {
  return distance_squared(x, anchor) / (2.0 * tau) + lambda * tv_seminorm(x);
}

double ProxSubproblem::dual_value(const VectorField& z) const {
  const RealGrid d = apply_divergence(z);
  return 0.5 * tau * inner_product(d, d) + inner_product(d, anchor);
}

RealGrid ProxSubproblem::recover_primal(const VectorField& z) const {
  RealGrid x = apply_divergence(z);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = anchor[k] + tau * x[k];
  return x;
}

RealGrid soft_threshold(const RealGrid& y, double kappa) {
  if (!(kappa >= 0.0)) throw Error("soft_threshold: kappa must be nonnegative");
  RealGrid out(y.shape());
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double a = std::abs(y[k]) - kappa;
    out[k] = a > 0.0 ? std::copysign(a, y[k]) : 0.0;
  }
  return out;
}

RealGrid project_box(const RealGrid& p, double lambda) {
  if (!(lambda > 0.0)) throw Error("project_box: lambda must be positive");
  RealGrid out(p.shape());
  for (std::size_t k = 0; k < p.size(); ++k) out[k] = std::clamp(p[k], -lambda, lambda);
  return out;
}

VectorField project_box(const VectorField& p, double lambda) {
  return {project_box(p.dx, lambda), project_box(p.dy, lambda)};
}

RealGrid dual_prox_l2_data(const RealGrid& ybar, double sigma, const RealGrid& f) {
  if (!(sigma > 0.0)) throw Error("dual_prox_l2_data: sigma must be positive");
  require_same_shape(ybar, f, "dual_prox_l2_data");
  RealGrid out(ybar.shape());
  for (std::size_t k = 0; k < ybar.size(); ++k) out[k] = (ybar[k] - sigma * f[k]) / (1.0 + sigma);
  return out;
}

RealGrid dual_prox_l1_data(const RealGrid& ybar, double sigma, const RealGrid& f) {
  if (!(sigma > 0.0)) throw Error("dual_prox_l1_data: sigma must be positive");
  require_same_shape(ybar, f, "dual_prox_l1_data");
  RealGrid out(ybar.shape());
  for (std::size_t k = 0; k < ybar.size(); ++k) {
    out[k] = std::clamp(ybar[k] - sigma * f[k], -1.0, 1.0);
  }
  return out;
}

double duality_gap(const ProxSubproblem& sub, const RealGrid& x, const VectorField& z) {
  require_same_shape(x, sub.anchor, "duality_gap");
  if (sub.lambda == 0.0) return sub.primal_value(x);
  return sub.primal_value(x) + sub.dual_value(project_box(z, sub.lambda));
}

namespace {

// sum over entries of lambda |g| - z g; every term is >= 0 when |z| <= lambda,
// also in floating point since rounding is monotone. Four interleaved partial
// sums combined in a fixed order keep the result reproducible.
double fenchel_young_part(double lambda, const RealGrid& zc, const RealGrid& gc) {
  const double* z = zc.data().data();
  const double* g = gc.data().data();
  const std::size_t n = gc.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += lambda * std::abs(g[k]) - z[k] * g[k];
    s1 += lambda * std::abs(g[k + 1]) - z[k + 1] * g[k + 1];
    s2 += lambda * std::abs(g[k + 2]) - z[k + 2] * g[k + 2];
    s3 += lambda * std::abs(g[k + 3]) - z[k + 3] * g[k + 3];
  }
  for (; k < n; ++k) s0 += lambda * std::abs(g[k]) - z[k] * g[k];
  return (s0 + s1) + (s2 + s3);
}

double fenchel_young_sum(double lambda, const VectorField& z, const VectorField& g) {
  return fenchel_young_part(lambda, z.dx, g.dx) + fenchel_young_part(lambda, z.dy, g.dy);
}

// <w - zn, zn - z> over one component, same summation pattern
double restart_part(const RealGrid& wc, const RealGrid& znc, const RealGrid& zc) {
  const double* w = wc.data().data();
  const double* zn = znc.data().data();
  const double* z = zc.data().data();
  const std::size_t n = wc.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += (w[k] - zn[k]) * (zn[k] - z[k]);
    s1 += (w[k + 1] - zn[k + 1]) * (zn[k + 1] - z[k + 1]);
    s2 += (w[k + 2] - zn[k + 2]) * (zn[k + 2] - z[k + 2]);
    s3 += (w[k + 3] - zn[k + 3]) * (zn[k + 3] - z[k + 3]);
  }
  for (; k < n; ++k) s0 += (w[k] - zn[k]) * (zn[k] - z[k]);
  return (s0 + s1) + (s2 + s3);
}

void recover_into(const ProxSubproblem& sub, const VectorField& z, RealGrid& x) {
  divergence_into(z, x);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = sub.anchor[k] + sub.tau * x[k];
}

}  // namespace

double recovered_gap(const ProxSubproblem& sub, const VectorField& z) {
  const RealGrid x = sub.recover_primal(z);
  return fenchel_young_sum(sub.lambda, z, apply_gradient(x));
}

TvProxResult solve_tv_prox(const ProxSubproblem& sub, double eps_target,
                           const VectorField* warm_z, int max_inner, double step_scale,
                           std::vector<double>* gap_trace, bool restart) {
  if (!(eps_target > 0.0)) throw Error("solve_tv_prox: eps_target must be positive");
  if (max_inner < 1) throw Error("solve_tv_prox: max_inner must be >= 1");
  if (!(step_scale > 0.0 && step_scale <= 1.0)) {
    throw Error("solve_tv_prox: step_scale must lie in (0,1]");
  }
  const Shape sh = sub.anchor.shape();
  const double lam = sub.lambda;

  TvProxResult res{RealGrid(sh), VectorField(sh), {}};
  res.cert.approx_type = ApproxType::type2;
  res.cert.target_eps = eps_target;

  if (lam == 0.0) {
    // prox of the zero function
    res.x = sub.anchor;
    res.cert.converged = true;
    if (gap_trace) gap_trace->push_back(0.0);
    return res;
  }

  VectorField z(sh);
  if (warm_z) {
    if (warm_z->shape() != sh) throw Error("solve_tv_prox: warm start shape mismatch");
    z = project_box(*warm_z, lam);
  }
  RealGrid x(sh);
  VectorField gz(sh);
  recover_into(sub, z, x);
  gradient_into(x, gz);
  double gap = fenchel_young_sum(lam, z, gz);
  if (gap_trace) gap_trace->push_back(gap);

  double best_gap = gap;
  res.x = x;
  res.z = z;
  auto finish = [&](bool ok) {
    res.cert.achieved_gap = std::max(best_gap, 0.0);
    res.cert.converged = ok;
    res.cert.distance_bound = std::sqrt(2.0 * sub.tau * res.cert.achieved_gap);
    return res;
  };
  if (gap <= eps_target) {
    res.cert.inner_iterations = 0;
    return finish(true);
  }

  const double s = step_scale / (8.0 * sub.tau);
  VectorField w = z, gw = gz;
  VectorField zn(sh), gn(sh);
  double t = 1.0;
  const std::size_t n = z.dx.size();
  for (int k = 1; k <= max_inner; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      zn.dx[i] = std::clamp(w.dx[i] + s * gw.dx[i], -lam, lam);
      zn.dy[i] = std::clamp(w.dy[i] + s * gw.dy[i], -lam, lam);
    }
    recover_into(sub, zn, x);
    gradient_into(x, gn);
    gap = fenchel_young_sum(lam, zn, gn);
    if (gap_trace) gap_trace->push_back(gap);
    res.cert.inner_iterations = k;
    if (gap < best_gap) {
      best_gap = gap;
      res.x = x;
      res.z = zn;
    }
    if (gap <= eps_target) return finish(true);

    // restart test: the step zn - w against the momentum direction zn - z
    bool reset = false;
    if (restart) {
      const double dot = restart_part(w.dx, zn.dx, z.dx) + restart_part(w.dy, zn.dy, z.dy);
      reset = dot > 0.0;
    }
    double beta = 0.0;
    if (reset) {
      t = 1.0;
    } else {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      beta = (t - 1.0) / tn;
      t = tn;
    }
    // grad x is affine in z, so the extrapolated gradient needs no new stencil
    for (std::size_t i = 0; i < n; ++i) {
      w.dx[i] = zn.dx[i] + beta * (zn.dx[i] - z.dx[i]);
      w.dy[i] = zn.dy[i] + beta * (zn.dy[i] - z.dy[i]);
      gw.dx[i] = gn.dx[i] + beta * (gn.dx[i] - gz.dx[i]);
      gw.dy[i] = gn.dy[i] + beta * (gn.dy[i] - gz.dy[i]);
    }
    std::swap(z, zn);
    std::swap(gz, gn);
  }
  return finish(false);
}

double tv_subgradient_residual(const ProxSubproblem& sub, const RealGrid& x,
                               const VectorField& z) {
  require_same_shape(x, sub.anchor, "tv_subgradient_residual");
  const VectorField g = apply_gradient(x);
  VectorField d(x.shape());
  auto fill = [&](const RealGrid& gc, const RealGrid& zc, RealGrid& dc) {
    for (std::size_t k = 0; k < gc.size(); ++k) {
      const double w = gc[k] > 0.0 ? sub.lambda : (gc[k] < 0.0 ? -sub.lambda : zc[k]);
      dc[k] = w - zc[k];
    }
  };
  fill(g.dx, z.dx, d.dx);
  fill(g.dy, z.dy, d.dy);
  // grad^* = -div
  return sub.tau * norm2(apply_divergence(d));
}

double check_type0_bound(const RealGrid& z, const RealGrid& y, double tau,
                         double subgrad_residual_norm) {
  require_same_shape(z, y, "check_type0_bound");
  if (!(tau > 0.0)) throw Error("check_type0_bound: tau must be positive");
  if (!(subgrad_residual_norm >= 0.0)) throw Error("check_type0_bound: negative residual");
  return subgrad_residual_norm * subgrad_residual_norm / (2.0 * tau);
}

std::vector<double> tv1d_prox(const std::vector<double>& y, double lambda) {
  if (!(lambda >= 0.0)) throw Error("tv1d_prox: lambda must be nonnegative");
  const int n = static_cast<int>(y.size());
  if (n <= 1 || lambda == 0.0) return y;
  // Dynamic programming over the derivative of the running minimum, which is
  // piecewise linear with knots stored in x[l..r] (Johnson's O(n) scheme).
  std::vector<double> x(2 * n), a(2 * n), b(2 * n), tm(n - 1), tp(n - 1), beta(n);
  int l = n - 1, r = n;
  tm[0] = -lambda + y[0];
  tp[0] = lambda + y[0];
  x[l] = tm[0];
  x[r] = tp[0];
  a[l] = 1.0;
  b[l] = -y[0] + lambda;
  a[r] = -1.0;
  b[r] = y[0] + lambda;
  double afirst = 1.0, bfirst = -lambda - y[1];
  double alast = -1.0, blast = -lambda + y[1];
  int lo = 0, hi = 0;
  for (int k = 1; k < n - 1; ++k) {
    for (lo = l; lo <= r; ++lo) {
      if (afirst * x[lo] + bfirst > -lambda) break;
      afirst += a[lo];
      bfirst += b[lo];
    }
    for (hi = r; hi >= lo; --hi) {
      if (-alast * x[hi] - blast < lambda) break;
      alast += a[hi];
      blast += b[hi];
    }
    tm[k] = (-lambda - bfirst) / afirst;
    l = lo - 1;
    x[l] = tm[k];
    tp[k] = (lambda + blast) / (-alast);
    r = hi + 1;
    x[r] = tp[k];
    a[l] = afirst;
    b[l] = bfirst + lambda;
    a[r] = alast;
    b[r] = blast + lambda;
    afirst = 1.0;
    bfirst = -lambda - y[k + 1];
    alast = -1.0;
    blast = -lambda + y[k + 1];
  }
  for (lo = l; lo <= r; ++lo) {
    if (afirst * x[lo] + bfirst > 0.0) break;
    afirst += a[lo];
    bfirst += b[lo];
  }
  beta[n - 1] = -bfirst / afirst;
  for (int k = n - 2; k >= 0; --k) {
    if (beta[k + 1] > tp[k]) {
      beta[k] = tp[k];
    } else if (beta[k + 1] < tm[k]) {
      beta[k] = tm[k];
    } else {
      beta[k] = beta[k + 1];
    }
  }
  return beta;
}

namespace {

RealGrid prox_rows(const RealGrid& a, double w) {
  RealGrid out(a.shape());
  std::vector<double> buf(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) buf[j] = a(i, j);
    const std::vector<double> r = tv1d_prox(buf, w);
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = r[j];
  }
  return out;
}

RealGrid prox_cols(const RealGrid& a, double w) {
  RealGrid out(a.shape());
  std::vector<double> buf(a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) buf[i] = a(i, j);
    const std::vector<double> r = tv1d_prox(buf, w);
    for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) = r[i];
  }
  return out;
}

}  // namespace

RealGrid exact_tv_prox(const RealGrid& anchor, double tau, double lambda, int max_iter,
                       double tol) {
  if (!(tau > 0.0)) throw Error("exact_tv_prox: tau must be positive");
  if (!(lambda >= 0.0)) throw Error("exact_tv_prox: lambda must be nonnegative");
  const double w = tau * lambda;
  if (w == 0.0) return anchor;
  if (anchor.rows() == 1) return prox_rows(anchor, w);
  if (anchor.cols() == 1) return prox_cols(anchor, w);
  RealGrid x = anchor;
  RealGrid p(anchor.shape()), q(anchor.shape());
  for (int it = 0; it < max_iter; ++it) {
    const RealGrid yv = prox_rows(lincomb(1.0, x, 1.0, p), w);
    p = lincomb(1.0, x, 1.0, p);
    axpy(-1.0, yv, p);
    RealGrid xn = prox_cols(lincomb(1.0, yv, 1.0, q), w);
    q = lincomb(1.0, yv, 1.0, q);
    axpy(-1.0, xn, q);
    const double diff = norms(lincomb(1.0, xn, -1.0, x)).linf;
    x = std::move(xn);
    if (diff <= tol) break;
  }
  return x;
}

}  // namespace ipd

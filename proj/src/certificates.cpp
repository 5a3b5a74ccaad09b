#include "ipd/certificates.hpp"

#include <cmath>
#include <limits>

namespace ipd {

namespace {

bool has_sqrt_term(ApproxType t) { return t == ApproxType::type1 || t == ApproxType::type3; }

}  // namespace

double ergodic_weight(Variant v, const StepState& step0, const StepState& prev, int n) {
  switch (v) {
    case Variant::primal_accel:
    case Variant::exact_pdhg_accel: return prev.sigma / step0.sigma;
    case Variant::dual_accel: return prev.tau / step0.tau;
    case Variant::smooth: return std::pow(prev.theta, -(n - 1));
    default: return 1.0;
  }
}

void accumulate(CertificateAccumulator& acc, int n, const StepState& prev, double eps,
                double delta, double grad_err_norm) {
  if (n != acc.n + 1) throw Error("accumulate: iterations must be consecutive from 1");
  if (!(eps >= 0.0 && delta >= 0.0 && grad_err_norm >= 0.0)) {
    throw Error("accumulate: errors must be nonnegative");
  }
  if (acc.type == ApproxType::type0) throw Error("accumulate: type-0 errors are not covered");
  if (n == 1) {
    acc.tau0 = prev.tau;
    acc.sigma0 = prev.sigma;
  }
  const ApproxType t = acc.type == ApproxType::exact ? ApproxType::type2 : acc.type;
  const double tau = prev.tau, sigma = prev.sigma;
  const double eps_b = t == ApproxType::type3 ? 0.0 : eps;
  double a = 0.0, b = 0.0, w = 1.0;
  switch (acc.variant) {
    case Variant::basic:
      a = tau * grad_err_norm + (has_sqrt_term(t) ? std::sqrt(2.0 * tau * eps) : 0.0);
      b = tau * (eps_b + delta);
      break;
    case Variant::reduced:
      if (t != ApproxType::type2) throw Error("accumulate: reduced variant is type-2 only");
      b = eps + delta;
      break;
    case Variant::primal_accel:
      a = sigma * grad_err_norm +
          (has_sqrt_term(t) ? std::sqrt(2.0 * sigma * sigma * eps / tau) : 0.0);
      b = 2.0 * sigma * (eps_b + delta);
      w = sigma / acc.sigma0;
      break;
    case Variant::dual_accel:
      a = has_sqrt_term(t) ? std::sqrt(2.0 * tau * eps) : 0.0;
      b = 2.0 * tau * (eps_b + delta);
      w = tau / acc.tau0;
      break;
    case Variant::smooth: {
      const double s = std::pow(prev.theta, -(n - 1));
      a = s * (tau * grad_err_norm + (has_sqrt_term(t) ? std::sqrt(2.0 * tau * eps) : 0.0));
      b = s * tau * (eps_b + delta);
      w = s;
      break;
    }
    default: throw Error("accumulate: no certificate table for " + to_string(acc.variant));
  }
  acc.n = n;
  acc.A += a;
  acc.B += b;
  acc.T += w;
  acc.dA.push_back(a);
  acc.dB.push_back(b);
  acc.dT.push_back(w);
}

double theorem_rhs(const CertificateAccumulator& acc, double dx, double dy,
                   const StepState& step0, const StepState& stepN) {
  if (acc.n < 1) throw Error("theorem_rhs: empty accumulator");
  const double N = acc.n;
  const double tau = step0.tau, sigma = step0.sigma;
  const double sqB = std::sqrt(2.0 * acc.B);
  switch (acc.variant) {
    case Variant::basic: {
      const double s = dx + std::sqrt(tau / sigma) * dy + 2.0 * acc.A + sqB;
      return s * s / (2.0 * tau * N);
    }
    case Variant::reduced:
      return (dx * dx / (2.0 * tau) + dy * dy / (2.0 * sigma) + acc.B) / N;
    case Variant::primal_accel: {
      const double s = std::sqrt(sigma / tau) * dx + dy + sqB +
                       2.0 * std::sqrt(stepN.tau / stepN.sigma) * acc.A;
      return s * s / (2.0 * sigma * acc.T);
    }
    case Variant::dual_accel: {
      const double s = dx + std::sqrt(tau / sigma) * dy + sqB + 2.0 * acc.A;
      return s * s / (2.0 * tau * acc.T);
    }
    case Variant::smooth: {
      const double s = dx + std::sqrt(tau / sigma) * dy +
                       2.0 * std::pow(step0.theta, 0.5 * N) * acc.A + sqB;
      return s * s / (2.0 * tau * acc.T);
    }
    default: break;
  }
  throw Error("theorem_rhs: no bound for " + to_string(acc.variant));
}

double mixed_rate_rhs(const CertificateAccumulator& acc, double dx, double diam,
                      const StepState& step0) {
  if (acc.variant != Variant::reduced) throw Error("mixed_rate_rhs: reduced variant only");
  return theorem_rhs(acc, dx, diam, step0, step0);
}

double basic_distance_bound(double A, double B, double dx, double dy, double tau, double sigma) {
  return A + std::sqrt(dx * dx + (tau / sigma) * dy * dy + 2.0 * B + A * A);
}

double lagrangian_gap(const SaddleProblem& problem, const RealGrid& x, const RealGrid& y,
                      const SaddleReference& ref) {
  const double hy = problem.hstar_value(y);
  if (!std::isfinite(hy)) return std::numeric_limits<double>::infinity();
  return problem.lagrangian(x, ref.y_star) - problem.lagrangian(ref.x_star, y);
}

DescentCheck descent_inequality_check(const SaddleProblem& problem, const IteratePack& it,
                                      double tau, double sigma, double e, double eps,
                                      double delta, ApproxType type, const RealGrid& x,
                                      const RealGrid& y) {
  DescentCheck out;
  out.lhs = problem.lagrangian(it.xcheck, y) - problem.lagrangian(x, it.ycheck);
  const double dxc = distance(x, it.xcheck);
  double r = distance_squared(x, it.xbar) / (2.0 * tau) + distance_squared(y, it.ybar) / (2.0 * sigma) -
             distance_squared(x, it.xcheck) / (2.0 * tau) -
             (1.0 - tau * problem.L_f()) / (2.0 * tau) * distance_squared(it.xbar, it.xcheck) -
             distance_squared(y, it.ycheck) / (2.0 * sigma) -
             distance_squared(it.ybar, it.ycheck) / (2.0 * sigma);
  const RealGrid K1 = problem.K->apply(lincomb(1.0, x, -1.0, it.xcheck));
  r += inner_product(K1, lincomb(1.0, it.ytilde, -1.0, it.ycheck));
  const RealGrid K2 = problem.K->apply(lincomb(1.0, it.xtilde, -1.0, it.xcheck));
  r -= inner_product(K2, lincomb(1.0, y, -1.0, it.ycheck));
  const double root = has_sqrt_term(type) ? std::sqrt(2.0 * eps / tau) : 0.0;
  r += (e + root) * dxc;
  r += (type == ApproxType::type3 ? 0.0 : eps) + delta;
  out.rhs = r;
  out.holds = out.lhs <= r + 1e-8 * std::max(1.0, std::abs(r));
  return out;
}

std::vector<double> recursion_bound(const std::vector<double>& S, const std::vector<double>& lambdas) {
  if (S.size() != lambdas.size()) throw Error("recursion_bound: length mismatch");
  std::vector<double> out(S.size());
  double half = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) {
    if (lambdas[i] < 0.0) throw Error("recursion_bound: negative lambda");
    if (i > 0 && S[i] < S[i - 1]) throw Error("recursion_bound: S must be nondecreasing");
    half += 0.5 * lambdas[i];
    out[i] = half + std::sqrt(S[i] + half * half);
  }
  return out;
}

SlopeFit fit_loglog_slope(const std::vector<double>& n, const std::vector<double>& values,
                          double from, double to, bool semilog) {
  if (n.size() != values.size()) throw Error("fit_loglog_slope: length mismatch");
  SlopeFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < from || n[i] > to) continue;
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      ++fit.excluded;
      continue;
    }
    if (!semilog && !(n[i] > 0.0)) {
      ++fit.excluded;
      continue;
    }
    xs.push_back(semilog ? n[i] : std::log(n[i]));
    ys.push_back(std::log(values[i]));
  }
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 5) throw Error("fit_loglog_slope: fewer than 5 usable points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error("fit_loglog_slope: degenerate abscissae");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace ipd

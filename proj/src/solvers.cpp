#include "ipd/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ipd {

namespace {

double extrapolation_theta(const StepState& s) {
  switch (s.variant) {
    case Variant::basic:
    case Variant::reduced:
    case Variant::exact_pdhg: return 1.0;
    default: return s.theta;
  }
}

// Perturbs the exact dual prox p so that the type-2 precision of the result is
// at most (and for the quadratic case exactly, up to roundoff) `target`.
RealGrid inject_dual_error(const SaddleProblem& problem, const RealGrid& ybar, const RealGrid& p,
                           double sigma, double target, std::uint64_t seed, int n) {
  if (target <= 0.0) return p;
  RealGrid d(p.shape());
  std::mt19937_64 rng(mix_seed(seed, 11, static_cast<std::uint64_t>(n)));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : d.values()) v = dist(rng);
  const double nd = norm2(d);
  if (nd == 0.0) return p;
  if (problem.h_kind == DualKind::quadratic_data) {
    // delta = ((1 + sigma)/sigma)^2 |d|^2 / 2
    const double len = sigma * std::sqrt(2.0 * target) / (1.0 + sigma);
    return lincomb(1.0, p, len / nd, d);
  }
  // box: bisection on the step length along d, clamped into the box
  auto candidate = [&](double t) { return project_box(lincomb(1.0, p, t / nd, d), 1.0); };
  double lo = 0.0, hi = 1.0;
  if (problem.dual_delta(ybar, candidate(hi), sigma) <= target) return candidate(hi);
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (problem.dual_delta(ybar, candidate(mid), sigma) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return candidate(lo);
}

void track_best(RunRecord& rec, double F, const RealGrid& x, const RealGrid& y) {
  if (F < rec.F_best) {
    rec.F_best = F;
    rec.x_best = x;
    rec.y_best = y;
  }
}

}  // namespace

RealGrid first_prox_input(const SaddleProblem& problem, const StepState& step0, const RealGrid& x0,
                          const RealGrid& y0) {
  const RealGrid y1 = problem.dual_prox(lincomb(1.0, y0, step0.sigma, problem.K->apply(x0)), step0.sigma);
  RealGrid dir = problem.K->adjoint(y1);
  if (problem.gamma_f != 0.0) axpy(1.0, problem.grad_f(x0), dir);
  return lincomb(1.0, x0, -step0.tau, dir);
}

RunRecord run_inexact_pd(const SaddleProblem& problem, const StepState& state0,
                         const Schedules& schedules, int N, const RealGrid& x0, const RealGrid& y0,
                         const RunOptions& opt) {
  const Variant variant = state0.variant;
  if (is_exact_baseline(variant)) throw Error("run_inexact_pd: use run_exact_baseline for " + to_string(variant));
  if (N < 1) throw Error("run_inexact_pd: N must be >= 1");
  require_same_shape(x0, problem.data, "run_inexact_pd x0");
  require_same_shape(y0, problem.data, "run_inexact_pd y0");
  if (schedules.eps.role != ErrorSchedule::Role::primal_eps ||
      schedules.delta.role != ErrorSchedule::Role::dual_delta ||
      schedules.grad.role != ErrorSchedule::Role::gradient_norm) {
    throw Error("run_inexact_pd: schedule roles mismatched");
  }
  const double gamma = problem.gamma(), mu = problem.mu();
  validate_steps(state0, problem.L, problem.L_f(), gamma, mu);
  if ((variant == Variant::dual_accel || variant == Variant::reduced) && !schedules.grad.is_zero()) {
    throw Error("run_inexact_pd: " + to_string(variant) + " admits no gradient errors");
  }
  if (!(opt.max_inner >= 1)) throw Error("run_inexact_pd: max_inner must be >= 1");

  const bool inexact_tv = problem.g_kind == PrimalKind::tv && problem.lambda > 0.0 && !opt.exact_prox;
  const ApproxType type = inexact_tv ? ApproxType::type2 : ApproxType::exact;
  const bool cold = opt.mode == Mode::worst_case;
  const double step_scale = cold ? opt.worst_case_step : opt.practical_step;
  const Shape sh = problem.shape();

  RunRecord rec;
  rec.variant = variant;
  rec.entries.reserve(static_cast<std::size_t>(N));
  CertificateAccumulator acc(variant, type);
  ErgodicAccumulator<RealGrid> ex, ey;

  const SaddleReference* ref = opt.reference;
  double dist_x0 = 0.0, dist_y0 = 0.0;
  if (ref) {
    dist_x0 = distance(ref->x_star, x0);
    dist_y0 = distance(ref->y_star, y0);
  }

  RealGrid x = x0, x_prev = x0, y = y0;
  VectorField z(sh);
  bool have_z = false;
  StepState step = state0;
  long long cum_inner = 0;

  for (int k = 0; k < N; ++k) {
    const int n = k + 1;
    const double tau = step.tau, sigma = step.sigma;
    const RealGrid xtilde = lincomb(1.0 + extrapolation_theta(step), x, -extrapolation_theta(step), x_prev);

    // dual step
    const RealGrid ybar_in = lincomb(1.0, y, sigma, problem.K->apply(xtilde));
    RealGrid y_new = problem.dual_prox(ybar_in, sigma);
    double delta_ach = 0.0;
    if (!schedules.delta.is_zero()) {
      y_new = inject_dual_error(problem, ybar_in, y_new, sigma, schedules.delta.eval(n), opt.seed, n);
      delta_ach = problem.dual_delta(ybar_in, y_new, sigma);
    }

    // primal step
    RealGrid dir = problem.K->adjoint(y_new);
    if (problem.gamma_f != 0.0) axpy(1.0, problem.grad_f(x), dir);
    double e_norm = 0.0;
    if (!schedules.grad.is_zero()) {
      const RealGrid e = make_gradient_error(n, schedules.grad, sh, opt.seed);
      e_norm = norm2(e);
      axpy(1.0, e, dir);
    }
    RealGrid v = lincomb(1.0, x, -tau, dir);

    RunEntry entry;
    entry.n = n;
    entry.tau = tau;
    entry.sigma = sigma;
    entry.theta = step.theta;
    entry.grad_error_norm = e_norm;
    entry.delta_achieved = delta_ach;

    RealGrid x_new;
    if (problem.g_kind != PrimalKind::tv) {
      x_new = problem.primal_prox_closed(v, tau);
    } else if (opt.exact_prox || problem.lambda == 0.0) {
      x_new = exact_tv_prox(v, tau, problem.lambda);
    } else {
      const double target = schedules.eps.is_zero() ? opt.exact_target : schedules.eps.eval(n);
      entry.eps_target = target;
      ProxSubproblem sub(std::move(v), tau, problem.lambda);
      TvProxResult r = solve_tv_prox(sub, target, (!cold && have_z) ? &z : nullptr, opt.max_inner,
                                     step_scale, nullptr, opt.restart);
      x_new = std::move(r.x);
      z = std::move(r.z);
      have_z = true;
      entry.eps_achieved = r.cert.achieved_gap;
      entry.inner_iterations = r.cert.inner_iterations;
      if (!(r.cert.achieved_gap <= target)) rec.all_eps_within_target = false;
    }
    cum_inner += entry.inner_iterations;
    entry.cum_inner_iterations = cum_inner;

    if (ref && opt.check_descent) {
      const IteratePack pack{x, y, xtilde, y_new, x_new, y_new};
      const DescentCheck dc = descent_inequality_check(problem, pack, tau, sigma, e_norm, entry.eps_achieved,
                                                       delta_ach, type, ref->x_star, ref->y_star);
      entry.descent_lhs = dc.lhs;
      entry.descent_rhs = dc.rhs;
      entry.descent_ok = dc.holds;
      if (!dc.holds) rec.all_descent_ok = false;
    }

    accumulate(acc, n, step, entry.eps_achieved, delta_ach, e_norm);
    const double w = ergodic_weight(variant, state0, step, n);
    ex.add(x_new, w);
    ey.add(y_new, w);
    const StepState next = update_steps(step, gamma, mu);
    validate_steps(next, problem.L, problem.L_f(), gamma, mu);

    entry.A = acc.A;
    entry.B = acc.B;
    entry.T = acc.T;
    entry.F = problem.primal_energy(x_new);
    const RealGrid X = ex.mean();
    entry.F_erg = problem.primal_energy(X);
    if (ref) {
      const RealGrid Y = ey.mean();
      entry.lag_gap = lagrangian_gap(problem, X, Y, *ref);
      entry.rhs_bound = theorem_rhs(acc, dist_x0, dist_y0, state0, next);
      if (variant == Variant::reduced && opt.dual_diameter > 0.0) {
        entry.mixed_rhs = mixed_rate_rhs(acc, dist_x0, opt.dual_diameter, state0);
      }
    }
    track_best(rec, entry.F, x_new, y_new);
    rec.entries.push_back(entry);
    if (opt.iterates) opt.iterates->push_back(x_new);

    x_prev = std::move(x);
    x = std::move(x_new);
    y = std::move(y_new);
    step = next;
  }

  rec.x_last = std::move(x);
  rec.y_last = std::move(y);
  rec.x_erg = ex.mean();
  rec.y_erg = ey.mean();
  return rec;
}

RunRecord run_exact_baseline(const SaddleProblem& problem, const StepState& state0, double L_stacked,
                             int N, const RealGrid& x0, const RealGrid& y0, const RunOptions& opt) {
  const Variant variant = state0.variant;
  if (!is_exact_baseline(variant)) throw Error("run_exact_baseline: not a baseline variant");
  if (problem.g_kind != PrimalKind::tv) throw Error("run_exact_baseline: needs g = lambda TV");
  if (N < 1) throw Error("run_exact_baseline: N must be >= 1");
  require_same_shape(x0, problem.data, "run_exact_baseline x0");
  require_same_shape(y0, problem.data, "run_exact_baseline y0");
  const double gamma = problem.gamma();
  // the TV dual has no strong convexity, so mu plays no role here
  validate_steps(state0, L_stacked, problem.L_f(), gamma, 0.0);
  const double lam = problem.lambda;
  const Shape sh = problem.shape();
  const SaddleReference* ref = opt.reference;

  RunRecord rec;
  rec.variant = variant;
  rec.entries.reserve(static_cast<std::size_t>(N));
  ErgodicAccumulator<RealGrid> ex, ey;

  RealGrid x = x0, x_prev = x0, y = y0;
  VectorField q(sh), gx(sh);
  RealGrid divq(sh);
  StepState step = state0;

  for (int k = 0; k < N; ++k) {
    const int n = k + 1;
    const double tau = step.tau, sigma = step.sigma;
    const double th = extrapolation_theta(step);
    const RealGrid xtilde = lincomb(1.0 + th, x, -th, x_prev);

    y = problem.dual_prox(lincomb(1.0, y, sigma, problem.K->apply(xtilde)), sigma);
    gradient_into(xtilde, gx);
    for (std::size_t i = 0; i < q.dx.size(); ++i) {
      q.dx[i] = std::clamp(q.dx[i] + sigma * gx.dx[i], -lam, lam);
      q.dy[i] = std::clamp(q.dy[i] + sigma * gx.dy[i], -lam, lam);
    }
    divergence_into(q, divq);
    RealGrid dir = problem.K->adjoint(y);
    axpy(-1.0, divq, dir);
    if (problem.gamma_f != 0.0) axpy(1.0, problem.grad_f(x), dir);
    RealGrid x_new = lincomb(1.0, x, -tau, dir);

    RunEntry entry;
    entry.n = n;
    entry.tau = tau;
    entry.sigma = sigma;
    entry.theta = step.theta;
    const double w = ergodic_weight(variant, state0, step, n);
    ex.add(x_new, w);
    ey.add(y, w);
    const StepState next = update_steps(step, gamma, 0.0);
    validate_steps(next, L_stacked, problem.L_f(), gamma, 0.0);
    entry.T = ex.total_weight();
    entry.F = problem.primal_energy(x_new);
    const RealGrid X = ex.mean();
    entry.F_erg = problem.primal_energy(X);
    if (ref) entry.lag_gap = lagrangian_gap(problem, X, ey.mean(), *ref);
    track_best(rec, entry.F, x_new, y);
    rec.entries.push_back(entry);
    if (opt.iterates) opt.iterates->push_back(x_new);

    x_prev = std::move(x);
    x = std::move(x_new);
    step = next;
  }
  rec.x_last = std::move(x);
  rec.y_last = std::move(y);
  rec.tv_dual_last = std::move(q);
  rec.x_erg = ex.mean();
  rec.y_erg = ey.mean();
  return rec;
}

}  // namespace ipd

#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ipd/experiment.hpp"
#include "ipd/solvers.hpp"

using namespace ipd;

namespace {

SaddleProblem blur_problem(Shape sh, const RealGrid& data, DualKind h, double lambda, double gamma_f = 0.0) {
  SaddleProblem p;
  auto A = gaussian_blur_operator(2.0, sh);
  p.K = A;
  p.L = A->norm_bound();
  p.lambda = lambda;
  p.h_kind = h;
  p.data = data;
  p.gamma_f = gamma_f;
  return p;
}

bool all_zero(const RealGrid& u) {
  for (double v : u.values())
    if (v != 0.0) return false;
  return true;
}

}  // namespace

TEST_CASE("ergodic accumulator") {
  ErgodicAccumulator<RealGrid> acc;
  for (double v : {1.0, 2.0, 3.0}) acc.add(RealGrid(2, 2, v), 1.0);
  CHECK(acc.mean() == RealGrid(2, 2, 2.0));
  CHECK(acc.count() == 3);
  ErgodicAccumulator<RealGrid> w;
  w.add(RealGrid(1, 1, 0.0), 1.0);
  w.add(RealGrid(1, 1, 3.0), 2.0);
  CHECK(w.mean()[0] == 2.0);
  CHECK(w.total_weight() == 3.0);
  CHECK_THROWS_AS(w.add(RealGrid(1, 1, 1.0), 0.0), Error);
  CHECK_THROWS_AS(ErgodicAccumulator<RealGrid>().mean(), Error);
}

TEST_CASE("zero data stays at zero") {
  const Shape sh{8, 8};
  const SaddleProblem p = blur_problem(sh, RealGrid(sh), DualKind::quadratic_data, 0.01);
  std::vector<RealGrid> its;
  RunOptions o;
  o.iterates = &its;
  using R = ErrorSchedule::Role;
  for (Variant v : {Variant::reduced, Variant::dual_accel, Variant::basic}) {
    Schedules s;
    s.eps = ErrorSchedule::polynomial(R::primal_eps, 1.0, 1.0);
    its.clear();
    const RunRecord r = run_inexact_pd(p, default_steps(p, v), s, 30, RealGrid(sh), RealGrid(sh), o);
    REQUIRE(its.size() == 30);
    for (const RealGrid& x : its) CHECK(all_zero(x));
    CHECK(all_zero(r.y_last));
    CHECK(all_zero(r.x_erg));
  }
  const double Ls = stacked_norm_bound(p);
  const RunRecord b = run_exact_baseline(p, baseline_steps(p, Variant::exact_pdhg, Ls), Ls, 30, RealGrid(sh),
                                         RealGrid(sh), RunOptions{});
  CHECK(all_zero(b.x_last));
  CHECK(all_zero(b.y_last));

  const SaddleReference gt = compute_ground_truth(p, 1000, 0);
  CHECK(all_zero(gt.x_star));
  CHECK(gt.F_star == 0.0);
}

TEST_CASE("step and schedule preconditions") {
  const Shape sh{6, 6};
  const SaddleProblem p = blur_problem(sh, testing::random_grid(6, 6, 1, 0, 1), DualKind::quadratic_data, 0.05);
  const RealGrid z(sh);
  CHECK_THROWS_AS(run_inexact_pd(p, {1.5, 1.5, 1.0, 0.0, Variant::reduced}, Schedules{}, 5, z, z, RunOptions{}),
                  Error);
  Schedules g;
  g.grad = ErrorSchedule::polynomial(ErrorSchedule::Role::gradient_norm, 1e-3, 1.0);
  CHECK_THROWS_AS(run_inexact_pd(p, default_steps(p, Variant::reduced), g, 5, z, z, RunOptions{}), Error);
  CHECK_NOTHROW(run_inexact_pd(p, default_steps(p, Variant::basic), g, 5, z, z, RunOptions{}));
}

TEST_CASE("descent rule holds on an exact-prox run") {
  const Shape sh{10, 10};
  const SaddleProblem p = blur_problem(sh, testing::random_grid(10, 10, 3, 0, 1), DualKind::box_data, 0.3);
  const SaddleReference ref = compute_ground_truth(p, 3000, 200);
  RunOptions o;
  o.reference = &ref;
  o.exact_prox = true;
  const RunRecord r = run_inexact_pd(p, default_steps(p, Variant::reduced), Schedules{}, 100, RealGrid(sh),
                                     RealGrid(sh), o);
  CHECK(r.all_descent_ok);
  for (const RunEntry& e : r.entries) CHECK(e.lag_gap <= e.rhs_bound + 1e-6 * std::max(1.0, std::abs(ref.F_star)));
}

TEST_CASE("nested run with near-exact inner solves tracks the exact-prox run") {
  const Shape sh{8, 8};
  const SaddleProblem p = blur_problem(sh, testing::random_grid(8, 8, 9, 0, 1), DualKind::box_data, 0.5);
  RunOptions o;
  o.max_inner = 20000;
  const StepState s = default_steps(p, Variant::reduced);
  const RunRecord a = run_inexact_pd(p, s, Schedules{}, 60, RealGrid(sh), RealGrid(sh), o);
  o.exact_prox = true;
  const RunRecord b = run_inexact_pd(p, s, Schedules{}, 60, RealGrid(sh), RealGrid(sh), o);
  CHECK(distance(a.x_last, b.x_last) <= 1e-6);
}

TEST_CASE("both baselines reach the same energy") {
  const Shape sh{16, 16};
  const SaddleProblem p =
      blur_problem(sh, testing::random_grid(16, 16, 4, 0, 1), DualKind::quadratic_data, 0.05, 1e-3);
  const double Ls = stacked_norm_bound(p);
  const RealGrid z(sh);
  const RunRecord a = run_exact_baseline(p, baseline_steps(p, Variant::exact_pdhg, Ls), Ls, 100000, p.data, z, {});
  const RunRecord b =
      run_exact_baseline(p, baseline_steps(p, Variant::exact_pdhg_accel, Ls), Ls, 100000, p.data, z, {});
  const double Fa = a.entries.back().F, Fb = b.entries.back().F;
  CHECK(std::abs(Fa - Fb) <= 1e-8 * std::abs(Fa));
  // energies do not drift upwards late in the run
  CHECK(a.entries.back().F <= a.entries[49999].F + 1e-12 * std::max(1.0, std::abs(Fa)));
}

TEST_CASE("ergodic gap below the bound on every variant") {
  const Shape sh{10, 10};
  const RealGrid data = testing::random_grid(10, 10, 12, 0, 1);
  struct Case {
    Variant v;
    DualKind h;
    double gamma_f;
  };
  for (const Case c : {Case{Variant::basic, DualKind::quadratic_data, 0.0}, Case{Variant::reduced, DualKind::box_data, 0.0},
                       Case{Variant::primal_accel, DualKind::quadratic_data, 0.05},
                       Case{Variant::dual_accel, DualKind::quadratic_data, 0.0},
                       Case{Variant::smooth, DualKind::quadratic_data, 0.05}}) {
    CAPTURE(to_string(c.v));
    const SaddleProblem p = blur_problem(sh, data, c.h, 0.1, c.gamma_f);
    const SaddleReference ref = compute_ground_truth(p, 4000, 300);
    const StepState s = default_steps(p, c.v);
    const GapConstant C = gap_constant(p, s, RealGrid(sh), RealGrid(sh));
    RunOptions o;
    o.reference = &ref;
    o.max_inner = 2000;
    const RunRecord r = run_inexact_pd(p, s, make_schedules(c.v, 0.75, 0.8, C.value), 150, RealGrid(sh),
                                       RealGrid(sh), o);
    CHECK(r.all_descent_ok);
    int bad = 0;
    for (const RunEntry& e : r.entries)
      if (!(e.lag_gap <= e.rhs_bound + 1e-6 * std::max(1.0, std::abs(ref.F_star)))) ++bad;
    CHECK(bad == 0);
  }
}

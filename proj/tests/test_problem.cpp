#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ipd/problem.hpp"
#include "ipd/prox.hpp"

using namespace ipd;

namespace {

SaddleProblem identity_problem(const RealGrid& data, double lambda, DualKind h) {
  SaddleProblem p;
  p.K = std::make_shared<IdentityOperator>(data.shape());
  p.L = 1.0;
  p.lambda = lambda;
  p.h_kind = h;
  p.data = data;
  return p;
}

}  // namespace

TEST_CASE("accelerated step updates") {
  StepState p{1.0, 1.0, 1.0, 0.0, Variant::primal_accel};
  const StepState p1 = update_steps(p, 1.0, 0.0);
  CHECK(p1.theta == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(p1.tau == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(p1.sigma == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  StepState d{1.0, 1.0, 1.0, 0.0, Variant::dual_accel};
  CHECK(update_steps(d, 0.0, 1.0).theta == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));

  StepState r{0.99, 0.99, 1.0, 0.0, Variant::reduced};
  const StepState r1 = update_steps(r, 0.0, 0.0);
  CHECK(r1.tau == r.tau);
  CHECK(r1.sigma == r.sigma);
}

TEST_CASE("accelerated step asymptotics") {
  const double g = 0.5;
  StepState p{1.0 / (2.0 * g), g, 1.0, 0.0, Variant::primal_accel};
  StepState d{1.0, 1.0, 1.0, 0.0, Variant::dual_accel};
  for (int n = 1; n <= 10000; ++n) {
    p = update_steps(p, g, 0.0);
    d = update_steps(d, 0.0, g);
    if (n >= 1000) {
      CHECK(p.tau * n * g / 2.0 >= 0.9);
      CHECK(p.tau * n * g / 2.0 <= 1.1);
      CHECK(d.sigma * n * g >= 0.9);
      CHECK(d.sigma * n * g <= 1.1);
    }
  }
}

TEST_CASE("smooth closed-form steps") {
  const StepState s = smooth_step_solve(1e-3, 1.0, 1.0, 1e-3);
  const double want = 1.0 - (std::sqrt(4.0 + 4.0 * 1e3) - 2.0) / (2.0 * 1e3);
  CHECK(s.theta == doctest::Approx(want).epsilon(1e-12));
  CHECK(s.theta == doctest::Approx(0.96936).epsilon(1e-5));
  CHECK(std::abs((1.0 + 1e-3 * s.tau) * s.theta - 1.0) <= 1e-12);
  CHECK(std::abs((1.0 + s.sigma) * s.theta - 1.0) <= 1e-12);
  CHECK(1e-3 * s.tau + s.tau * s.sigma * s.theta * s.theta <= 1.0 + 1e-12);

  const StepState t = smooth_step_solve(1.0, 1.0, 1.0, 1.0);
  CHECK(t.theta == doctest::Approx(1.0 - (std::sqrt(8.0) - 2.0) / 2.0).epsilon(1e-12));
  CHECK(t.theta < s.theta);
  CHECK_NOTHROW(validate_steps(s, 1.0, 1e-3, 1e-3, 1.0));
}

TEST_CASE("step validation") {
  CHECK_NOTHROW(validate_steps({0.99, 0.99, 1.0, 0.0, Variant::reduced}, 1.0, 0.0, 0.0, 0.0));
  CHECK_THROWS_AS(validate_steps({1.2, 0.99, 1.0, 0.0, Variant::reduced}, 1.0, 0.0, 0.0, 0.0), Error);
  CHECK_THROWS_AS(validate_steps({0.99, 0.99, 1.0, 0.0, Variant::basic}, 1.0, 0.5, 0.0, 0.0), Error);
  CHECK_THROWS_AS(validate_steps({-1.0, 0.5, 1.0, 0.0, Variant::reduced}, 1.0, 0.0, 0.0, 0.0), Error);
}

TEST_CASE("error schedules") {
  using R = ErrorSchedule::Role;
  CHECK(ErrorSchedule::polynomial(R::primal_eps, 1.0, 1.0).eval(4) == 0.25);
  CHECK(ErrorSchedule::polynomial(R::primal_eps, 3.0, 2.0).eval(2) == 0.75);
  CHECK(ErrorSchedule::geometric(R::primal_eps, 2.0, 0.5).eval(3) == 0.25);
  CHECK(ErrorSchedule::zero(R::dual_delta).eval(7) == 0.0);
  CHECK(ErrorSchedule::zero(R::dual_delta).is_zero());
}

TEST_CASE("gradient error injection") {
  using R = ErrorSchedule::Role;
  const auto s = ErrorSchedule::polynomial(R::gradient_norm, 1.0, 1.0);
  const RealGrid e = make_gradient_error(4, s, {9, 11}, 17);
  CHECK(std::abs(norm2(e) - 0.25) <= 1e-14 * 0.25);
  CHECK(make_gradient_error(4, s, {9, 11}, 17) == e);
  CHECK_FALSE(make_gradient_error(5, s, {9, 11}, 17) == make_gradient_error(5, s, {9, 11}, 18));
  CHECK(norm2(make_gradient_error(3, ErrorSchedule::zero(R::gradient_norm), {4, 4}, 1)) == 0.0);
  CHECK_THROWS_AS(make_gradient_error(1, ErrorSchedule::polynomial(R::primal_eps, 1, 1), {4, 4}, 1), Error);
}

TEST_CASE("energies and conjugates of a two-pixel TV-L2 problem") {
  const SaddleProblem p = identity_problem(RealGrid(1, 2, {0.0, 4.0}), 1.0, DualKind::quadratic_data);
  const RealGrid x(1, 2, {1.0, 3.0});
  // 0.5 (1 + 1) + 2
  CHECK(p.primal_energy(x) == doctest::Approx(3.0).epsilon(1e-15));
  const RealGrid y(1, 2, {1.0, -1.0});
  // <x,y> + TV - <y,f> - |y|^2/2 = -2 + 2 + 4 - 1
  CHECK(p.lagrangian(x, y) == doctest::Approx(3.0).epsilon(1e-15));
  const RealGrid ybar(1, 2, {0.3, -2.0});
  const RealGrid yp = p.dual_prox(ybar, 0.7);
  CHECK(std::abs(p.dual_delta(ybar, yp, 0.7)) <= 1e-14);
  CHECK(p.dual_delta(ybar, lincomb(1.0, yp, 1.0, RealGrid(1, 2, 0.1)), 0.7) > 0.0);
}

TEST_CASE("box conjugate is infinite outside the box") {
  const SaddleProblem p = identity_problem(RealGrid(1, 2, {0.0, 1.0}), 0.5, DualKind::box_data);
  CHECK(std::isinf(p.hstar_value(RealGrid(1, 2, {1.5, 0.0}))));
  CHECK(p.hstar_value(RealGrid(1, 2, {0.5, -1.0})) == doctest::Approx(-1.0));
  CHECK(p.h_value(RealGrid(1, 2, {1.0, -1.0})) == doctest::Approx(3.0));
}

TEST_CASE("variant names round trip") {
  for (Variant v : {Variant::basic, Variant::reduced, Variant::primal_accel, Variant::dual_accel,
                    Variant::smooth, Variant::exact_pdhg, Variant::exact_pdhg_accel}) {
    CHECK(variant_from_string(to_string(v)) == v);
  }
  CHECK_THROWS_AS(variant_from_string("nope"), Error);
  CHECK(mix_seed(1, 1) != mix_seed(1, 2));
  CHECK(mix_seed(1, 1) != mix_seed(2, 1));
}

#pragma once

// Saddle problems min_x max_y <Kx,y> + f(x) + g(x) - h*(y) on image grids,
// step-size state for the algorithm variants, and error schedules.

#include <cstdint>
#include <memory>
#include <random>
#include <string>

#include "ipd/grid.hpp"
#include "ipd/operators.hpp"

namespace ipd {

enum class Variant { basic, reduced, primal_accel, dual_accel, smooth, exact_pdhg, exact_pdhg_accel };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
bool is_exact_baseline(Variant v);

enum class Mode { worst_case, practical };
std::string to_string(Mode m);

/// g: lambda TV (prox computed by the inner solver), lambda |.|_1, or zero.
enum class PrimalKind { tv, l1, zero };
/// h*: <y,f> + indicator(|y|_inf <= 1), or <y,f> + |y|^2/2.
enum class DualKind { box_data, quadratic_data };

struct SaddleProblem {
  std::shared_ptr<const GridOperator> K;
  double L = 1.0;  ///< certified bound on ||K||
  PrimalKind g_kind = PrimalKind::tv;
  double lambda = 0.0;
  DualKind h_kind = DualKind::quadratic_data;
  RealGrid data;            ///< f in h*
  double gamma_f = 0.0;     ///< smooth term gamma_f/2 |x|^2, so L_f = gamma_f
  bool unshifted_box_dual = false;  ///< box prox without the -sigma f shift

  Shape shape() const { return data.shape(); }
  double L_f() const { return gamma_f; }
  /// strong convexity of the primal part (carried by the smooth term)
  double gamma() const { return gamma_f; }
  /// strong convexity of h*
  double mu() const { return h_kind == DualKind::quadratic_data ? 1.0 : 0.0; }

  double f_value(const RealGrid& x) const;
  double g_value(const RealGrid& x) const;
  /// h(v) = |v - f|_1 or |v - f|^2/2
  double h_value(const RealGrid& v) const;
  /// +inf outside the box for box_data
  double hstar_value(const RealGrid& y) const;
  double primal_energy(const RealGrid& x) const;
  double lagrangian(const RealGrid& x, const RealGrid& y) const;

  RealGrid grad_f(const RealGrid& x) const;
  /// Exact prox of sigma h* at ybar.
  RealGrid dual_prox(const RealGrid& ybar, double sigma) const;
  /// Type-2 precision of y as an approximation of prox_{sigma h*}(ybar):
  /// the Fenchel-Young gap h*(y) + h(p) - <p,y> with p = (ybar - y)/sigma.
  double dual_delta(const RealGrid& ybar, const RealGrid& y, double sigma) const;
  /// Exact prox of tau g for the closed-form kinds; throws for tv.
  RealGrid primal_prox_closed(const RealGrid& v, double tau) const;
};

struct StepState {
  double tau = 1.0;
  double sigma = 1.0;
  double theta = 1.0;
  double beta = 0.0;
  Variant variant = Variant::basic;
};

/// Hard error unless the step conditions of the variant's theorem hold.
void validate_steps(const StepState& s, double L, double L_f, double gamma, double mu);

/// One step of the variant's schedule; constant variants return s unchanged.
StepState update_steps(const StepState& s, double gamma, double mu);

/// Closed-form constant steps of the smooth variant.
StepState smooth_step_solve(double gamma, double mu, double L, double L_f);

struct ErrorSchedule {
  enum class Kind { zero, polynomial, geometric };
  enum class Role { primal_eps, dual_delta, gradient_norm };

  Kind kind = Kind::zero;
  Role role = Role::primal_eps;
  double C = 0.0;
  double alpha = 1.0;
  double q = 0.5;

  static ErrorSchedule zero(Role r);
  static ErrorSchedule polynomial(Role r, double C, double alpha);
  static ErrorSchedule geometric(Role r, double C, double q);

  /// C n^-alpha, C q^n or 0, for n >= 1.
  double eval(int n) const;
  bool is_zero() const { return kind == Kind::zero || C == 0.0; }
  std::string describe() const;
};

/// Seeded random direction scaled to norm schedule.eval(n).
RealGrid make_gradient_error(int n, const ErrorSchedule& schedule, Shape shape, std::uint64_t seed);

/// Numerical saddle point used as the probe in certificate checks.
struct SaddleReference {
  RealGrid x_star;
  RealGrid y_star;
  double F_star = 0.0;
  double est_accuracy = 0.0;
  std::string provenance;
};

/// Seed derivation for independent streams (noise, errors, ...).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace ipd

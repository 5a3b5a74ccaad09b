#pragma once

// Outer loops: the five inexact primal-dual variants on the nested splitting
// (TV kept in g and handled by the inner solver) and the two exact baselines
// on the fully dualized problem with the stacked operator (A, grad).

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ipd/certificates.hpp"
#include "ipd/problem.hpp"
#include "ipd/prox.hpp"

namespace ipd {

/// Weighted running mean of iterates.
template <class T>
class ErgodicAccumulator {
 public:
  void add(const T& v, double weight) {
    if (!(weight > 0.0)) throw Error("ErgodicAccumulator: weight must be positive");
    if (count_ == 0) {
      sum_ = lincomb(weight, v, 0.0, v);
    } else {
      sum_ = lincomb(1.0, sum_, weight, v);
    }
    total_ += weight;
    ++count_;
  }
  T mean() const {
    if (count_ == 0) throw Error("ErgodicAccumulator: empty");
    return lincomb(1.0 / total_, sum_, 0.0, sum_);
  }
  double total_weight() const { return total_; }
  int count() const { return count_; }

 private:
  T sum_{};
  double total_ = 0.0;
  int count_ = 0;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RunEntry {
  int n = 0;
  double tau = 0.0, sigma = 0.0, theta = 0.0;  ///< steps used to produce iterate n
  double F = 0.0;                              ///< energy of x^n
  double F_erg = 0.0;                          ///< energy of the ergodic average
  double lag_gap = kNaN;                       ///< ergodic Lagrangian gap vs reference
  double eps_target = 0.0;
  double eps_achieved = 0.0;
  double delta_achieved = 0.0;
  double grad_error_norm = 0.0;
  int inner_iterations = 0;
  long long cum_inner_iterations = 0;
  double rhs_bound = kNaN;
  double mixed_rhs = kNaN;  ///< reduced variant, bounded dual domain
  double descent_lhs = kNaN, descent_rhs = kNaN;
  bool descent_ok = true;
  double A = 0.0, B = 0.0, T = 0.0;
};

struct RunRecord {
  Variant variant = Variant::basic;
  std::vector<RunEntry> entries;
  RealGrid x_last, y_last;  ///< for baselines y_last is the data part
  RealGrid x_erg, y_erg;
  RealGrid x_best, y_best;  ///< iterate of lowest energy
  double F_best = std::numeric_limits<double>::infinity();
  VectorField tv_dual_last;  ///< baselines: TV part of the dual
  bool all_descent_ok = true;
  bool all_eps_within_target = true;
};

struct Schedules {
  ErrorSchedule eps = ErrorSchedule::zero(ErrorSchedule::Role::primal_eps);
  ErrorSchedule delta = ErrorSchedule::zero(ErrorSchedule::Role::dual_delta);
  ErrorSchedule grad = ErrorSchedule::zero(ErrorSchedule::Role::gradient_norm);
};

struct RunOptions {
  Mode mode = Mode::practical;
  int max_inner = 1000;
  double exact_target = 1e-14;  ///< inner gap target when the eps schedule is zero
  double worst_case_step = 0.25;
  double practical_step = 0.99;
  bool restart = true;
  std::uint64_t seed = 0;
  /// Probe for descent checks, Lagrangian gaps and theorem bounds.
  const SaddleReference* reference = nullptr;
  /// Diameter of dom h* for the mixed-rate bound (0 disables).
  double dual_diameter = 0.0;
  bool check_descent = true;
  /// Replace the inner solver by the exact row/column TV prox.
  bool exact_prox = false;
  /// Keep every primal iterate (memory heavy; for comparisons in tests).
  std::vector<RealGrid>* iterates = nullptr;
};

/// Input of the first primal prox from (x0, y0): x0 - tau0 (K* y1 + grad f(x0)).
RealGrid first_prox_input(const SaddleProblem& problem, const StepState& step0,
                          const RealGrid& x0, const RealGrid& y0);

RunRecord run_inexact_pd(const SaddleProblem& problem, const StepState& state0,
                         const Schedules& schedules, int N, const RealGrid& x0,
                         const RealGrid& y0, const RunOptions& options);

/// Exact primal-dual on the fully dualized problem (data dual and TV dual);
/// the primal part is only the smooth term. Needs g = lambda TV. problem.L is
/// ignored; `L_stacked` bounds ||(K, grad)||.
RunRecord run_exact_baseline(const SaddleProblem& problem, const StepState& state0, double L_stacked,
                             int N, const RealGrid& x0, const RealGrid& y0,
                             const RunOptions& options);

}  // namespace ipd

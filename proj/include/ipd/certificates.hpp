#pragma once

// Executable versions of the convergence statements: error sums A_N, B_N and
// weights T_N per variant, the resulting bounds on the ergodic Lagrangian gap,
// the one-step descent inequality, the recursion lemma, and slope fits.

#include <vector>

#include "ipd/problem.hpp"
#include "ipd/prox.hpp"

namespace ipd {

struct CertificateAccumulator {
  Variant variant = Variant::basic;
  ApproxType type = ApproxType::type2;
  int n = 0;
  double A = 0.0;
  double B = 0.0;
  double T = 0.0;
  double tau0 = 0.0;
  double sigma0 = 0.0;
  std::vector<double> dA, dB, dT;

  CertificateAccumulator() = default;
  CertificateAccumulator(Variant v, ApproxType t) : variant(v), type(t) {}
};

/// Adds the n-th terms. `prev` holds the steps used to produce iterate n
/// (index n-1); for n = 1 it also fixes tau0 and sigma0.
void accumulate(CertificateAccumulator& acc, int n, const StepState& prev, double eps,
                double delta, double grad_err_norm);

/// Weight of iterate n in the ergodic average (prev as in accumulate, initial
/// steps in step0).
double ergodic_weight(Variant v, const StepState& step0, const StepState& prev, int n);

/// Upper bound on L(X^N, y*) - L(x*, Y^N) for N = acc.n.
double theorem_rhs(const CertificateAccumulator& acc, double dist_x0, double dist_y0,
                   const StepState& step0, const StepState& stepN);

/// Reduced variant with a bounded dual domain: bound on F(X^N) - F*.
double mixed_rate_rhs(const CertificateAccumulator& acc, double dist_x0, double dual_diameter,
                      const StepState& step0);

/// Basic variant: ||x^N - x*|| <= A + sqrt(2 tau Delta0 + 2B + A^2), with the
/// type-1 sums (tau |e| + sqrt(2 tau eps) in A).
double basic_distance_bound(double A, double B, double dist_x0, double dist_y0, double tau,
                            double sigma);

/// L(x, y*) - L(x*, y); +inf when y is infeasible for h*.
double lagrangian_gap(const SaddleProblem& problem, const RealGrid& x, const RealGrid& y,
                      const SaddleReference& ref);

struct IteratePack {
  const RealGrid& xbar;
  const RealGrid& ybar;
  const RealGrid& xtilde;
  const RealGrid& ytilde;
  const RealGrid& xcheck;
  const RealGrid& ycheck;
};

struct DescentCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

/// Both sides of the one-step inequality at the probe (x, y).
DescentCheck descent_inequality_check(const SaddleProblem& problem, const IteratePack& it,
                                      double tau, double sigma, double grad_err_norm, double eps,
                                      double delta, ApproxType type, const RealGrid& x,
                                      const RealGrid& y);

/// u_N <= (1/2) sum lambda + sqrt(S_N + ((1/2) sum lambda)^2) for every N.
std::vector<double> recursion_bound(const std::vector<double>& S, const std::vector<double>& lambdas);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
  int excluded = 0;  ///< nonpositive values skipped
};

/// Least squares of log(value) against log(n) (or n itself when semilog) over
/// from <= n <= to. Needs at least 5 positive points.
SlopeFit fit_loglog_slope(const std::vector<double>& n, const std::vector<double>& values,
                          double from, double to, bool semilog = false);

}  // namespace ipd

#pragma once

// Proximal maps. Closed forms for the box, soft-threshold and the two data
// conjugates, plus the inexact TV prox: FISTA on the dual of
//   min_x ||x - y||^2 / (2 tau) + lambda ||grad x||_1
// stopped by the duality gap, which certifies a type-2 approximation.

#include <string>
#include <vector>

#include "ipd/grid.hpp"

namespace ipd {

enum class ApproxType { exact, type0, type1, type2, type3 };

std::string to_string(ApproxType t);

struct ProxCertificate {
  ApproxType approx_type = ApproxType::type2;
  double target_eps = 0.0;
  double achieved_gap = 0.0;
  int inner_iterations = 0;
  double distance_bound = 0.0;  ///< sqrt(2 tau achieved_gap)
  bool converged = false;
};

/// prox_{tau lambda TV}(anchor). Dual variable z lives in the box
/// P_lambda = {|z_i| <= lambda} and the primal is recovered as
/// x = anchor - tau grad^* z = anchor + tau div z.
struct ProxSubproblem {
  RealGrid anchor;
  double tau = 1.0;
  double lambda = 1.0;

  ProxSubproblem(RealGrid anchor, double tau, double lambda);

  /// G(x) = ||x - anchor||^2/(2 tau) + lambda ||grad x||_1
  double primal_value(const RealGrid& x) const;
  /// W(z) = (tau/2)||div z||^2 + <div z, anchor>; z is assumed feasible.
  double dual_value(const VectorField& z) const;
  RealGrid recover_primal(const VectorField& z) const;
};

struct TvProxResult {
  RealGrid x;
  VectorField z;
  ProxCertificate cert;
};

RealGrid soft_threshold(const RealGrid& y, double kappa);
RealGrid project_box(const RealGrid& p, double lambda);
VectorField project_box(const VectorField& p, double lambda);

/// prox of h*(y) = <y,f> + |y|^2/2 with step sigma: (ybar - sigma f)/(1 + sigma).
RealGrid dual_prox_l2_data(const RealGrid& ybar, double sigma, const RealGrid& f);
/// prox of h*(y) = <y,f> + indicator(|y|_inf <= 1): clamp(ybar - sigma f, -1, 1).
RealGrid dual_prox_l1_data(const RealGrid& ybar, double sigma, const RealGrid& f);

/// ||grad u||_1 (anisotropic).
double tv_seminorm(const RealGrid& u);

/// G(x) + W(P(z)) where P is the projection onto P_lambda.
double duality_gap(const ProxSubproblem& sub, const RealGrid& x, const VectorField& z);

/// Gap of the pair (recover_primal(z), z) in the form
/// sum_i (lambda |grad x|_i - z_i (grad x)_i), which avoids the cancellation in
/// G + W. z must be feasible.
double recovered_gap(const ProxSubproblem& sub, const VectorField& z);

/// FISTA on W over P_lambda with step step_scale/(8 tau). Starts from warm_z
/// (projected) or zero. Returns the first iterate whose gap is <= eps_target,
/// otherwise the best one seen after max_inner steps with converged = false.
/// With restart, momentum is reset whenever it points uphill.
/// gap_trace, when given, receives the gap of every evaluated iterate,
/// starting with the initial point.
TvProxResult solve_tv_prox(const ProxSubproblem& sub, double eps_target,
                           const VectorField* warm_z, int max_inner, double step_scale = 0.99,
                           std::vector<double>* gap_trace = nullptr, bool restart = true);

/// Norm of e = tau grad^*(w - z) where w agrees with lambda sign(grad x) on the
/// support of grad x and with z elsewhere. Since e lies in
/// tau d(lambda TV)(x) + x - anchor when x = recover_primal(z), x is the exact
/// prox of anchor + e.
double tv_subgradient_residual(const ProxSubproblem& sub, const RealGrid& x,
                               const VectorField& z);

/// eps0 = r^2 / (2 tau).
double check_type0_bound(const RealGrid& z, const RealGrid& y, double tau,
                         double subgrad_residual_norm);

/// Exact 1-D TV denoising argmin_x |x - y|^2/2 + lambda sum |x_{k+1} - x_k|
/// (dynamic programming over the piecewise-linear derivative, linear time).
std::vector<double> tv1d_prox(const std::vector<double>& y, double lambda);

/// prox_{tau lambda TV}(anchor) by Dykstra splitting into row and column
/// chains, each solved exactly with tv1d_prox. Stops when successive
/// iterates differ by at most tol (sup norm) or after max_iter sweeps.
RealGrid exact_tv_prox(const RealGrid& anchor, double tau, double lambda, int max_iter = 20000,
                       double tol = 1e-15);

}  // namespace ipd

#include "ipd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ipd/prox.hpp"

namespace ipd {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::basic: return "basic";
    case Variant::reduced: return "reduced";
    case Variant::primal_accel: return "primal_accel";
    case Variant::dual_accel: return "dual_accel";
    case Variant::smooth: return "smooth";
    case Variant::exact_pdhg: return "exact_pdhg";
    case Variant::exact_pdhg_accel: return "exact_pdhg_accel";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : {Variant::basic, Variant::reduced, Variant::primal_accel, Variant::dual_accel,
                    Variant::smooth, Variant::exact_pdhg, Variant::exact_pdhg_accel}) {
    if (to_string(v) == s) return v;
  }
  throw Error("unknown variant '" + s + "'");
}

bool is_exact_baseline(Variant v) {
  return v == Variant::exact_pdhg || v == Variant::exact_pdhg_accel;
}

std::string to_string(Mode m) { return m == Mode::worst_case ? "worst_case" : "practical"; }

double SaddleProblem::f_value(const RealGrid& x) const {
  if (gamma_f == 0.0) return 0.0;
  return 0.5 * gamma_f * inner_product(x, x);
}

double SaddleProblem::g_value(const RealGrid& x) const {
  switch (g_kind) {
    case PrimalKind::tv: return lambda * tv_seminorm(x);
    case PrimalKind::l1: return lambda * norms(x).l1;
    case PrimalKind::zero: return 0.0;
  }
  return 0.0;
}

double SaddleProblem::h_value(const RealGrid& v) const {
  require_same_shape(v, data, "h_value");
  if (h_kind == DualKind::box_data) {
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) s += std::abs(v[k] - data[k]);
    return s;
  }
  return 0.5 * distance_squared(v, data);
}

double SaddleProblem::hstar_value(const RealGrid& y) const {
  const double lin = inner_product(y, data);
  if (h_kind == DualKind::box_data) {
    if (norms(y).linf > 1.0) return std::numeric_limits<double>::infinity();
    return lin;
  }
  return lin + 0.5 * inner_product(y, y);
}

double SaddleProblem::primal_energy(const RealGrid& x) const {
  return f_value(x) + g_value(x) + h_value(K->apply(x));
}

double SaddleProblem::lagrangian(const RealGrid& x, const RealGrid& y) const {
  return inner_product(K->apply(x), y) + f_value(x) + g_value(x) - hstar_value(y);
}

RealGrid SaddleProblem::grad_f(const RealGrid& x) const { return scaled(gamma_f, x); }

RealGrid SaddleProblem::dual_prox(const RealGrid& ybar, double sigma) const {
  if (h_kind == DualKind::box_data) {
    if (unshifted_box_dual) return dual_prox_l1_data(ybar, sigma, RealGrid(ybar.shape()));
    return dual_prox_l1_data(ybar, sigma, data);
  }
  return dual_prox_l2_data(ybar, sigma, data);
}

double SaddleProblem::dual_delta(const RealGrid& ybar, const RealGrid& y, double sigma) const {
  require_same_shape(ybar, y, "dual_delta");
  double s = 0.0;
  if (h_kind == DualKind::box_data) {
    if (norms(y).linf > 1.0) return std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double r = (ybar[k] - y[k]) / sigma - data[k];
      s += std::abs(r) - r * y[k];
    }
    return std::max(s, 0.0);
  }
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double r = (ybar[k] - y[k]) / sigma - y[k] - data[k];
    s += r * r;
  }
  return 0.5 * s;
}

RealGrid SaddleProblem::primal_prox_closed(const RealGrid& v, double tau) const {
  switch (g_kind) {
    case PrimalKind::l1: return soft_threshold(v, tau * lambda);
    case PrimalKind::zero: return v;
    case PrimalKind::tv: break;
  }
  throw Error("primal_prox_closed: TV prox has no closed form");
}

namespace {

constexpr double kStepSlack = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error("step condition violated: " + what);
}

}  // namespace

void validate_steps(const StepState& s, double L, double L_f, double gamma, double mu) {
  require(s.tau > 0.0 && s.sigma > 0.0 && std::isfinite(s.tau) && std::isfinite(s.sigma),
          "tau, sigma must be positive");
  require(s.theta > 0.0 && s.theta <= 1.0, "theta must lie in (0,1]");
  require(s.beta >= 0.0, "beta must be nonnegative");
  const double tsl = s.tau * s.sigma * L * L;
  switch (s.variant) {
    case Variant::basic:
      require(s.tau * L_f + tsl + s.tau * s.beta * L < 1.0, "tau L_f + sigma tau L^2 + tau beta L < 1");
      break;
    case Variant::reduced:
      require(L_f == 0.0, "reduced variant needs f = 0");
      require(tsl < 1.0, "tau sigma L^2 < 1");
      break;
    case Variant::exact_pdhg:
      if (L_f == 0.0) {
        require(tsl < 1.0, "tau sigma L^2 < 1");
      } else {
        require(s.tau * L_f + tsl <= 1.0 + kStepSlack, "tau L_f + tau sigma L^2 <= 1");
      }
      break;
    case Variant::primal_accel:
    case Variant::exact_pdhg_accel:
      require(gamma > 0.0, "primal acceleration needs gamma > 0");
      require(s.tau * L_f + tsl <= 1.0 + kStepSlack, "tau L_f + tau sigma L^2 <= 1");
      break;
    case Variant::dual_accel:
      require(mu > 0.0, "dual acceleration needs mu > 0");
      require(L_f == 0.0, "dual acceleration needs f = 0");
      require(tsl * s.theta * s.theta <= 1.0 + kStepSlack, "tau sigma theta^2 L^2 <= 1");
      break;
    case Variant::smooth: {
      require(gamma > 0.0 && mu > 0.0, "smooth variant needs gamma, mu > 0");
      const double inv = 1.0 / s.theta;
      require(std::abs(1.0 + gamma * s.tau - inv) <= kStepSlack * inv, "1 + gamma tau = 1/theta");
      require(std::abs(1.0 + mu * s.sigma - inv) <= kStepSlack * inv, "1 + mu sigma = 1/theta");
      require(s.tau * L_f + tsl * s.theta * s.theta <= 1.0 + kStepSlack,
              "tau L_f + tau sigma theta^2 L^2 <= 1");
      break;
    }
  }
}

StepState update_steps(const StepState& s, double gamma, double mu) {
  StepState n = s;
  switch (s.variant) {
    case Variant::primal_accel:
    case Variant::exact_pdhg_accel: {
      if (!(gamma > 0.0)) throw Error("update_steps: primal acceleration needs gamma > 0");
      n.theta = 1.0 / std::sqrt(1.0 + gamma * s.tau);
      n.tau = n.theta * s.tau;
      n.sigma = s.sigma / n.theta;
      break;
    }
    case Variant::dual_accel: {
      if (!(mu > 0.0)) throw Error("update_steps: dual acceleration needs mu > 0");
      n.theta = 1.0 / std::sqrt(1.0 + 2.0 * mu * s.sigma);
      n.sigma = n.theta * s.sigma;
      n.tau = s.tau / n.theta;
      break;
    }
    default: break;
  }
  return n;
}

StepState smooth_step_solve(double gamma, double mu, double L, double L_f) {
  if (!(gamma > 0.0 && mu > 0.0 && L > 0.0 && L_f >= 0.0)) {
    throw Error("smooth_step_solve: need gamma, mu, L > 0 and L_f >= 0");
  }
  const double r = L_f / gamma;
  const double root = std::sqrt(1.0 + 4.0 * L * L / (gamma * mu) + r * r + 2.0 * r);
  const double num = 1.0 + root - r;
  StepState s;
  s.variant = Variant::smooth;
  s.tau = num / (2.0 * L_f + 2.0 * L * L / mu);
  s.sigma = num / (2.0 * L_f * mu / gamma + 2.0 * L * L / gamma);
  s.theta = 1.0 - (root - r - 1.0) / (2.0 * L * L / (gamma * mu));
  validate_steps(s, L, L_f, gamma, mu);
  return s;
}

ErrorSchedule ErrorSchedule::zero(Role r) {
  ErrorSchedule s;
  s.role = r;
  return s;
}

ErrorSchedule ErrorSchedule::polynomial(Role r, double C, double alpha) {
  if (!(C >= 0.0) || !(alpha > 0.0)) throw Error("polynomial schedule needs C >= 0, alpha > 0");
  ErrorSchedule s;
  s.kind = Kind::polynomial;
  s.role = r;
  s.C = C;
  s.alpha = alpha;
  return s;
}

ErrorSchedule ErrorSchedule::geometric(Role r, double C, double q) {
  if (!(C >= 0.0) || !(q > 0.0 && q < 1.0)) throw Error("geometric schedule needs C >= 0, 0 < q < 1");
  ErrorSchedule s;
  s.kind = Kind::geometric;
  s.role = r;
  s.C = C;
  s.q = q;
  return s;
}

double ErrorSchedule::eval(int n) const {
  if (n < 1) throw Error("ErrorSchedule::eval: n must be >= 1");
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::polynomial: return C * std::pow(static_cast<double>(n), -alpha);
    case Kind::geometric: return C * std::pow(q, n);
  }
  return 0.0;
}

std::string ErrorSchedule::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::zero: os << "zero"; break;
    case Kind::polynomial: os << "polynomial(C=" << C << ",alpha=" << alpha << ")"; break;
    case Kind::geometric: os << "geometric(C=" << C << ",q=" << q << ")"; break;
  }
  return os.str();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over a simple combination
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1) + 0xBF58476D1CE4E5B9ULL * index;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RealGrid make_gradient_error(int n, const ErrorSchedule& schedule, Shape shape,
                             std::uint64_t seed) {
  if (schedule.role != ErrorSchedule::Role::gradient_norm) {
    throw Error("make_gradient_error: schedule role must be gradient_norm");
  }
  RealGrid e(shape);
  const double target = schedule.eval(n);
  if (target == 0.0) return e;
  std::mt19937_64 rng(mix_seed(seed, 7, static_cast<std::uint64_t>(n)));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : e.values()) v = dist(rng);
  const double nrm = norm2(e);
  if (nrm == 0.0) throw Error("make_gradient_error: degenerate direction");
  for (double& v : e.values()) v *= target / nrm;
  return e;
}

}  // namespace ipd

#pragma once

// Linear operators K used by the saddle-point solvers: forward-difference
// gradient with its negative-adjoint divergence, a periodic separable Gaussian
// blur, the identity, and the stacked map (A, grad) used by the fully
// dualized baselines.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <type_traits>
#include <vector>

#include "ipd/grid.hpp"

namespace ipd {

/// Dual variable of the stacked operator (A, grad): one grid for the data
/// term and one field for the total-variation term.
struct StackedDual {
  RealGrid data;
  VectorField tv;

  StackedDual() = default;
  explicit StackedDual(Shape shape) : data(shape), tv(shape) {}
  StackedDual(RealGrid d, VectorField t) : data(std::move(d)), tv(std::move(t)) {}

  Shape shape() const { return data.shape(); }
  bool same_shape(const StackedDual& o) const {
    return data.same_shape(o.data) && tv.same_shape(o.tv);
  }
};

double inner_product(const StackedDual& u, const StackedDual& v);
Norms norms(const StackedDual& u);
inline double norm2(const StackedDual& u) { return norms(u).l2; }
StackedDual lincomb(double a, const StackedDual& u, double b, const StackedDual& v);

template <class In, class Out>
class LinearOperator {
 public:
  using input_type = In;
  using output_type = Out;

  virtual ~LinearOperator() = default;

  virtual Out apply(const In& u) const = 0;
  virtual In adjoint(const Out& p) const = 0;
  virtual Shape input_shape() const = 0;
  virtual Shape output_shape() const = 0;

  /// Certified upper bound on the operator norm; +inf when unknown.
  virtual double norm_bound() const { return std::numeric_limits<double>::infinity(); }
};

using GridOperator = LinearOperator<RealGrid, RealGrid>;

/// Forward differences with Neumann boundary: the last difference along each
/// axis is zero.
class GradientOperator final : public LinearOperator<RealGrid, VectorField> {
 public:
  explicit GradientOperator(Shape shape);

  VectorField apply(const RealGrid& u) const override;
  /// Returns -div(p).
  RealGrid adjoint(const VectorField& p) const override;
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return shape_; }
  /// ||grad||^2 <= 8 on every grid.
  double norm_bound() const override;

 private:
  Shape shape_;
};

VectorField apply_gradient(const RealGrid& u);
/// Backward differences; the exact negative adjoint of apply_gradient.
RealGrid apply_divergence(const VectorField& p);

/// In-place variants writing into preallocated outputs of matching shape.
void gradient_into(const RealGrid& u, VectorField& out);
void divergence_into(const VectorField& p, RealGrid& out);

class IdentityOperator final : public GridOperator {
 public:
  explicit IdentityOperator(Shape shape) : shape_(shape) {}
  RealGrid apply(const RealGrid& u) const override { return u; }
  RealGrid adjoint(const RealGrid& p) const override { return p; }
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return shape_; }
  double norm_bound() const override { return 1.0; }

 private:
  Shape shape_;
};

/// Separable convolution with a normalized 1-D Gaussian, truncated at radius
/// ceil(3 sigma), periodic boundary. The kernel is even, so the operator is
/// self-adjoint, and since the kernel is nonnegative with unit sum its norm is
/// exactly 1.
class GaussianBlurOperator final : public GridOperator {
 public:
  GaussianBlurOperator(double fwhm_pixels, Shape shape);

  RealGrid apply(const RealGrid& u) const override;
  RealGrid adjoint(const RealGrid& p) const override { return apply(p); }
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return shape_; }
  double norm_bound() const override { return 1.0; }

  double sigma() const { return sigma_; }
  int radius() const { return radius_; }
  /// Taps for offsets -radius..radius.
  const std::vector<double>& kernel() const { return kernel_; }

 private:
  Shape shape_;
  double sigma_;
  int radius_;
  std::vector<double> kernel_;
};

std::shared_ptr<GaussianBlurOperator> gaussian_blur_operator(double fwhm_pixels, Shape shape);

/// The stacked map u -> (A u, grad u).
class StackedOperator final : public LinearOperator<RealGrid, StackedDual> {
 public:
  explicit StackedOperator(std::shared_ptr<const GridOperator> data_op);

  StackedDual apply(const RealGrid& u) const override;
  /// Sum of the part adjoints.
  RealGrid adjoint(const StackedDual& p) const override;
  Shape input_shape() const override { return data_op_->input_shape(); }
  Shape output_shape() const override { return data_op_->output_shape(); }
  /// sqrt(||A||^2 + 8), from ||(A, grad)||^2 <= ||A||^2 + ||grad||^2.
  double norm_bound() const override;

  const GridOperator& data_operator() const { return *data_op_; }

 private:
  std::shared_ptr<const GridOperator> data_op_;
};

struct NormEstimate {
  double estimate = 0.0;  ///< power-iteration value of ||K||
  double bound = 0.0;     ///< 1.001 * estimate
  int iterations = 0;
};

inline constexpr double kNormSafetyFactor = 1.001;

namespace detail {
void fill_uniform(RealGrid& u, std::uint64_t seed);
}

/// Power iteration on K*K from a seeded uniform random start. The estimate is
/// the square root of the largest Rayleigh quotient seen, so it never exceeds
/// the true norm (up to roundoff).
template <class In, class Out>
NormEstimate estimate_operator_norm(const LinearOperator<In, Out>& op, int max_iters, double tol,
                                    std::uint64_t seed) {
  static_assert(std::is_same_v<In, RealGrid>, "power iteration expects grid inputs");
  if (max_iters < 1) throw Error("estimate_operator_norm: max_iters must be >= 1");
  RealGrid v(op.input_shape());
  detail::fill_uniform(v, seed);
  double nv = norm2(v);
  NormEstimate out;
  double best = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    v = scaled(1.0 / nv, v);
    const Out kv = op.apply(v);
    const double rayleigh = inner_product(kv, kv);
    RealGrid w = op.adjoint(kv);
    out.iterations = it;
    const double prev = best;
    if (rayleigh > best) best = rayleigh;
    nv = norm2(w);
    if (nv == 0.0) break;
    v = std::move(w);
    if (it > 1 && std::abs(best - prev) <= tol * best) break;
  }
  out.estimate = std::sqrt(best);
  out.bound = kNormSafetyFactor * out.estimate;
  return out;
}

}  // namespace ipd

#include "ipd/operators.hpp"

#include <random>

namespace ipd {

double inner_product(const StackedDual& u, const StackedDual& v) {
  return inner_product(u.data, v.data) + inner_product(u.tv, v.tv);
}

Norms norms(const StackedDual& u) {
  const Norms a = norms(u.data);
  const Norms b = norms(u.tv);
  return {a.l1 + b.l1, std::sqrt(a.l2 * a.l2 + b.l2 * b.l2), std::max(a.linf, b.linf)};
}

StackedDual lincomb(double a, const StackedDual& u, double b, const StackedDual& v) {
  return {lincomb(a, u.data, b, v.data), lincomb(a, u.tv, b, v.tv)};
}

void gradient_into(const RealGrid& u, VectorField& out) {
  const std::size_t rows = u.rows(), cols = u.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t row = i * cols;
    for (std::size_t j = 0; j + 1 < cols; ++j) out.dx[row + j] = u[row + j + 1] - u[row + j];
    if (cols > 0) out.dx[row + cols - 1] = 0.0;
  }
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    const std::size_t row = i * cols;
    for (std::size_t j = 0; j < cols; ++j) out.dy[row + j] = u[row + cols + j] - u[row + j];
  }
  if (rows > 0) {
    const std::size_t last = (rows - 1) * cols;
    for (std::size_t j = 0; j < cols; ++j) out.dy[last + j] = 0.0;
  }
}

void divergence_into(const VectorField& p, RealGrid& out) {
  const std::size_t rows = p.dx.rows(), cols = p.dx.cols();
  const double* px = p.dx.data().data();
  const double* py = p.dy.data().data();
  double* o = out.values().data();
  // horizontal part: backward differences, first and last column special
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t row = i * cols;
    if (cols == 1) {
      o[row] = 0.0;
      continue;
    }
    o[row] = px[row];
    for (std::size_t j = 1; j + 1 < cols; ++j) o[row + j] = px[row + j] - px[row + j - 1];
    o[row + cols - 1] = -px[row + cols - 2];
  }
  if (rows == 1) return;
  for (std::size_t j = 0; j < cols; ++j) o[j] += py[j];
  for (std::size_t i = 1; i + 1 < rows; ++i) {
    const std::size_t row = i * cols;
    for (std::size_t j = 0; j < cols; ++j) o[row + j] += py[row + j] - py[row - cols + j];
  }
  const std::size_t last = (rows - 1) * cols;
  for (std::size_t j = 0; j < cols; ++j) o[last + j] -= py[last - cols + j];
}

VectorField apply_gradient(const RealGrid& u) {
  VectorField out(u.shape());
  gradient_into(u, out);
  return out;
}

RealGrid apply_divergence(const VectorField& p) {
  RealGrid out(p.shape());
  divergence_into(p, out);
  return out;
}

GradientOperator::GradientOperator(Shape shape) : shape_(shape) {
  if (shape.rows < 1 || shape.cols < 1) throw Error("GradientOperator: empty shape");
}

VectorField GradientOperator::apply(const RealGrid& u) const {
  if (u.shape() != shape_) throw Error("GradientOperator: shape mismatch");
  return apply_gradient(u);
}

RealGrid GradientOperator::adjoint(const VectorField& p) const {
  if (p.shape() != shape_) throw Error("GradientOperator: shape mismatch");
  RealGrid d = apply_divergence(p);
  for (double& v : d.values()) v = -v;
  return d;
}

double GradientOperator::norm_bound() const { return std::sqrt(8.0); }

GaussianBlurOperator::GaussianBlurOperator(double fwhm_pixels, Shape shape) : shape_(shape) {
  if (!(fwhm_pixels > 0.0) || !std::isfinite(fwhm_pixels)) {
    throw Error("gaussian_blur_operator: fwhm must be positive");
  }
  if (shape.rows < 1 || shape.cols < 1) throw Error("gaussian_blur_operator: empty shape");
  sigma_ = fwhm_pixels / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  radius_ = static_cast<int>(std::ceil(3.0 * sigma_));
  kernel_.resize(2 * static_cast<std::size_t>(radius_) + 1);
  double sum = 0.0;
  for (int t = -radius_; t <= radius_; ++t) {
    const double w = std::exp(-0.5 * (t * t) / (sigma_ * sigma_));
    kernel_[static_cast<std::size_t>(t + radius_)] = w;
    sum += w;
  }
  for (double& w : kernel_) w /= sum;
}

namespace {

// Periodic 1-D correlation along rows (axis 1) or columns (axis 0). The kernel
// is even, so correlation and convolution coincide.
RealGrid convolve_axis(const RealGrid& u, const std::vector<double>& kernel, int radius,
                       bool along_cols) {
  const std::size_t rows = u.rows(), cols = u.cols();
  const std::size_t n = along_cols ? cols : rows;
  std::vector<std::size_t> wrap(n + 2 * static_cast<std::size_t>(radius));
  for (std::size_t k = 0; k < wrap.size(); ++k) {
    const long long idx = static_cast<long long>(k) - radius;
    const long long m = static_cast<long long>(n);
    wrap[k] = static_cast<std::size_t>(((idx % m) + m) % m);
  }
  RealGrid out(rows, cols);
  const std::size_t taps = kernel.size();
  if (along_cols) {
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t row = i * cols;
      for (std::size_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < taps; ++t) s += kernel[t] * u[row + wrap[j + t]];
        out[row + j] = s;
      }
    }
  } else {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < taps; ++t) s += kernel[t] * u[wrap[i + t] * cols + j];
        out[i * cols + j] = s;
      }
    }
  }
  return out;
}

}  // namespace

RealGrid GaussianBlurOperator::apply(const RealGrid& u) const {
  if (u.shape() != shape_) throw Error("GaussianBlurOperator: shape mismatch");
  return convolve_axis(convolve_axis(u, kernel_, radius_, true), kernel_, radius_, false);
}

std::shared_ptr<GaussianBlurOperator> gaussian_blur_operator(double fwhm_pixels, Shape shape) {
  return std::make_shared<GaussianBlurOperator>(fwhm_pixels, shape);
}

StackedOperator::StackedOperator(std::shared_ptr<const GridOperator> data_op)
    : data_op_(std::move(data_op)) {
  if (!data_op_) throw Error("StackedOperator: null data operator");
}

StackedDual StackedOperator::apply(const RealGrid& u) const {
  return {data_op_->apply(u), apply_gradient(u)};
}

RealGrid StackedOperator::adjoint(const StackedDual& p) const {
  RealGrid out = data_op_->adjoint(p.data);
  const RealGrid div = apply_divergence(p.tv);
  axpy(-1.0, div, out);
  return out;
}

double StackedOperator::norm_bound() const {
  const double a = data_op_->norm_bound();
  return std::sqrt(a * a + 8.0);
}

namespace detail {

void fill_uniform(RealGrid& u, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (double& v : u.values()) v = dist(rng);
}

}  // namespace detail

}  // namespace ipd

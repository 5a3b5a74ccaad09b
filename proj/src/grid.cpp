#include "ipd/grid.hpp"

#include <cmath>
#include <string>

namespace ipd {

RealGrid::RealGrid(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw Error("RealGrid: non-finite fill value");
}

RealGrid::RealGrid(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error("RealGrid: data length " + std::to_string(data_.size()) + " != " +
                std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!all_finite()) throw Error("RealGrid: non-finite entry");
}

bool RealGrid::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

VectorField::VectorField(RealGrid x, RealGrid y) : dx(std::move(x)), dy(std::move(y)) {
  if (!dx.same_shape(dy)) throw Error("VectorField: component shapes differ");
}

void require_same_shape(const RealGrid& u, const RealGrid& v, const char* where) {
  if (!u.same_shape(v)) {
    throw Error(std::string(where) + ": shape mismatch " + std::to_string(u.rows()) + "x" +
                std::to_string(u.cols()) + " vs " + std::to_string(v.rows()) + "x" +
                std::to_string(v.cols()));
  }
}

void require_same_shape(const VectorField& u, const VectorField& v, const char* where) {
  require_same_shape(u.dx, v.dx, where);
  require_same_shape(u.dy, v.dy, where);
}

double inner_product(const RealGrid& u, const RealGrid& v) {
  require_same_shape(u, v, "inner_product");
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
  return s;
}

double inner_product(const VectorField& u, const VectorField& v) {
  require_same_shape(u, v, "inner_product");
  double s = 0.0;
  for (std::size_t k = 0; k < u.dx.size(); ++k) s += u.dx[k] * v.dx[k];
  for (std::size_t k = 0; k < u.dy.size(); ++k) s += u.dy[k] * v.dy[k];
  return s;
}

namespace {

void accumulate_norms(const RealGrid& u, double& l1, double& sq, double& linf) {
  for (double v : u.values()) {
    const double a = std::abs(v);
    l1 += a;
    sq += v * v;
    if (a > linf) linf = a;
  }
}

}  // namespace

Norms norms(const RealGrid& u) {
  double l1 = 0.0, sq = 0.0, linf = 0.0;
  accumulate_norms(u, l1, sq, linf);
  return {l1, std::sqrt(sq), linf};
}

Norms norms(const VectorField& u) {
  double l1 = 0.0, sq = 0.0, linf = 0.0;
  accumulate_norms(u.dx, l1, sq, linf);
  accumulate_norms(u.dy, l1, sq, linf);
  return {l1, std::sqrt(sq), linf};
}

double distance_squared(const RealGrid& u, const RealGrid& v) {
  require_same_shape(u, v, "distance");
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u[k] - v[k];
    s += d * d;
  }
  return s;
}

double distance(const RealGrid& u, const RealGrid& v) { return std::sqrt(distance_squared(u, v)); }

RealGrid lincomb(double a, const RealGrid& u, double b, const RealGrid& v) {
  require_same_shape(u, v, "lincomb");
  RealGrid out(u.rows(), u.cols());
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = a * u[k] + b * v[k];
  return out;
}

VectorField lincomb(double a, const VectorField& u, double b, const VectorField& v) {
  return {lincomb(a, u.dx, b, v.dx), lincomb(a, u.dy, b, v.dy)};
}

void axpy(double a, const RealGrid& x, RealGrid& y) {
  require_same_shape(x, y, "axpy");
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += a * x[k];
}

void axpy(double a, const VectorField& x, VectorField& y) {
  axpy(a, x.dx, y.dx);
  axpy(a, x.dy, y.dy);
}

RealGrid scaled(double a, const RealGrid& u) {
  RealGrid out(u.rows(), u.cols());
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = a * u[k];
  return out;
}

VectorField scaled(double a, const VectorField& u) { return {scaled(a, u.dx), scaled(a, u.dy)}; }

}  // namespace ipd

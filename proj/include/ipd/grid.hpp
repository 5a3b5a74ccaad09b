#pragma once

// Flat real-valued grids and the vector algebra shared by all solvers.
//
// A RealGrid is a row-major rows x cols array of doubles. It plays the role of
// a primal image, a dual variable or a data term interchangeably. A
// VectorField is a pair of grids of identical shape holding the two
// components of a discrete gradient. All reductions run sequentially from the
// first to the last entry so that results are bitwise reproducible.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ipd {

/// Signals a violated precondition (shape mismatch, invalid parameter, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t count() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

class RealGrid {
 public:
  RealGrid() = default;
  RealGrid(std::size_t rows, std::size_t cols, double fill = 0.0);
  explicit RealGrid(Shape shape, double fill = 0.0) : RealGrid(shape.rows, shape.cols, fill) {}
  /// Throws if data.size() != rows*cols or any entry is not finite.
  RealGrid(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  Shape shape() const { return {rows_, cols_}; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const RealGrid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

  friend bool operator==(const RealGrid&, const RealGrid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct VectorField {
  RealGrid dx;
  RealGrid dy;

  VectorField() = default;
  VectorField(std::size_t rows, std::size_t cols) : dx(rows, cols), dy(rows, cols) {}
  explicit VectorField(Shape shape) : VectorField(shape.rows, shape.cols) {}
  /// Throws unless both components have the same shape.
  VectorField(RealGrid x, RealGrid y);

  Shape shape() const { return dx.shape(); }
  bool same_shape(const VectorField& other) const { return dx.same_shape(other.dx); }

  friend bool operator==(const VectorField&, const VectorField&) = default;
};

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

double inner_product(const RealGrid& u, const RealGrid& v);
double inner_product(const VectorField& u, const VectorField& v);

Norms norms(const RealGrid& u);
Norms norms(const VectorField& u);

inline double norm2(const RealGrid& u) { return norms(u).l2; }
inline double norm2(const VectorField& u) { return norms(u).l2; }

/// Squared Euclidean distance, summed left to right.
double distance_squared(const RealGrid& u, const RealGrid& v);
double distance(const RealGrid& u, const RealGrid& v);

/// Componentwise a*u + b*v.
RealGrid lincomb(double a, const RealGrid& u, double b, const RealGrid& v);
VectorField lincomb(double a, const VectorField& u, double b, const VectorField& v);

/// y <- y + a*x, in place.
void axpy(double a, const RealGrid& x, RealGrid& y);
void axpy(double a, const VectorField& x, VectorField& y);

RealGrid scaled(double a, const RealGrid& u);
VectorField scaled(double a, const VectorField& u);

void require_same_shape(const RealGrid& u, const RealGrid& v, const char* where);
void require_same_shape(const VectorField& u, const VectorField& v, const char* where);

}  // namespace ipd

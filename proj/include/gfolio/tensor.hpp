#pragma once

#include <Eigen/Core>
#include <initializer_list>
#include <string>
#include <vector>

#include "gfolio/errors.hpp"
#include "gfolio/rng.hpp"

namespace gfolio {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense double tensor with row-major (last axis fastest) flat storage.
// Values are immutable by convention once handed to the autodiff graph.
// Construction rejects NaN/Inf so every operator output is checked.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, Eigen::ArrayXd data);

  static Tensor zeros(const Shape& shape);
  static Tensor full(const Shape& shape, double value);
  static Tensor scalar(double value) { return full({1}, value); }
  static Tensor from(const Shape& shape, std::initializer_list<double> values);
  static Tensor from(const Shape& shape, const std::vector<double>& values);
  // Entries uniform in [-bound, bound].
  static Tensor uniform(const Shape& shape, double bound, Rng& rng);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  Eigen::Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }
  int dim(int axis) const;

  Eigen::ArrayXd& array() { return data_; }
  const Eigen::ArrayXd& array() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](Eigen::Index i) { return data_[i]; }
  double operator[](Eigen::Index i) const { return data_[i]; }

  // Value of a tensor holding exactly one entry.
  double item() const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  // Row-major strides; strides.back() == 1.
  std::vector<Eigen::Index> strides() const;

  // 2-D view over the flat buffer (row-major), used by matmul/dense layers.
  Eigen::Map<RowMatrixXd> as_matrix(int rows, int cols);
  Eigen::Map<const RowMatrixXd> as_matrix(int rows, int cols) const;

  void ensure_finite(const char* where) const;

 private:
  Shape shape_;
  Eigen::ArrayXd data_;
};

void check_same_shape(const Tensor& a, const Tensor& b, const char* op);

// Elementwise activations (pure tensor versions; graph nodes wrap these).
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
// Softmax along one axis; each fiber is non-negative and sums to 1.
Tensor softmax(const Tensor& x, int axis);

// Digamma, the derivative of lgamma; needed by Dirichlet score gradients.
double digamma(double x);

}  // namespace gfolio

#include "gfolio/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace gfolio {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ", ";
    os << s[i];
  }
  os << ")";
  return os.str();
}

namespace {

Eigen::Index shape_numel(const Shape& shape) {
  Eigen::Index n = 1;
  for (int d : shape) {
    if (d <= 0) throw shape_error("Tensor: axis lengths must be positive, got " + shape_str(shape));
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(Shape shape, Eigen::ArrayXd data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != data_.size()) {
    throw shape_error("Tensor: shape " + shape_str(shape_) + " does not match buffer of length " +
                      std::to_string(data_.size()));
  }
  ensure_finite("Tensor construction");
}

Tensor Tensor::zeros(const Shape& shape) {
  return Tensor(shape, Eigen::ArrayXd::Zero(shape_numel(shape)));
}

Tensor Tensor::full(const Shape& shape, double value) {
  return Tensor(shape, Eigen::ArrayXd::Constant(shape_numel(shape), value));
}

Tensor Tensor::from(const Shape& shape, std::initializer_list<double> values) {
  return from(shape, std::vector<double>(values));
}

Tensor Tensor::from(const Shape& shape, const std::vector<double>& values) {
  Eigen::ArrayXd a(static_cast<Eigen::Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) a[static_cast<Eigen::Index>(i)] = values[i];
  return Tensor(shape, std::move(a));
}

Tensor Tensor::uniform(const Shape& shape, double bound, Rng& rng) {
  Eigen::ArrayXd a(shape_numel(shape));
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = rng.uniform(-bound, bound);
  return Tensor(shape, std::move(a));
}

int Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) {
    throw shape_error("Tensor::dim: axis " + std::to_string(axis) + " out of range for shape " +
                      shape_str(shape_));
  }
  return shape_[static_cast<size_t>(axis)];
}

double Tensor::item() const {
  if (size() != 1) {
    throw shape_error("Tensor::item: expected a single entry, got shape " + shape_str(shape_));
  }
  return data_[0];
}

std::vector<Eigen::Index> Tensor::strides() const {
  std::vector<Eigen::Index> st(shape_.size(), 1);
  for (int i = rank() - 2; i >= 0; --i) {
    st[static_cast<size_t>(i)] = st[static_cast<size_t>(i + 1)] * shape_[static_cast<size_t>(i + 1)];
  }
  return st;
}

Eigen::Map<RowMatrixXd> Tensor::as_matrix(int rows, int cols) {
  if (static_cast<Eigen::Index>(rows) * cols != size()) {
    throw shape_error("Tensor::as_matrix: " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " view does not cover shape " + shape_str(shape_));
  }
  return Eigen::Map<RowMatrixXd>(data_.data(), rows, cols);
}

Eigen::Map<const RowMatrixXd> Tensor::as_matrix(int rows, int cols) const {
  if (static_cast<Eigen::Index>(rows) * cols != size()) {
    throw shape_error("Tensor::as_matrix: " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " view does not cover shape " + shape_str(shape_));
  }
  return Eigen::Map<const RowMatrixXd>(data_.data(), rows, cols);
}

void Tensor::ensure_finite(const char* where) const {
  if (!data_.isFinite().all()) {
    throw numeric_error(std::string(where) + ": tensor of shape " + shape_str(shape_) +
                        " contains NaN or Inf");
  }
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw shape_error(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                      shape_str(b.shape()));
  }
}

Tensor tanh(const Tensor& x) { return Tensor(x.shape(), x.array().tanh()); }

Tensor relu(const Tensor& x) { return Tensor(x.shape(), x.array().max(0.0)); }

Tensor sigmoid(const Tensor& x) {
  return Tensor(x.shape(), 1.0 / (1.0 + (-x.array()).exp()));
}

Tensor softmax(const Tensor& x, int axis) {
  if (axis < 0 || axis >= x.rank()) {
    throw shape_error("softmax: axis " + std::to_string(axis) + " out of range for shape " +
                      shape_str(x.shape()));
  }
  Eigen::Index outer = 1, inner = 1;
  const Eigen::Index len = x.dim(axis);
  for (int i = 0; i < axis; ++i) outer *= x.dim(i);
  for (int i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);

  Eigen::ArrayXd out(x.size());
  for (Eigen::Index o = 0; o < outer; ++o) {
    for (Eigen::Index i = 0; i < inner; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < len; ++j) mx = std::max(mx, x[(o * len + j) * inner + i]);
      double denom = 0.0;
      for (Eigen::Index j = 0; j < len; ++j) {
        const double e = std::exp(x[(o * len + j) * inner + i] - mx);
        out[(o * len + j) * inner + i] = e;
        denom += e;
      }
      for (Eigen::Index j = 0; j < len; ++j) out[(o * len + j) * inner + i] /= denom;
    }
  }
  return Tensor(x.shape(), std::move(out));
}

double digamma(double x) {
  if (!(x > 0.0)) throw numeric_error("digamma: requires x > 0");
  double result = 0.0;
  // Shift into the asymptotic regime.
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series: ln x - 1/(2x) - sum B_2n / (2n x^(2n)).
  result += std::log(x) - 0.5 * inv;
  result -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return result;
}

}  // namespace gfolio

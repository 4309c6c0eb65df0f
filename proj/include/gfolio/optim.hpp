#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gfolio/tensor.hpp"

namespace gfolio {

// Adam optimizer state for one parameter tensor (bias-corrected form).
struct AdamState {
  Tensor first_moment;
  Tensor second_moment;
  long long step_count = 0;
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// One Adam update in place; increments step_count.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state);

// A named learnable tensor with its gradient slot and optimizer state.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  AdamState adam;
};

// Insertion-ordered collection of parameters. Ordering is load-bearing: the
// checkpoint format and Adam sweeps both follow it, which keeps training runs
// byte-reproducible.
class ParamStore {
 public:
  Param& add(const std::string& name, Tensor init);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }

  size_t size() const { return params_.size(); }
  Param& operator[](size_t i) { return *params_[i]; }
  const Param& operator[](size_t i) const { return *params_[i]; }

  void set_alpha(double alpha);
  void zero_grads();
  // Adam update on every parameter from its accumulated gradient.
  void step_all();
  double grad_norm() const;
  bool grads_finite() const;
  Eigen::Index num_values() const;

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::map<std::string, size_t> index_;
};

}  // namespace gfolio

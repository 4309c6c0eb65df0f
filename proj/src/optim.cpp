#include "gfolio/optim.hpp"

#include <cmath>

namespace gfolio {

void AdamState::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw numeric_error("AdamState: beta1 and beta2 must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw numeric_error("AdamState: epsilon must be > 0");
  if (step_count < 0) throw numeric_error("AdamState: negative step count");
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& state) {
  check_same_shape(param, grad, "adam_step");
  state.validate();
  if (state.first_moment.empty()) {
    state.first_moment = Tensor::zeros(param.shape());
    state.second_moment = Tensor::zeros(param.shape());
  }
  check_same_shape(param, state.first_moment, "adam_step (first moment)");
  check_same_shape(param, state.second_moment, "adam_step (second moment)");

  state.step_count += 1;
  auto& m = state.first_moment.array();
  auto& v = state.second_moment.array();
  const auto& g = grad.array();
  m = state.beta1 * m + (1.0 - state.beta1) * g;
  v = state.beta2 * v + (1.0 - state.beta2) * g.square();
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  param.array() -= state.alpha * (m / bc1) / ((v / bc2).sqrt() + state.epsilon);
  param.ensure_finite("adam_step");
}

Param& ParamStore::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw config_error("ParamStore: duplicate parameter '" + name + "'");
  auto p = std::make_unique<Param>();
  p->name = name;
  p->grad = Tensor::zeros(init.shape());
  p->adam.first_moment = Tensor::zeros(init.shape());
  p->adam.second_moment = Tensor::zeros(init.shape());
  p->value = std::move(init);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Param& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw config_error("ParamStore: unknown parameter '" + name + "'");
  return *params_[it->second];
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw config_error("ParamStore: unknown parameter '" + name + "'");
  return *params_[it->second];
}

void ParamStore::set_alpha(double alpha) {
  for (auto& p : params_) p->adam.alpha = alpha;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p->grad.array().setZero();
}

void ParamStore::step_all() {
  for (auto& p : params_) adam_step(p->value, p->grad, p->adam);
}

double ParamStore::grad_norm() const {
  double sq = 0.0;
  for (const auto& p : params_) sq += p->grad.array().square().sum();
  return std::sqrt(sq);
}

bool ParamStore::grads_finite() const {
  for (const auto& p : params_) {
    if (!p->grad.array().isFinite().all()) return false;
  }
  return true;
}

Eigen::Index ParamStore::num_values() const {
  Eigen::Index n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

}  // namespace gfolio

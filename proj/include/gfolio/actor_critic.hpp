#pragma once

#include <Eigen/Core>

#include "gfolio/autodiff.hpp"
#include "gfolio/gcn.hpp"
#include "gfolio/optim.hpp"
#include "gfolio/policy.hpp"
#include "gfolio/portfolio.hpp"
#include "gfolio/rng.hpp"
#include "gfolio/tensor.hpp"

namespace gfolio {

struct AgentConfig {
  int num_assets = 0;
  int window = 30;          // trading window length n (>= 3 for the 1x3 kernel)
  int latent_channels = 3;  // fixed by the autoencoder latent width
  int cheb_order = 3;
  double kappa = 50.0;  // Dirichlet concentration
  double gamma = 0.99;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  // The value network reads the feature tensor only by default; this switch
  // appends the previous weights as an extra input channel.
  bool critic_sees_weights = false;

  void validate() const;
};

// Everything the policy needs about one trading day: the autoencoder latent
// block and that day's correlation structure.
struct Observation {
  Tensor latent;                      // [latent_channels, assets, window]
  Eigen::MatrixXd scaled_laplacian;   // 2 L_sym / lambda_max - I
};

// Eq.-29 state: external market features plus the previous allocation.
struct AgentState {
  Observation obs;
  WeightVector prev_weights;
};

struct Transition {
  AgentState s;
  WeightVector action;
  double log_prob = 0;
  double reward = 0;  // per-step logarithmic return
  AgentState s_next;
};

struct TrainDiagnostics {
  double td_error = 0;
  double value_s = 0;
  double value_next = 0;
  double critic_loss = 0;
  double actor_loss = 0;
  double critic_grad_norm = 0;
  double actor_grad_norm = 0;
};

double td_error(double reward, double value_s, double value_next, double gamma);

// Actor-critic agent. The actor runs latent -> graph convolution ->
// 1x3 conv (tanh) -> 1x(n-2) conv (tanh) -> previous-weights channel ->
// 1x1 conv (tanh) -> cash bias -> softmax. The critic runs the (detached)
// graph-convolution output through two 1x1 convs and one 1xm conv (ReLU)
// into a dense scalar head. Chebyshev coefficients live with the actor and
// learn through its loss in the same backward pass.
class Agent {
 public:
  Agent(const AgentConfig& config, Rng& rng);

  const AgentConfig& config() const { return cfg_; }

  // Post-GCN feature tensor for a state (evaluation mode, no tape).
  Tensor gcn_features(const AgentState& state);

  // Deterministic action: the policy mean.
  WeightVector mean_weights(const AgentState& state);
  // Stochastic action with its log-density.
  ActionSample act(const AgentState& state, Rng& rng);
  // Critic value estimate.
  double value(const AgentState& state);

  // One actor-critic update on a transition. The critic moves to shrink the
  // squared TD residual (bootstrap target held fixed); the actor moves along
  // td_error * grad log pi. Both run through Adam. A non-finite gradient
  // aborts the step without touching the parameters.
  TrainDiagnostics train_step(const Transition& transition);

  ParamStore& actor_params() { return actor_params_; }
  ParamStore& critic_params() { return critic_params_; }
  const ParamStore& actor_params() const { return actor_params_; }
  const ParamStore& critic_params() const { return critic_params_; }

  // Graph builders, exposed for gradient checks.
  ad::NodePtr actor_graph(const AgentState& state);
  ad::NodePtr critic_graph(const AgentState& state);
  // log pi(action | state) as a differentiable function of the actor stack.
  ad::NodePtr log_prob_graph(const AgentState& state, const WeightVector& action);

 private:
  void check_state(const AgentState& state) const;

  AgentConfig cfg_;
  ParamStore actor_params_;   // includes the Chebyshev coefficients
  ParamStore critic_params_;
};

}  // namespace gfolio

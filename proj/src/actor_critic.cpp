#include "gfolio/actor_critic.hpp"

#include <cmath>
#include <string>

namespace gfolio {

namespace {

Tensor conv_init(int out, int in, int k, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in * k));
  return Tensor::uniform({out, in, k}, bound, rng);
}

Tensor conv_bias_init(int out, int in, int k, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in * k));
  return Tensor::uniform({out}, bound, rng);
}

// Previous asset weights replicated across `cols` time steps as one channel.
Tensor weight_channel(const WeightVector& w, int assets, int cols) {
  Tensor t = Tensor::zeros({1, assets, cols});
  for (int a = 0; a < assets; ++a) {
    for (int j = 0; j < cols; ++j) t[a * cols + j] = w.asset(a);
  }
  return t;
}

}  // namespace

void AgentConfig::validate() const {
  if (num_assets < 1) throw config_error("agent: need at least one asset");
  if (window < 3) throw config_error("agent: trading window must be >= 3 for the 1x3 kernel");
  if (window < num_assets) {
    throw config_error("agent: the critic's 1x" + std::to_string(num_assets) +
                       " kernel needs window >= assets (" + std::to_string(window) + " < " +
                       std::to_string(num_assets) + ")");
  }
  if (latent_channels < 1) throw config_error("agent: latent channel count must be >= 1");
  if (cheb_order < 1) throw config_error("agent: Chebyshev order must be >= 1");
  if (!(kappa > 0)) throw config_error("agent: concentration kappa must be > 0");
  if (!(gamma >= 0 && gamma <= 1)) throw config_error("agent: gamma must lie in [0, 1]");
  if (!(actor_lr > 0) || !(critic_lr > 0)) throw config_error("agent: learning rates must be > 0");
}

double td_error(double reward, double value_s, double value_next, double gamma) {
  if (!(gamma >= 0 && gamma <= 1)) throw numeric_error("td_error: gamma must lie in [0, 1]");
  return reward + gamma * value_next - value_s;
}

Agent::Agent(const AgentConfig& config, Rng& rng) : cfg_(config) {
  cfg_.validate();
  const int f = cfg_.latent_channels;
  const int m = cfg_.num_assets;
  const int n = cfg_.window;

  // Chebyshev coefficients train through the actor loss, so they live in the
  // actor store.
  actor_params_.add("gcn.theta",
                    Tensor::uniform({f, f, cfg_.cheb_order},
                                    1.0 / std::sqrt(static_cast<double>(f * cfg_.cheb_order)), rng));
  actor_params_.add("actor.conv1.k", conv_init(f, f, 3, rng));
  actor_params_.add("actor.conv1.b", conv_bias_init(f, f, 3, rng));
  actor_params_.add("actor.conv2.k", conv_init(f, f, n - 2, rng));
  actor_params_.add("actor.conv2.b", conv_bias_init(f, f, n - 2, rng));
  actor_params_.add("actor.conv3.k", conv_init(1, f + 1, 1, rng));
  actor_params_.add("actor.conv3.b", conv_bias_init(1, f + 1, 1, rng));
  actor_params_.add("actor.cash_bias", Tensor::zeros({1}));
  actor_params_.set_alpha(cfg_.actor_lr);

  const int critic_in = f + (cfg_.critic_sees_weights ? 1 : 0);
  critic_params_.add("critic.conv1.k", conv_init(f, critic_in, 1, rng));
  critic_params_.add("critic.conv1.b", conv_bias_init(f, critic_in, 1, rng));
  critic_params_.add("critic.conv2.k", conv_init(f, f, 1, rng));
  critic_params_.add("critic.conv2.b", conv_bias_init(f, f, 1, rng));
  critic_params_.add("critic.conv3.k", conv_init(1, f, m, rng));
  critic_params_.add("critic.conv3.b", conv_bias_init(1, f, m, rng));
  const int dense_in = m * (n - m + 1);
  critic_params_.add("critic.dense.w",
                     Tensor::uniform({1, dense_in}, 1.0 / std::sqrt(static_cast<double>(dense_in)), rng));
  critic_params_.add("critic.dense.b", Tensor::zeros({1}));
  critic_params_.set_alpha(cfg_.critic_lr);
}

void Agent::check_state(const AgentState& state) const {
  const Shape expected = {cfg_.latent_channels, cfg_.num_assets, cfg_.window};
  if (state.obs.latent.shape() != expected) {
    throw shape_error("agent: state latent " + shape_str(state.obs.latent.shape()) +
                      " does not match configuration " + shape_str(expected));
  }
  if (state.obs.scaled_laplacian.rows() != cfg_.num_assets ||
      state.obs.scaled_laplacian.cols() != cfg_.num_assets) {
    throw shape_error("agent: Laplacian size does not match asset count");
  }
  if (state.prev_weights.num_assets() != cfg_.num_assets) {
    throw shape_error("agent: previous weights hold " +
                      std::to_string(state.prev_weights.num_assets()) + " assets, expected " +
                      std::to_string(cfg_.num_assets));
  }
}

Tensor Agent::gcn_features(const AgentState& state) {
  check_state(state);
  return gcn_layer_eval(state.obs.latent, actor_params_.at("gcn.theta").value,
                        state.obs.scaled_laplacian);
}

ad::NodePtr Agent::actor_graph(const AgentState& state) {
  check_state(state);
  const int m = cfg_.num_assets;

  ad::NodePtr x = ad::constant(state.obs.latent);
  ad::NodePtr features = ad::sigmoid(
      gcn_apply(x, ad::leaf(actor_params_.at("gcn.theta")), state.obs.scaled_laplacian));
  features = ad::tanh(ad::conv1xk(features, ad::leaf(actor_params_.at("actor.conv1.k")),
                                  ad::leaf(actor_params_.at("actor.conv1.b"))));
  features = ad::tanh(ad::conv1xk(features, ad::leaf(actor_params_.at("actor.conv2.k")),
                                  ad::leaf(actor_params_.at("actor.conv2.b"))));
  // Previous action enters as an extra channel: the current action depends
  // on the preceding one.
  features = ad::concat(features, ad::constant(weight_channel(state.prev_weights, m, 1)), 0);
  features = ad::tanh(ad::conv1xk(features, ad::leaf(actor_params_.at("actor.conv3.k")),
                                  ad::leaf(actor_params_.at("actor.conv3.b"))));
  ad::NodePtr logits = ad::reshape(features, {m});
  logits = ad::concat(ad::leaf(actor_params_.at("actor.cash_bias")), logits, 0);
  return ad::softmax(logits, 0);
}

ad::NodePtr Agent::critic_graph(const AgentState& state) {
  check_state(state);
  const int m = cfg_.num_assets;
  const int n = cfg_.window;

  // The value network reads the graph-convolution output as data; the
  // Chebyshev coefficients update only through the actor's loss.
  Tensor features = gcn_features(state);
  ad::NodePtr h;
  if (cfg_.critic_sees_weights) {
    h = ad::concat(ad::constant(std::move(features)),
                   ad::constant(weight_channel(state.prev_weights, m, n)), 0);
  } else {
    h = ad::constant(std::move(features));
  }
  h = ad::relu(ad::conv1xk(h, ad::leaf(critic_params_.at("critic.conv1.k")),
                           ad::leaf(critic_params_.at("critic.conv1.b"))));
  h = ad::relu(ad::conv1xk(h, ad::leaf(critic_params_.at("critic.conv2.k")),
                           ad::leaf(critic_params_.at("critic.conv2.b"))));
  h = ad::relu(ad::conv1xk(h, ad::leaf(critic_params_.at("critic.conv3.k")),
                           ad::leaf(critic_params_.at("critic.conv3.b"))));
  h = ad::reshape(h, {m * (n - m + 1), 1});
  h = ad::dense(ad::leaf(critic_params_.at("critic.dense.w")), h,
                ad::leaf(critic_params_.at("critic.dense.b")));
  return ad::reshape(h, {1});
}

ad::NodePtr Agent::log_prob_graph(const AgentState& state, const WeightVector& action) {
  if (action.num_assets() != cfg_.num_assets) {
    throw shape_error("agent: action holds " + std::to_string(action.num_assets()) +
                      " assets, expected " + std::to_string(cfg_.num_assets));
  }
  ad::NodePtr mean = actor_graph(state);
  // Dirichlet parameters: clamp the mean away from the simplex boundary,
  // renormalize, scale by the concentration.
  ad::NodePtr clamped = ad::clamp_min(mean, 1e-8);
  ad::NodePtr alpha =
      ad::mul_scalar(ad::scale(clamped, ad::reciprocal(ad::sum(clamped))), cfg_.kappa);

  // log Dirichlet density at the action.
  const Eigen::VectorXd a = action.vec().cwiseMax(1e-300);
  Tensor log_a = Tensor::zeros({static_cast<int>(a.size())});
  for (Eigen::Index i = 0; i < a.size(); ++i) log_a[i] = std::log(a[i]);

  ad::NodePtr lp = ad::lgamma(ad::sum(alpha));
  lp = ad::sub(lp, ad::sum(ad::lgamma(alpha)));
  lp = ad::add(lp, ad::sum(ad::mul(ad::add_scalar(alpha, -1.0), ad::constant(std::move(log_a)))));
  return lp;
}

WeightVector Agent::mean_weights(const AgentState& state) {
  ad::NodePtr out = actor_graph(state);
  Eigen::VectorXd w(cfg_.num_assets + 1);
  for (int i = 0; i <= cfg_.num_assets; ++i) w[i] = out->value[i];
  return WeightVector(std::move(w));
}

ActionSample Agent::act(const AgentState& state, Rng& rng) {
  return sample_action({mean_weights(state), cfg_.kappa}, rng);
}

double Agent::value(const AgentState& state) { return critic_graph(state)->value.item(); }

TrainDiagnostics Agent::train_step(const Transition& transition) {
  TrainDiagnostics diag;

  // Critic: half squared TD residual with a detached bootstrap target, so
  // the descent direction equals td_error * grad V.
  ad::NodePtr v_s = critic_graph(transition.s);
  diag.value_s = v_s->value.item();
  diag.value_next = value(transition.s_next);
  diag.td_error = td_error(transition.reward, diag.value_s, diag.value_next, cfg_.gamma);

  const double target = transition.reward + cfg_.gamma * diag.value_next;
  ad::NodePtr residual = ad::add_scalar(v_s, -target);
  ad::NodePtr critic_loss = ad::mul_scalar(ad::mul(residual, residual), 0.5);
  diag.critic_loss = critic_loss->value.item();

  critic_params_.zero_grads();
  ad::backward(critic_loss);
  if (!critic_params_.grads_finite()) {
    throw numeric_error("train_step: non-finite critic gradient (td_error=" +
                        std::to_string(diag.td_error) + ", value=" + std::to_string(diag.value_s) +
                        ")");
  }
  diag.critic_grad_norm = critic_params_.grad_norm();

  // Actor (with the Chebyshev coefficients): ascend td_error * log pi.
  ad::NodePtr log_pi = log_prob_graph(transition.s, transition.action);
  ad::NodePtr actor_loss = ad::mul_scalar(log_pi, -diag.td_error);
  diag.actor_loss = actor_loss->value.item();

  actor_params_.zero_grads();
  ad::backward(actor_loss);
  if (!actor_params_.grads_finite()) {
    throw numeric_error("train_step: non-finite actor gradient (td_error=" +
                        std::to_string(diag.td_error) + ", log_prob=" +
                        std::to_string(log_pi->value.item()) + ")");
  }
  diag.actor_grad_norm = actor_params_.grad_norm();

  critic_params_.step_all();
  actor_params_.step_all();
  return diag;
}

}  // namespace gfolio

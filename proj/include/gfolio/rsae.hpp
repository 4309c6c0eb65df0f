#pragma once

#include <vector>

#include "gfolio/autodiff.hpp"
#include "gfolio/normalize.hpp"
#include "gfolio/optim.hpp"
#include "gfolio/rng.hpp"
#include "gfolio/tensor.hpp"

namespace gfolio {

// Restricted stacked autoencoder. The encoder compresses each day's
// 11-feature column to 3 latent values through sigmoid layers; the decoder
// (both layers 3 wide, final layer linear so price ratios above 1 remain
// reachable) reconstructs only the low/close/high rows. Applied pointwise in
// time: a column's latent code depends on that column alone.
class RsaeModel {
 public:
  static constexpr int kInputWidth = NormalizedWindow::kRows;  // 11
  static constexpr int kLatentWidth = 3;
  static_assert(kLatentWidth < kInputWidth, "autoencoder must be under-complete");

  explicit RsaeModel(Rng& rng, double learning_rate = 1e-3);

  // Latent codes for a batch of feature columns: [11, N] -> [3, N].
  Eigen::MatrixXd encode(const Eigen::MatrixXd& features) const;

  // Reconstruction loss graph over a batch; used by training and tests.
  ad::NodePtr loss_graph(const Eigen::MatrixXd& batch);

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  void set_learning_rate(double alpha) { params_.set_alpha(alpha); }

 private:
  ParamStore params_;
};

struct RsaeTrainOptions {
  int epochs = 0;
  int batch_size = 32;
};

struct RsaeTrainResult {
  double initial_loss = 0;
  double final_loss = 0;
};

// Flattens every (asset, day) column of the windows into one sample set.
Eigen::MatrixXd collect_rsae_samples(const std::vector<NormalizedWindow>& windows);

// Minimizes the mean squared reconstruction error of the three price rows
// with Adam over shuffled minibatches. Zero epochs leaves the model at its
// initialization and reports the initial loss twice.
RsaeTrainResult rsae_train(RsaeModel& model, const std::vector<NormalizedWindow>& windows,
                           const RsaeTrainOptions& options, Rng& rng);

// Same update on a pre-collected [11, N] sample matrix.
RsaeTrainResult rsae_train_samples(RsaeModel& model, const Eigen::MatrixXd& samples,
                                   const RsaeTrainOptions& options, Rng& rng);

// Latent tensor [3, assets, window] for one normalized window.
Tensor rsae_encode(const RsaeModel& model, const NormalizedWindow& window);

}  // namespace gfolio

#include "gfolio/rsae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gfolio {

namespace {

// Encoder 11 -> 8 -> 5 -> 3, decoder 3 -> 3 -> 3.
constexpr int kEncoderWidths[] = {RsaeModel::kInputWidth, 8, 5, RsaeModel::kLatentWidth};
constexpr int kDecoderWidths[] = {RsaeModel::kLatentWidth, 3, 3};
constexpr int kEncoderLayers = 3;
constexpr int kDecoderLayers = 2;

// Fixed input conditioning. The features are day-over-day ratios parked at
// 1 +- a few percent; fed raw into saturating units they collapse to nearly
// identical codes. Centering at the ratio fixed point and rescaling spreads
// a +-4% move across the responsive part of the sigmoid.
constexpr double kInputCenter = 1.0;
constexpr double kInputScale = 25.0;

Tensor layer_init(int out, int in, Rng& rng) {
  return Tensor::uniform({out, in}, 1.0 / std::sqrt(static_cast<double>(in)), rng);
}

Tensor bias_init(int out, int in, Rng& rng) {
  return Tensor::uniform({out}, 1.0 / std::sqrt(static_cast<double>(in)), rng);
}

Eigen::MatrixXd sigmoid_mat(Eigen::MatrixXd x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

}  // namespace

RsaeModel::RsaeModel(Rng& rng, double learning_rate) {
  for (int l = 0; l < kEncoderLayers; ++l) {
    const int in = kEncoderWidths[l], out = kEncoderWidths[l + 1];
    params_.add("enc." + std::to_string(l) + ".w", layer_init(out, in, rng));
    params_.add("enc." + std::to_string(l) + ".b", bias_init(out, in, rng));
  }
  for (int l = 0; l < kDecoderLayers; ++l) {
    const int in = kDecoderWidths[l], out = kDecoderWidths[l + 1];
    params_.add("dec." + std::to_string(l) + ".w", layer_init(out, in, rng));
    params_.add("dec." + std::to_string(l) + ".b", bias_init(out, in, rng));
  }
  params_.set_alpha(learning_rate);
}

Eigen::MatrixXd RsaeModel::encode(const Eigen::MatrixXd& features) const {
  if (features.rows() != kInputWidth) {
    throw shape_error("RsaeModel::encode: expected " + std::to_string(kInputWidth) +
                      " feature rows, got " + std::to_string(features.rows()));
  }
  Eigen::MatrixXd h = (features.array() - kInputCenter) * kInputScale;
  for (int l = 0; l < kEncoderLayers; ++l) {
    const Param& w = params_.at("enc." + std::to_string(l) + ".w");
    const Param& b = params_.at("enc." + std::to_string(l) + ".b");
    const int out = w.value.dim(0), in = w.value.dim(1);
    h = sigmoid_mat((w.value.as_matrix(out, in) * h).colwise() +
                    Eigen::Map<const Eigen::VectorXd>(b.value.data(), out));
  }
  return h;
}

ad::NodePtr RsaeModel::loss_graph(const Eigen::MatrixXd& batch) {
  if (batch.rows() != kInputWidth || batch.cols() < 1) {
    throw shape_error("RsaeModel::loss_graph: expected an " + std::to_string(kInputWidth) +
                      " x N batch, got " + std::to_string(batch.rows()) + " x " +
                      std::to_string(batch.cols()));
  }
  const int cols = static_cast<int>(batch.cols());
  Tensor input = Tensor::zeros({kInputWidth, cols});
  input.as_matrix(kInputWidth, cols) = (batch.array() - kInputCenter) * kInputScale;

  ad::NodePtr h = ad::constant(std::move(input));
  for (int l = 0; l < kEncoderLayers; ++l) {
    h = ad::sigmoid(ad::dense(ad::leaf(params_.at("enc." + std::to_string(l) + ".w")), h,
                              ad::leaf(params_.at("enc." + std::to_string(l) + ".b"))));
  }
  // Decoder: sigmoid hidden layer, linear output (targets are price ratios
  // around 1 and may exceed the sigmoid range).
  h = ad::sigmoid(ad::dense(ad::leaf(params_.at("dec.0.w")), h, ad::leaf(params_.at("dec.0.b"))));
  h = ad::dense(ad::leaf(params_.at("dec.1.w")), h, ad::leaf(params_.at("dec.1.b")));

  // The loss sees only the low/close/high rows; indicators are never
  // reconstructed.
  Tensor target = Tensor::zeros({NormalizedWindow::kPriceRows, cols});
  target.as_matrix(NormalizedWindow::kPriceRows, cols) =
      batch.topRows(NormalizedWindow::kPriceRows);
  return ad::mean(ad::mul(ad::sub(h, ad::constant(target)), ad::sub(h, ad::constant(target))));
}

Eigen::MatrixXd collect_rsae_samples(const std::vector<NormalizedWindow>& windows) {
  Eigen::Index total = 0;
  for (const auto& w : windows) {
    for (const auto& block : w.per_asset) total += block.cols();
  }
  if (total == 0) throw data_error("rsae_train: no training samples");
  Eigen::MatrixXd samples(RsaeModel::kInputWidth, total);
  Eigen::Index at = 0;
  for (const auto& w : windows) {
    for (const auto& block : w.per_asset) {
      samples.middleCols(at, block.cols()) = block;
      at += block.cols();
    }
  }
  return samples;
}

RsaeTrainResult rsae_train(RsaeModel& model, const std::vector<NormalizedWindow>& windows,
                           const RsaeTrainOptions& options, Rng& rng) {
  if (windows.empty()) throw data_error("rsae_train: empty window stream");
  return rsae_train_samples(model, collect_rsae_samples(windows), options, rng);
}

RsaeTrainResult rsae_train_samples(RsaeModel& model, const Eigen::MatrixXd& samples,
                                   const RsaeTrainOptions& options, Rng& rng) {
  if (samples.cols() < 1) throw data_error("rsae_train: no training samples");
  if (options.batch_size < 1) throw config_error("rsae_train: batch size must be >= 1");
  const Eigen::Index total = samples.cols();

  RsaeTrainResult result;
  result.initial_loss = model.loss_graph(samples)->value.item();
  result.final_loss = result.initial_loss;

  std::vector<Eigen::Index> perm(static_cast<size_t>(total));
  std::iota(perm.begin(), perm.end(), 0);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    // Fisher-Yates with the deterministic stream.
    for (Eigen::Index i = total - 1; i > 0; --i) {
      const auto j = static_cast<size_t>(rng.uniform_int(0, i));
      std::swap(perm[static_cast<size_t>(i)], perm[j]);
    }
    for (Eigen::Index start = 0; start < total; start += options.batch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(options.batch_size, total - start);
      Eigen::MatrixXd batch(RsaeModel::kInputWidth, count);
      for (Eigen::Index c = 0; c < count; ++c) {
        batch.col(c) = samples.col(perm[static_cast<size_t>(start + c)]);
      }
      model.params().zero_grads();
      ad::NodePtr loss = model.loss_graph(batch);
      ad::backward(loss);
      if (!model.params().grads_finite()) {
        throw numeric_error("rsae_train: non-finite gradient");
      }
      model.params().step_all();
    }
    result.final_loss = model.loss_graph(samples)->value.item();
  }
  return result;
}

Tensor rsae_encode(const RsaeModel& model, const NormalizedWindow& window) {
  const int m = window.num_assets();
  const int n = window.window;
  if (m == 0 || n == 0) throw shape_error("rsae_encode: empty window");
  Tensor latent = Tensor::zeros({RsaeModel::kLatentWidth, m, n});
  for (int a = 0; a < m; ++a) {
    const Eigen::MatrixXd& block = window.per_asset[static_cast<size_t>(a)];
    if (block.rows() != RsaeModel::kInputWidth || block.cols() != n) {
      throw shape_error("rsae_encode: asset block must be " +
                        std::to_string(RsaeModel::kInputWidth) + " x " + std::to_string(n) +
                        ", got " + std::to_string(block.rows()) + " x " +
                        std::to_string(block.cols()));
    }
    const Eigen::MatrixXd z = model.encode(block);  // 3 x n
    for (int c = 0; c < RsaeModel::kLatentWidth; ++c) {
      for (int j = 0; j < n; ++j) {
        latent[(c * m + a) * n + j] = z(c, j);
      }
    }
  }
  return latent;
}

}  // namespace gfolio

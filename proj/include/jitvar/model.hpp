#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jitvar/dataset.hpp"
#include "jitvar/seedctl.hpp"

namespace jitvar {

struct Hyperparams {
  std::size_t embed_dim = 16;
  std::vector<std::size_t> filter_widths{1, 2, 3};
  std::size_t filters_per_width = 8;
  std::size_t hidden_units = 16;
  double dropout_p = 0.5;
  double learning_rate = 0.2;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::size_t workers = 4;  // gradient shards, only used when P is on

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;

  bool operator==(const Hyperparams&) const = default;
};

struct ConvLayer {
  std::size_t width = 0;
  std::vector<double> kernel;  // [filters][width][embed_dim]
  std::vector<double> bias;    // [filters]

  bool operator==(const ConvLayer&) const = default;
};

struct Channel {
  std::vector<double> embedding;  // [vocab_size][embed_dim]
  std::vector<ConvLayer> convs;   // one per filter width, ascending

  bool operator==(const Channel&) const = default;
};

/// Trainable parameters of the two-channel text CNN. The same layout holds
/// gradients.
///
/// Tensor order (used by init, serialization and gradient checks):
///   message.embedding, code.embedding,
///   message conv kernel/bias per width, code conv kernel/bias per width,
///   fc_weight, fc_bias, out_weight, out_bias.
struct ModelParams {
  Hyperparams hp;
  std::size_t vocab_size = 0;
  Channel message;
  Channel code;
  std::vector<double> fc_weight;   // [hidden][feature_dim]
  std::vector<double> fc_bias;     // [hidden]
  std::vector<double> out_weight;  // [hidden]
  std::vector<double> out_bias;    // [1]

  /// 2 * |filter_widths| * filters_per_width
  std::size_t feature_dim() const;

  /// Zero-filled parameters with the shapes implied by hp and vocab_size.
  static ModelParams zeros(const Hyperparams& hp, std::size_t vocab_size);

  struct TensorRef {
    std::string name;
    std::span<double> data;
    bool is_bias;
    std::size_t fan_in;
    std::size_t fan_out;
  };
  struct ConstTensorRef {
    std::string name;
    std::span<const double> data;
    bool is_bias;
  };
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;

  std::size_t parameter_count() const;
  bool all_finite() const;

  bool operator==(const ModelParams&) const = default;
};

/// Glorot-uniform weights, a = sqrt(6 / (fan_in + fan_out)), drawn from
/// w_stream in tensor order; biases zero. Fans: embedding (vocab, embed_dim);
/// conv (width*embed_dim, width*filters); fc (feature_dim, hidden);
/// output (hidden, 1).
ModelParams init_params(const Hyperparams& hp, std::size_t vocab_size, Rng& w_stream);

/// Inverted-dropout multipliers, one row of hidden_units per example:
/// 1/(1-p) with probability 1-p, else 0. Draws n*hidden uniforms in row order.
struct DropoutMasks {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> scale;

  std::span<const double> row(std::size_t i) const { return {scale.data() + i * cols, cols}; }
};

DropoutMasks draw_dropout_masks(Rng& d_stream, std::size_t n, std::size_t hidden, double p);

/// Probabilities per example. masks == nullptr runs eval mode.
std::vector<double> forward(const ModelParams& params, std::span<const TokenizedCommit> batch,
                            const DropoutMasks* masks = nullptr);

/// Train-mode forward: draws the masks from d_stream first.
std::vector<double> forward_train(const ModelParams& params,
                                  std::span<const TokenizedCommit> batch, Rng& d_stream);

/// Class-weighted binary cross-entropy averaged over the batch; probabilities
/// are clamped to [1e-12, 1 - 1e-12].
double weighted_bce(std::span<const double> probs, std::span<const int> labels,
                    double class_weight);

/// Analytic gradient of weighted_bce(forward(params, batch, masks)).
/// Max pooling routes the gradient to the first maximal position.
ModelParams backward(const ModelParams& params, std::span<const TokenizedCommit> batch,
                     double class_weight, const DropoutMasks* masks = nullptr);

/// Same as above, also returns the batch loss.
ModelParams backward(const ModelParams& params, std::span<const TokenizedCommit> batch,
                     double class_weight, const DropoutMasks* masks, double& loss);

/// Eval-mode scores; deterministic regardless of training-time factors.
std::vector<double> predict(const ModelParams& params, std::span<const TokenizedCommit> test);

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Where the P-on shard combine order comes from.
enum class CombineOrderSource {
  entropy,  // std::random_device mixed with the P seed: not replayable
  seeded,   // the P seed alone: replayable, for tests
};

struct TrainOptions {
  CombineOrderSource order_source = CombineOrderSource::entropy;
  bool record_combine_orders = false;
};

/// FNV-1a fingerprints of what each factor's stream produced during training.
struct StreamDigests {
  std::uint64_t w = 0;  // initial parameters
  std::uint64_t d = 0;  // every dropout mask
  std::uint64_t b = 0;  // every epoch permutation
  std::uint64_t p = 0;  // every shard combine order (0 when P is off)

  bool operator==(const StreamDigests&) const = default;
};

struct TrainOutcome {
  ModelParams params;
  double runtime_seconds = 0.0;
  std::vector<double> epoch_losses;
  StreamDigests digests;
  /// One permutation of shard indices per SGD step, when recorded.
  std::vector<std::vector<std::uint32_t>> combine_orders;
};

/// Plain SGD for hp.epochs epochs. The W stream seeds init, D the dropout
/// masks, B the per-epoch permutation. When p_on, each batch gradient is
/// summed in hp.workers shards whose partial sums are added in a random order.
TrainOutcome train(const SplitDataset& split, const Hyperparams& hp, const SeedPlan& plan,
                   bool p_on, const TrainOptions& options = {});

// ---- checkpoints --------------------------------------------------------

/// Binary, little-endian, versioned: "JITVCKPT", u32 version, hyperparams,
/// vocab size, then every tensor in tensor order as u64 length + f64 values.
void save_checkpoint(const ModelParams& params, std::ostream& out);
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(std::istream& in);
ModelParams load_checkpoint(const std::filesystem::path& path);
std::string serialize_checkpoint(const ModelParams& params);

}  // namespace jitvar

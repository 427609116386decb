#include "jitvar/model.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "jitvar/digest.hpp"

namespace jitvar {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

void Hyperparams::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v < 1) throw std::invalid_argument(std::string("hyperparameter ") + name + " must be >= 1");
  };
  positive(embed_dim, "embed_dim");
  positive(filters_per_width, "filters_per_width");
  positive(hidden_units, "hidden_units");
  positive(batch_size, "batch_size");
  positive(epochs, "epochs");
  positive(workers, "workers");
  if (filter_widths.empty()) throw std::invalid_argument("filter_widths must not be empty");
  for (std::size_t w : filter_widths) positive(w, "filter width");
  if (!std::is_sorted(filter_widths.begin(), filter_widths.end()) ||
      std::adjacent_find(filter_widths.begin(), filter_widths.end()) != filter_widths.end()) {
    throw std::invalid_argument("filter_widths must be strictly ascending");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw std::invalid_argument("dropout_p must lie in [0, 1)");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive and finite");
  }
}

// ---- parameter layout ---------------------------------------------------

std::size_t ModelParams::feature_dim() const {
  return 2 * hp.filter_widths.size() * hp.filters_per_width;
}

ModelParams ModelParams::zeros(const Hyperparams& hp, std::size_t vocab_size) {
  hp.validate();
  if (vocab_size < 2) throw std::invalid_argument("vocab_size must be >= 2");
  ModelParams p;
  p.hp = hp;
  p.vocab_size = vocab_size;
  for (Channel* ch : {&p.message, &p.code}) {
    ch->embedding.assign(vocab_size * hp.embed_dim, 0.0);
    for (std::size_t w : hp.filter_widths) {
      ConvLayer conv;
      conv.width = w;
      conv.kernel.assign(hp.filters_per_width * w * hp.embed_dim, 0.0);
      conv.bias.assign(hp.filters_per_width, 0.0);
      ch->convs.push_back(std::move(conv));
    }
  }
  p.fc_weight.assign(hp.hidden_units * p.feature_dim(), 0.0);
  p.fc_bias.assign(hp.hidden_units, 0.0);
  p.out_weight.assign(hp.hidden_units, 0.0);
  p.out_bias.assign(1, 0.0);
  return p;
}

std::vector<ModelParams::TensorRef> ModelParams::tensors() {
  const std::size_t e = hp.embed_dim;
  const std::size_t f = hp.filters_per_width;
  std::vector<TensorRef> out;
  out.push_back({"message.embedding", message.embedding, false, vocab_size, e});
  out.push_back({"code.embedding", code.embedding, false, vocab_size, e});
  for (auto [name, ch] : {std::pair{"message", &message}, std::pair{"code", &code}}) {
    for (auto& conv : ch->convs) {
      const std::string base = std::string(name) + ".conv" + std::to_string(conv.width);
      out.push_back({base + ".kernel", conv.kernel, false, conv.width * e, conv.width * f});
      out.push_back({base + ".bias", conv.bias, true, 0, 0});
    }
  }
  out.push_back({"fc.weight", fc_weight, false, feature_dim(), hp.hidden_units});
  out.push_back({"fc.bias", fc_bias, true, 0, 0});
  out.push_back({"out.weight", out_weight, false, hp.hidden_units, 1});
  out.push_back({"out.bias", out_bias, true, 0, 0});
  return out;
}

std::vector<ModelParams::ConstTensorRef> ModelParams::tensors() const {
  auto refs = const_cast<ModelParams*>(this)->tensors();
  std::vector<ConstTensorRef> out;
  out.reserve(refs.size());
  for (auto& r : refs) out.push_back({std::move(r.name), r.data, r.is_bias});
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.data.size();
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto& t : tensors()) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

namespace {

/// Flat views without names, for the hot training loop.
std::vector<std::span<double>> spans(ModelParams& p) {
  std::vector<std::span<double>> out{p.message.embedding, p.code.embedding};
  for (Channel* ch : {&p.message, &p.code}) {
    for (auto& conv : ch->convs) {
      out.emplace_back(conv.kernel);
      out.emplace_back(conv.bias);
    }
  }
  out.emplace_back(p.fc_weight);
  out.emplace_back(p.fc_bias);
  out.emplace_back(p.out_weight);
  out.emplace_back(p.out_bias);
  return out;
}

}  // namespace

ModelParams init_params(const Hyperparams& hp, std::size_t vocab_size, Rng& w_stream) {
  ModelParams p = ModelParams::zeros(hp, vocab_size);
  for (auto& t : p.tensors()) {
    if (t.is_bias) continue;
    const double a = std::sqrt(6.0 / static_cast<double>(t.fan_in + t.fan_out));
    for (double& v : t.data) v = w_stream.uniform(-a, a);
  }
  return p;
}

DropoutMasks draw_dropout_masks(Rng& d_stream, std::size_t n, std::size_t hidden, double p) {
  DropoutMasks m{n, hidden, std::vector<double>(n * hidden)};
  const double keep_scale = 1.0 / (1.0 - p);
  for (double& s : m.scale) s = d_stream.uniform() < p ? 0.0 : keep_scale;
  return m;
}

// ---- forward / backward -------------------------------------------------

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct ChannelCache {
  std::vector<double> x;             // gathered embeddings [len][embed_dim]
  std::vector<std::size_t> argmax;   // [width index * filters + f]
  std::vector<double> max_pre;       // pre-activation at argmax
};

struct ExampleCache {
  ChannelCache message;
  ChannelCache code;
  std::vector<double> features;
  std::vector<double> fc_pre;
  std::vector<double> hidden_out;  // after ReLU and dropout
  double prob = 0.5;
};

void forward_channel(const Channel& ch, std::span<const std::int32_t> ids, const ModelParams& p,
                     ChannelCache& cache, double* features) {
  const std::size_t e = p.hp.embed_dim;
  const std::size_t f_count = p.hp.filters_per_width;
  const std::size_t len = ids.size();
  if (len < p.hp.filter_widths.back()) {
    throw std::invalid_argument("sequence length " + std::to_string(len) +
                                " is shorter than the widest filter");
  }
  cache.x.resize(len * e);
  for (std::size_t t = 0; t < len; ++t) {
    const auto id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= p.vocab_size) {
      throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of size " +
                              std::to_string(p.vocab_size));
    }
    std::copy_n(ch.embedding.data() + static_cast<std::size_t>(id) * e, e, cache.x.data() + t * e);
  }
  cache.argmax.resize(ch.convs.size() * f_count);
  cache.max_pre.resize(ch.convs.size() * f_count);
  for (std::size_t wi = 0; wi < ch.convs.size(); ++wi) {
    const ConvLayer& conv = ch.convs[wi];
    const std::size_t span_len = conv.width * e;
    const std::size_t positions = len - conv.width + 1;
    for (std::size_t f = 0; f < f_count; ++f) {
      const double* k = conv.kernel.data() + f * span_len;
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_t = 0;
      for (std::size_t t = 0; t < positions; ++t) {
        const double* xt = cache.x.data() + t * e;
        double v = conv.bias[f];
        for (std::size_t i = 0; i < span_len; ++i) v += k[i] * xt[i];
        if (v > best) {
          best = v;
          best_t = t;
        }
      }
      const std::size_t j = wi * f_count + f;
      cache.argmax[j] = best_t;
      cache.max_pre[j] = best;
      features[j] = best > 0.0 ? best : 0.0;
    }
  }
}

void forward_one(const ModelParams& p, const TokenizedCommit& ex, std::span<const double> mask,
                 ExampleCache& c) {
  const std::size_t half = p.feature_dim() / 2;
  const std::size_t hidden = p.hp.hidden_units;
  c.features.resize(2 * half);
  forward_channel(p.message, ex.message_ids, p, c.message, c.features.data());
  forward_channel(p.code, ex.code_ids, p, c.code, c.features.data() + half);

  c.fc_pre.resize(hidden);
  c.hidden_out.resize(hidden);
  double logit = p.out_bias[0];
  for (std::size_t h = 0; h < hidden; ++h) {
    const double* w = p.fc_weight.data() + h * 2 * half;
    double v = p.fc_bias[h];
    for (std::size_t j = 0; j < 2 * half; ++j) v += w[j] * c.features[j];
    c.fc_pre[h] = v;
    double a = v > 0.0 ? v : 0.0;
    if (!mask.empty()) a *= mask[h];
    c.hidden_out[h] = a;
    logit += p.out_weight[h] * a;
  }
  c.prob = sigmoid(logit);
}

void backward_channel(const Channel& ch, Channel& g, std::span<const std::int32_t> ids,
                      const ModelParams& p, const ChannelCache& cache, const double* g_features) {
  const std::size_t e = p.hp.embed_dim;
  const std::size_t f_count = p.hp.filters_per_width;
  for (std::size_t wi = 0; wi < ch.convs.size(); ++wi) {
    const ConvLayer& conv = ch.convs[wi];
    ConvLayer& gconv = g.convs[wi];
    const std::size_t span_len = conv.width * e;
    for (std::size_t f = 0; f < f_count; ++f) {
      const std::size_t j = wi * f_count + f;
      if (!(cache.max_pre[j] > 0.0)) continue;
      const double gc = g_features[j];
      const std::size_t t = cache.argmax[j];
      gconv.bias[f] += gc;
      const double* k = conv.kernel.data() + f * span_len;
      double* gk = gconv.kernel.data() + f * span_len;
      const double* xt = cache.x.data() + t * e;
      for (std::size_t i = 0; i < span_len; ++i) gk[i] += gc * xt[i];
      for (std::size_t off = 0; off < conv.width; ++off) {
        double* ge = g.embedding.data() + static_cast<std::size_t>(ids[t + off]) * e;
        const double* kk = k + off * e;
        for (std::size_t d = 0; d < e; ++d) ge[d] += gc * kk[d];
      }
    }
  }
}

void backward_one(const ModelParams& p, const TokenizedCommit& ex, std::span<const double> mask,
                  const ExampleCache& c, double g_logit, ModelParams& g,
                  std::vector<double>& g_features) {
  const std::size_t fdim = p.feature_dim();
  const std::size_t hidden = p.hp.hidden_units;
  g.out_bias[0] += g_logit;
  g_features.assign(fdim, 0.0);
  for (std::size_t h = 0; h < hidden; ++h) {
    g.out_weight[h] += g_logit * c.hidden_out[h];
    if (!(c.fc_pre[h] > 0.0)) continue;
    double g_pre = g_logit * p.out_weight[h];
    if (!mask.empty()) g_pre *= mask[h];
    g.fc_bias[h] += g_pre;
    const double* w = p.fc_weight.data() + h * fdim;
    double* gw = g.fc_weight.data() + h * fdim;
    for (std::size_t j = 0; j < fdim; ++j) {
      gw[j] += g_pre * c.features[j];
      g_features[j] += g_pre * w[j];
    }
  }
  backward_channel(p.message, g.message, ex.message_ids, p, c.message, g_features.data());
  backward_channel(p.code, g.code, ex.code_ids, p, c.code, g_features.data() + fdim / 2);
}

constexpr double kProbClamp = 1e-12;

double example_loss(double prob, int label, double class_weight) {
  const double pc = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
  return label == 1 ? class_weight * -std::log(pc) : -std::log(1.0 - pc);
}

std::span<const double> mask_row(const DropoutMasks* masks, std::size_t i) {
  return masks ? masks->row(i) : std::span<const double>{};
}

void check_masks(const DropoutMasks* masks, std::size_t n, std::size_t hidden) {
  if (masks && (masks->rows != n || masks->cols != hidden)) {
    throw std::invalid_argument("dropout mask shape does not match batch");
  }
}

/// Accumulates the gradient of the batch-mean loss over examples
/// [begin, end) of `batch` into g, in index order. Returns the summed
/// (unaveraged) loss of those examples.
double accumulate_gradient(const ModelParams& p, std::span<const TokenizedCommit* const> batch,
                           std::size_t begin, std::size_t end, double class_weight,
                           const DropoutMasks* masks, ModelParams& g, ExampleCache& cache,
                           std::vector<double>& g_features) {
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss_sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const TokenizedCommit& ex = *batch[i];
    const auto mask = mask_row(masks, i);
    forward_one(p, ex, mask, cache);
    const double weight = ex.label == 1 ? class_weight : 1.0;
    const double g_logit = inv_n * weight * (cache.prob - static_cast<double>(ex.label));
    backward_one(p, ex, mask, cache, g_logit, g, g_features);
    loss_sum += example_loss(cache.prob, ex.label, class_weight);
  }
  return loss_sum;
}

std::vector<const TokenizedCommit*> pointers(std::span<const TokenizedCommit> batch) {
  std::vector<const TokenizedCommit*> out;
  out.reserve(batch.size());
  for (const auto& ex : batch) out.push_back(&ex);
  return out;
}

}  // namespace

std::vector<double> forward(const ModelParams& params, std::span<const TokenizedCommit> batch,
                            const DropoutMasks* masks) {
  if (batch.empty()) throw std::invalid_argument("forward: empty batch");
  check_masks(masks, batch.size(), params.hp.hidden_units);
  std::vector<double> out(batch.size());
  ExampleCache cache;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    forward_one(params, batch[i], mask_row(masks, i), cache);
    out[i] = cache.prob;
  }
  return out;
}

std::vector<double> forward_train(const ModelParams& params,
                                  std::span<const TokenizedCommit> batch, Rng& d_stream) {
  const DropoutMasks masks =
      draw_dropout_masks(d_stream, batch.size(), params.hp.hidden_units, params.hp.dropout_p);
  return forward(params, batch, &masks);
}

double weighted_bce(std::span<const double> probs, std::span<const int> labels,
                    double class_weight) {
  if (probs.size() != labels.size()) {
    throw std::invalid_argument("weighted_bce: probs and labels differ in length");
  }
  if (probs.empty()) throw std::invalid_argument("weighted_bce: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) sum += example_loss(probs[i], labels[i], class_weight);
  return sum / static_cast<double>(probs.size());
}

ModelParams backward(const ModelParams& params, std::span<const TokenizedCommit> batch,
                     double class_weight, const DropoutMasks* masks, double& loss) {
  if (batch.empty()) throw std::invalid_argument("backward: empty batch");
  check_masks(masks, batch.size(), params.hp.hidden_units);
  ModelParams g = ModelParams::zeros(params.hp, params.vocab_size);
  ExampleCache cache;
  std::vector<double> g_features;
  const auto ptrs = pointers(batch);
  const double sum =
      accumulate_gradient(params, ptrs, 0, ptrs.size(), class_weight, masks, g, cache, g_features);
  loss = sum / static_cast<double>(batch.size());
  return g;
}

ModelParams backward(const ModelParams& params, std::span<const TokenizedCommit> batch,
                     double class_weight, const DropoutMasks* masks) {
  double loss = 0.0;
  return backward(params, batch, class_weight, masks, loss);
}

std::vector<double> predict(const ModelParams& params, std::span<const TokenizedCommit> test) {
  if (test.empty()) return {};
  return forward(params, test, nullptr);
}

// ---- training -----------------------------------------------------------

namespace {

void fill_zero(std::vector<std::span<double>>& s) {
  for (auto& t : s) std::fill(t.begin(), t.end(), 0.0);
}

void copy_into(std::vector<std::span<double>>& dst, const std::vector<std::span<double>>& src) {
  for (std::size_t k = 0; k < dst.size(); ++k) std::copy(src[k].begin(), src[k].end(), dst[k].begin());
}

void add_into(std::vector<std::span<double>>& dst, const std::vector<std::span<double>>& src) {
  for (std::size_t k = 0; k < dst.size(); ++k) {
    for (std::size_t i = 0; i < dst[k].size(); ++i) dst[k][i] += src[k][i];
  }
}

std::uint64_t params_digest(const ModelParams& p) {
  Digest d;
  for (const auto& t : p.tensors()) d.update(t.data);
  return d.value();
}

}  // namespace

TrainOutcome train(const SplitDataset& split, const Hyperparams& hp, const SeedPlan& plan,
                   bool p_on, const TrainOptions& options) {
  hp.validate();
  if (split.train.empty()) throw std::invalid_argument("train: empty training set");

  TrainOutcome out;
  Rng w_stream(plan.seed(NiFactor::W));
  out.params = init_params(hp, split.vocab_size, w_stream);
  out.digests.w = params_digest(out.params);

  Rng b_stream(plan.seed(NiFactor::B));
  Rng d_stream(plan.seed(NiFactor::D));
  const std::uint64_t p_seed = options.order_source == CombineOrderSource::entropy
                                   ? mix(entropy_seed(), plan.seed(NiFactor::P), 0)
                                   : plan.seed(NiFactor::P);
  Rng p_stream(p_seed);

  ModelParams& params = out.params;
  const std::size_t n = split.train.size();
  const std::size_t workers = p_on ? hp.workers : 1;

  ModelParams grad = ModelParams::zeros(hp, split.vocab_size);
  std::vector<ModelParams> shard_grads;
  if (p_on) shard_grads.assign(workers, grad);
  auto param_spans = spans(params);
  auto grad_spans = spans(grad);
  std::vector<std::vector<std::span<double>>> shard_spans;
  for (auto& sg : shard_grads) shard_spans.push_back(spans(sg));

  ExampleCache cache;
  std::vector<double> g_features;
  std::vector<const TokenizedCommit*> batch;
  batch.reserve(hp.batch_size);
  std::vector<std::uint32_t> order(workers);
  Digest d_digest, b_digest, p_digest;

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    const std::vector<std::size_t> perm = b_stream.permutation(n);
    for (std::size_t idx : perm) b_digest.update_value(static_cast<std::uint64_t>(idx));

    double epoch_loss = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < n; start += hp.batch_size) {
      const std::size_t m = std::min(hp.batch_size, n - start);
      batch.clear();
      for (std::size_t k = 0; k < m; ++k) batch.push_back(&split.train[perm[start + k]]);

      const DropoutMasks masks = draw_dropout_masks(d_stream, m, hp.hidden_units, hp.dropout_p);
      d_digest.update(std::span<const double>(masks.scale));

      double loss_sum = 0.0;
      if (!p_on) {
        fill_zero(grad_spans);
        loss_sum = accumulate_gradient(params, batch, 0, m, split.class_weight, &masks, grad, cache,
                                       g_features);
      } else {
        for (std::size_t s = 0; s < workers; ++s) {
          fill_zero(shard_spans[s]);
          const std::size_t lo = s * m / workers;
          const std::size_t hi = (s + 1) * m / workers;
          loss_sum += accumulate_gradient(params, batch, lo, hi, split.class_weight, &masks,
                                          shard_grads[s], cache, g_features);
        }
        std::iota(order.begin(), order.end(), 0u);
        p_stream.shuffle(std::span<std::uint32_t>(order));
        p_digest.update(std::span<const std::uint32_t>(order));
        if (options.record_combine_orders) out.combine_orders.push_back(order);
        bool first = true;
        for (std::uint32_t s : order) {
          if (s * m / workers == (s + 1) * m / workers) continue;  // empty shard
          if (first) {
            copy_into(grad_spans, shard_spans[s]);
            first = false;
          } else {
            add_into(grad_spans, shard_spans[s]);
          }
        }
      }

      const double step_loss = loss_sum / static_cast<double>(m);
      if (!std::isfinite(step_loss)) {
        throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch + 1) +
                               "; the learning rate is probably too high");
      }
      for (std::size_t k = 0; k < param_spans.size(); ++k) {
        auto& ps = param_spans[k];
        const auto& gs = grad_spans[k];
        for (std::size_t i = 0; i < ps.size(); ++i) ps[i] -= hp.learning_rate * gs[i];
      }
      epoch_loss += step_loss;
      ++steps;
    }
    epoch_loss /= static_cast<double>(steps);
    if (!std::isfinite(epoch_loss) || !params.all_finite()) {
      throw TrainingDiverged("non-finite parameters after epoch " + std::to_string(epoch + 1) +
                             "; the learning rate is probably too high");
    }
    out.epoch_losses.push_back(epoch_loss);
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.runtime_seconds = std::max(std::chrono::duration<double>(t1 - t0).count(),
                                 std::numeric_limits<double>::min());

  out.digests.d = d_digest.value();
  out.digests.b = b_digest.value();
  out.digests.p = p_on ? p_digest.value() : 0;
  return out;
}

// ---- checkpoints --------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'J', 'I', 'T', 'V', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw std::runtime_error("checkpoint truncated");
  }
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& params, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  const Hyperparams& hp = params.hp;
  put<std::uint64_t>(out, hp.embed_dim);
  put<std::uint64_t>(out, hp.filter_widths.size());
  for (std::size_t w : hp.filter_widths) put<std::uint64_t>(out, w);
  put<std::uint64_t>(out, hp.filters_per_width);
  put<std::uint64_t>(out, hp.hidden_units);
  put<double>(out, hp.dropout_p);
  put<double>(out, hp.learning_rate);
  put<std::uint64_t>(out, hp.batch_size);
  put<std::uint64_t>(out, hp.epochs);
  put<std::uint64_t>(out, hp.workers);
  put<std::uint64_t>(out, params.vocab_size);
  for (const auto& t : params.tensors()) {
    put<std::uint64_t>(out, t.data.size());
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size_bytes()));
  }
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
  save_checkpoint(params, out);
}

std::string serialize_checkpoint(const ModelParams& params) {
  std::ostringstream out(std::ios::binary);
  save_checkpoint(params, out);
  return std::move(out).str();
}

ModelParams load_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic)) {
    throw std::runtime_error("not a checkpoint file");
  }
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("unsupported checkpoint version");
  Hyperparams hp;
  hp.embed_dim = get<std::uint64_t>(in);
  const auto n_widths = get<std::uint64_t>(in);
  if (n_widths > 64) throw std::runtime_error("checkpoint corrupt: too many filter widths");
  hp.filter_widths.clear();
  for (std::uint64_t i = 0; i < n_widths; ++i) hp.filter_widths.push_back(get<std::uint64_t>(in));
  hp.filters_per_width = get<std::uint64_t>(in);
  hp.hidden_units = get<std::uint64_t>(in);
  hp.dropout_p = get<double>(in);
  hp.learning_rate = get<double>(in);
  hp.batch_size = get<std::uint64_t>(in);
  hp.epochs = get<std::uint64_t>(in);
  hp.workers = get<std::uint64_t>(in);
  const auto vocab = get<std::uint64_t>(in);
  ModelParams p = ModelParams::zeros(hp, vocab);
  for (auto& t : p.tensors()) {
    if (get<std::uint64_t>(in) != t.data.size()) {
      throw std::runtime_error("checkpoint corrupt: tensor " + t.name + " has the wrong size");
    }
    if (!in.read(reinterpret_cast<char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size_bytes()))) {
      throw std::runtime_error("checkpoint truncated");
    }
  }
  return p;
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  return load_checkpoint(in);
}

}  // namespace jitvar

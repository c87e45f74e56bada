#include "hitrank/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "binio.hpp"
#include "hitrank/optim.hpp"
#include "hitrank/rng.hpp"

namespace hitrank {

namespace {

constexpr char kModelMagic[4] = {'H', 'R', 'M', 'D'};
constexpr std::uint32_t kModelVersion = 1;

StageShape conv_stage_shape(const ConvSpec& spec, StageShape in,
                            const char* stage) {
  auto reject = [&](const std::string& what) {
    throw std::invalid_argument("RaterConfig: " + std::string(stage) + ": " +
                                what);
  };
  if (spec.filters == 0) reject("zero filters");
  if (spec.kernel_h == 0 || spec.kernel_w == 0) reject("zero kernel extent");
  if (spec.stride_h == 0 || spec.stride_w == 0) reject("zero stride");
  if (spec.pool_h == 0 || spec.pool_w == 0) reject("zero pool window");
  if (in.height < spec.kernel_h || in.width < spec.kernel_w) {
    reject("kernel larger than its input map");
  }
  StageShape out;
  out.channels = spec.filters;
  out.height = (in.height - spec.kernel_h) / spec.stride_h + 1;
  out.width = (in.width - spec.kernel_w) / spec.stride_w + 1;
  if (out.height < spec.pool_h || out.width < spec.pool_w) {
    reject("pool window larger than the conv output");
  }
  out.height = (out.height - spec.pool_h) / spec.pool_h + 1;
  out.width = (out.width - spec.pool_w) / spec.pool_w + 1;
  return out;
}

struct ParamSpec {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;  // fan 0/0 marks a zero-initialized bias
};

std::vector<ParamSpec> expected_parameters(
    const RaterConfig& audio, const std::optional<TagBranchConfig>& tag) {
  std::vector<ParamSpec> specs;
  auto conv = [&specs](const std::string& prefix, const ConvSpec& c,
                       std::size_t in_ch) {
    specs.push_back({prefix + ".w",
                     {c.filters, in_ch, c.kernel_h, c.kernel_w},
                     in_ch * c.kernel_h * c.kernel_w,
                     c.filters * c.kernel_h * c.kernel_w});
    specs.push_back({prefix + ".b", {c.filters}, 0, 0});
  };
  auto dense_stack = [&specs](const std::string& prefix,
                              std::size_t in_width,
                              const std::vector<std::size_t>& widths) {
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const std::string name = prefix + ".fc" + std::to_string(i + 1);
      specs.push_back({name + ".w", {in_width, widths[i]}, in_width,
                       widths[i]});
      specs.push_back({name + ".b", {widths[i]}, 0, 0});
      in_width = widths[i];
    }
  };

  conv("audio.conv1", audio.conv1, 1);
  conv("audio.conv2", audio.conv2, audio.conv1.filters);
  dense_stack("audio", audio.flattened_width(), audio.dense_widths);
  if (tag) {
    std::vector<std::size_t> widths = tag->hidden_widths;
    widths.push_back(1);
    dense_stack("tag", tag->input_width, widths);
  }
  return specs;
}

using LeafFn = std::function<Var(const Parameter&)>;

Var dense_layer(Tape& tape, Var x, const ParamSet& params,
                const std::string& name, const LeafFn& leaf) {
  return tape.dense(x, leaf(params.at(name + ".w")),
                    leaf(params.at(name + ".b")));
}

Var build_audio_score(Tape& tape, const RaterConfig& cfg,
                      const ParamSet& params, const LeafFn& leaf, Var x) {
  Var h = tape.conv2d(x, leaf(params.at("audio.conv1.w")),
                      leaf(params.at("audio.conv1.b")), cfg.conv1.stride_h,
                      cfg.conv1.stride_w);
  h = tape.relu(h);
  h = tape.max_pool(h, cfg.conv1.pool_h, cfg.conv1.pool_w, cfg.conv1.pool_h,
                    cfg.conv1.pool_w);
  h = tape.conv2d(h, leaf(params.at("audio.conv2.w")),
                  leaf(params.at("audio.conv2.b")), cfg.conv2.stride_h,
                  cfg.conv2.stride_w);
  h = tape.relu(h);
  h = tape.max_pool(h, cfg.conv2.pool_h, cfg.conv2.pool_w, cfg.conv2.pool_h,
                    cfg.conv2.pool_w);
  h = tape.flatten2(h);
  for (std::size_t i = 0; i < cfg.dense_widths.size(); ++i) {
    h = dense_layer(tape, h, params, "audio.fc" + std::to_string(i + 1),
                    leaf);
    if (i + 1 < cfg.dense_widths.size()) h = tape.relu(h);
  }
  return tape.squeeze_cols(h);
}

Var build_tag_score(Tape& tape, const TagBranchConfig& cfg,
                    const ParamSet& params, const LeafFn& leaf, Var x) {
  Var h = x;
  const std::size_t layers = cfg.hidden_widths.size() + 1;
  for (std::size_t i = 0; i < layers; ++i) {
    h = dense_layer(tape, h, params, "tag.fc" + std::to_string(i + 1), leaf);
    if (i + 1 < layers) h = tape.relu(h);
  }
  return tape.squeeze_cols(h);
}

/// The one score-graph builder both training and frozen scoring use.
Var build_score(Tape& tape, const RaterConfig& audio,
                const std::optional<TagBranchConfig>& tag, double mu,
                const ParamSet& params, const LeafFn& leaf,
                const Tensor& features, const Tensor* tags) {
  if (features.rank() != 4 || features.dim(1) != 1 ||
      features.dim(2) != audio.input_bins ||
      features.dim(3) != audio.input_frames) {
    throw std::invalid_argument(
        "HybridRater: features must be [B, 1, bins, frames] matching the "
        "configured input");
  }
  const std::size_t batch = features.dim(0);

  Var tag_score{};
  if (mu > 0.0) {
    if (!tags) {
      throw std::invalid_argument(
          "HybridRater: mu > 0 requires tag activations");
    }
    if (tags->rank() != 2 || tags->dim(0) != batch ||
        tags->dim(1) != tag->input_width) {
      throw std::invalid_argument(
          "HybridRater: tags must be [B, tag_width] aligned with features");
    }
    tag_score = build_tag_score(tape, *tag, params, leaf,
                                tape.constant(*tags));
    if (mu == 1.0) return tag_score;
  }

  Var audio_score =
      build_audio_score(tape, audio, params, leaf, tape.constant(features));
  if (mu == 0.0) return audio_score;
  return tape.affine(1.0 - mu, audio_score, mu, tag_score);
}

Tensor stack_features(const std::vector<const Tensor*>& features,
                      const std::vector<std::size_t>& ids, std::size_t bins,
                      std::size_t frames) {
  Tensor out({ids.size(), 1, bins, frames});
  const std::size_t plane = bins * frames;
  for (std::size_t b = 0; b < ids.size(); ++b) {
    const Tensor* f = features[ids[b]];
    if (!f || f->rank() != 2 || f->dim(0) != bins || f->dim(1) != frames) {
      throw std::invalid_argument(
          "stacking features: song " + std::to_string(ids[b]) +
          " is missing or not [bins, frames]");
    }
    std::copy(f->values().begin(), f->values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(b * plane));
  }
  return out;
}

Tensor stack_tags(const std::vector<const std::vector<double>*>& tags,
                  const std::vector<std::size_t>& ids, std::size_t width) {
  Tensor out({ids.size(), width});
  for (std::size_t b = 0; b < ids.size(); ++b) {
    if (ids[b] >= tags.size() || !tags[ids[b]] ||
        tags[ids[b]]->size() != width) {
      throw std::invalid_argument("stacking tags: song " +
                                  std::to_string(ids[b]) +
                                  " lacks a tag vector of the right width");
    }
    std::copy(tags[ids[b]]->begin(), tags[ids[b]]->end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(b * width));
  }
  return out;
}

nlohmann::json conv_to_json(const ConvSpec& c) {
  return nlohmann::json{{"filters", c.filters},
                        {"kernel", {c.kernel_h, c.kernel_w}},
                        {"stride", {c.stride_h, c.stride_w}},
                        {"pool", {c.pool_h, c.pool_w}}};
}

ConvSpec conv_from_json(const nlohmann::json& j) {
  ConvSpec c;
  c.filters = j.at("filters").get<std::size_t>();
  c.kernel_h = j.at("kernel").at(0).get<std::size_t>();
  c.kernel_w = j.at("kernel").at(1).get<std::size_t>();
  c.stride_h = j.at("stride").at(0).get<std::size_t>();
  c.stride_w = j.at("stride").at(1).get<std::size_t>();
  c.pool_h = j.at("pool").at(0).get<std::size_t>();
  c.pool_w = j.at("pool").at(1).get<std::size_t>();
  return c;
}

void check_divergence(double loss, std::size_t epoch, std::size_t step) {
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "training diverged: non-finite loss " << loss << " at epoch "
        << epoch << ", step " << step;
    throw TrainingDiverged(msg.str());
  }
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t count,
                                                   std::size_t batch_size,
                                                   Rng& rng) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t at = 0; at < count; at += batch_size) {
    const std::size_t end = std::min(at + batch_size, count);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

void validate_training_inputs(const HybridRater& rater,
                              const TrainingSet& data,
                              const TrainOptions& opts) {
  if (data.features.empty()) {
    throw std::invalid_argument("train: empty training set");
  }
  if (data.features.size() != data.targets.size()) {
    throw std::invalid_argument("train: features/targets misaligned");
  }
  if (rater.mu() > 0.0 && data.tags.size() != data.features.size()) {
    throw std::invalid_argument(
        "train: mu > 0 requires one tag vector per song");
  }
  if (opts.batch_size == 0) {
    throw std::invalid_argument("train: batch_size must be >= 1");
  }
  if (opts.epochs == 0) {
    throw std::invalid_argument("train: epochs must be >= 1");
  }
}

}  // namespace

RaterConfig RaterConfig::standard() { return RaterConfig{}; }

RaterConfig RaterConfig::compact(std::size_t bins, std::size_t frames) {
  RaterConfig cfg;
  cfg.input_bins = bins;
  cfg.input_frames = frames;
  cfg.conv1 = ConvSpec{6, bins, 4, 1, 1, 1, 2};
  cfg.conv2 = ConvSpec{6, 1, 3, 1, 1, 1, 2};
  cfg.dense_widths = {16, 8, 1};
  cfg.validate();
  return cfg;
}

StageShape RaterConfig::shape_after_conv1() const {
  return conv_stage_shape(conv1, {1, input_bins, input_frames}, "conv1");
}

StageShape RaterConfig::shape_after_conv2() const {
  return conv_stage_shape(conv2, shape_after_conv1(), "conv2");
}

std::size_t RaterConfig::flattened_width() const {
  const StageShape s = shape_after_conv2();
  return s.channels * s.height * s.width;
}

void RaterConfig::validate() const {
  if (input_bins == 0 || input_frames == 0) {
    throw std::invalid_argument("RaterConfig: zero input extent");
  }
  shape_after_conv2();
  if (dense_widths.size() != 3) {
    throw std::invalid_argument("RaterConfig: exactly three dense layers");
  }
  for (std::size_t w : dense_widths) {
    if (w == 0) throw std::invalid_argument("RaterConfig: zero dense width");
  }
  if (dense_widths.back() != 1) {
    throw std::invalid_argument(
        "RaterConfig: the final layer must emit one score");
  }
}

void TagBranchConfig::validate() const {
  if (input_width == 0) {
    throw std::invalid_argument("TagBranchConfig: zero input width");
  }
  if (hidden_widths.empty()) {
    throw std::invalid_argument("TagBranchConfig: no hidden layers");
  }
  for (std::size_t w : hidden_widths) {
    if (w == 0) {
      throw std::invalid_argument("TagBranchConfig: zero hidden width");
    }
  }
}

void LossWeights::validate() const {
  if (!(margin > 0.0)) {
    throw std::invalid_argument("LossWeights: margin must be > 0");
  }
  if (!(w >= 0.0 && w <= 1.0)) {
    throw std::invalid_argument("LossWeights: w must be in [0, 1]");
  }
}

double loss_rate(const std::vector<double>& scores,
                 const std::vector<double>& targets) {
  if (scores.empty()) throw std::invalid_argument("loss_rate: empty batch");
  if (scores.size() != targets.size()) {
    throw std::invalid_argument("loss_rate: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = targets[i] - scores[i];
    acc += d * d;
  }
  return acc / static_cast<double>(scores.size());
}

double delta(double yi, double yj) { return yi >= yj ? 1.0 : -1.0; }

double loss_rank(const PairBatch& pairs, const std::vector<double>& si,
                 const std::vector<double>& sj, double margin) {
  const std::size_t p = pairs.pairs.size();
  if (p == 0) throw std::invalid_argument("loss_rank: empty pair set");
  if (si.size() != p || sj.size() != p) {
    throw std::invalid_argument("loss_rank: scores misaligned with pairs");
  }
  if (!(margin > 0.0)) {
    throw std::invalid_argument("loss_rank: margin must be > 0");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    const double d = delta(pairs.yi[k], pairs.yj[k]);
    acc += std::max(0.0, margin - d * (si[k] - sj[k]));
  }
  return acc / static_cast<double>(p);
}

double loss_multi(double rate_loss, double rank_loss, double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw std::invalid_argument("loss_multi: w must be in [0, 1]");
  }
  if (w == 0.0) return rate_loss;
  if (w == 1.0) return rank_loss;
  return (1.0 - w) * rate_loss + w * rank_loss;
}

Standardizer Standardizer::fit(const std::vector<double>& values) {
  if (values.empty()) {
    throw std::invalid_argument("Standardizer::fit: empty sample");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  Standardizer s;
  s.mean = mean;
  s.std_dev = var > 0.0 ? std::sqrt(var) : 1.0;
  return s;
}

HybridRater::HybridRater(RaterConfig audio, std::optional<TagBranchConfig> tag,
                         double mu, std::uint64_t seed)
    : audio_(std::move(audio)), tag_(std::move(tag)), mu_(mu) {
  audio_.validate();
  if (tag_) tag_->validate();
  if (!(mu_ >= 0.0 && mu_ <= 1.0)) {
    throw std::invalid_argument("HybridRater: mu must be in [0, 1]");
  }
  if (mu_ > 0.0 && !tag_) {
    throw std::invalid_argument(
        "HybridRater: mu > 0 requires a tag branch config");
  }
  Rng rng(seed);
  for (const ParamSpec& spec : expected_parameters(audio_, tag_)) {
    Tensor init(spec.shape);
    if (spec.fan_in + spec.fan_out > 0) {
      const double limit = std::sqrt(
          6.0 / static_cast<double>(spec.fan_in + spec.fan_out));
      for (double& v : init.values()) v = uniform(rng, -limit, limit);
    }
    params_.add(spec.name, std::move(init));
  }
}

HybridRater HybridRater::from_parts(RaterConfig audio,
                                    std::optional<TagBranchConfig> tag,
                                    double mu, ParamSet params) {
  HybridRater rater;
  rater.audio_ = std::move(audio);
  rater.tag_ = std::move(tag);
  rater.mu_ = mu;
  rater.audio_.validate();
  if (rater.tag_) rater.tag_->validate();
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw std::invalid_argument("HybridRater: mu must be in [0, 1]");
  }
  if (mu > 0.0 && !rater.tag_) {
    throw std::invalid_argument(
        "HybridRater: mu > 0 requires a tag branch config");
  }
  const std::vector<ParamSpec> specs =
      expected_parameters(rater.audio_, rater.tag_);
  if (params.size() != specs.size()) {
    throw std::invalid_argument(
        "HybridRater::from_parts: parameter count does not match the "
        "configuration");
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (params[i].name != specs[i].name ||
        params[i].value.shape() != specs[i].shape) {
      throw std::invalid_argument(
          "HybridRater::from_parts: parameter '" + params[i].name +
          "' does not match the configuration (expected '" + specs[i].name +
          "')");
    }
  }
  rater.params_ = std::move(params);
  return rater;
}

Var HybridRater::score_on(Tape& tape, const Tensor& features,
                          const Tensor* tags) {
  const LeafFn leaf = [&tape](const Parameter& p) {
    return tape.param(const_cast<Parameter&>(p));
  };
  return build_score(tape, audio_, tag_, mu_, params_, leaf, features, tags);
}

std::vector<double> HybridRater::score(
    const std::vector<const Tensor*>& features,
    const std::vector<const std::vector<double>*>& tags) const {
  if (mu_ > 0.0 && tags.size() != features.size()) {
    throw std::invalid_argument(
        "HybridRater::score: mu > 0 requires one tag vector per song");
  }
  std::vector<double> out;
  out.reserve(features.size());
  constexpr std::size_t kChunk = 64;
  for (std::size_t at = 0; at < features.size(); at += kChunk) {
    const std::size_t end = std::min(at + kChunk, features.size());
    std::vector<std::size_t> ids(end - at);
    std::iota(ids.begin(), ids.end(), at);
    const Tensor x =
        stack_features(features, ids, audio_.input_bins, audio_.input_frames);
    Tensor tag_batch;
    const Tensor* tag_ptr = nullptr;
    if (mu_ > 0.0) {
      tag_batch = stack_tags(tags, ids, tag_->input_width);
      tag_ptr = &tag_batch;
    }
    Tape tape;
    const LeafFn leaf = [&tape](const Parameter& p) {
      return tape.constant(p.value);
    };
    const Var scores =
        build_score(tape, audio_, tag_, mu_, params_, leaf, x, tag_ptr);
    const Tensor& v = tape.value(scores);
    out.insert(out.end(), v.values().begin(), v.values().end());
  }
  return out;
}

double rate(const HybridRater& rater, const Tensor& features,
            const std::vector<double>* tags) {
  if (rater.mu() > 0.0 && !tags) {
    throw std::invalid_argument("rate: mu > 0 requires tag activations");
  }
  const std::vector<const Tensor*> f{&features};
  std::vector<const std::vector<double>*> t;
  if (rater.mu() > 0.0) t.push_back(tags);
  return rater.score(f, t)[0];
}

double rate(const HybridRater& rater, const MelSpectrogram& features,
            const std::vector<double>* tags) {
  return rate(rater, features.values, tags);
}

TrainResult fit_rating(HybridRater& rater, const TrainingSet& data,
                       const TrainOptions& opts) {
  validate_training_inputs(rater, data, opts);
  SgdOptimizer optimizer(opts.lr, opts.momentum);
  Rng rng(opts.seed);
  TrainResult result;
  const std::size_t bins = rater.audio_config().input_bins;
  const std::size_t frames = rater.audio_config().input_frames;

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    double epoch_sum = 0.0;
    std::size_t step = 0;
    for (const auto& ids :
         make_batches(data.features.size(), opts.batch_size, rng)) {
      const Tensor x = stack_features(data.features, ids, bins, frames);
      Tensor tag_batch;
      const Tensor* tag_ptr = nullptr;
      if (rater.mu() > 0.0) {
        tag_batch =
            stack_tags(data.tags, ids, rater.tag_config()->input_width);
        tag_ptr = &tag_batch;
      }
      Tensor targets({ids.size()});
      for (std::size_t b = 0; b < ids.size(); ++b) {
        targets[b] = data.targets[ids[b]];
      }

      Tape tape;
      const Var scores = rater.score_on(tape, x, tag_ptr);
      const Var loss = tape.mse(scores, targets);
      const double loss_value = tape.scalar_value(loss);
      check_divergence(loss_value, epoch, step);

      rater.params().zero_grad();
      tape.backward(loss);
      optimizer.step(rater.params());

      epoch_sum += loss_value * static_cast<double>(ids.size());
      ++step;
    }
    result.epoch_loss.push_back(epoch_sum /
                                static_cast<double>(data.features.size()));
  }
  return result;
}

TrainResult fit_siamese(HybridRater& rater, const TrainingSet& data,
                        const PairBatch& pairs, const LossWeights& weights,
                        const TrainOptions& opts,
                        const PairResampler& resampler) {
  validate_training_inputs(rater, data, opts);
  weights.validate();
  if (pairs.pairs.empty()) {
    throw std::invalid_argument("fit_siamese: empty pair set");
  }
  SgdOptimizer optimizer(opts.lr, opts.momentum);
  Rng rng(opts.seed);
  TrainResult result;
  const std::size_t bins = rater.audio_config().input_bins;
  const std::size_t frames = rater.audio_config().input_frames;

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    PairBatch resampled;
    const PairBatch* current = &pairs;
    if (opts.resample_pairs_each_epoch && resampler) {
      resampled = resampler(mix_seed(opts.seed, epoch));
      if (resampled.pairs.empty()) {
        throw std::invalid_argument(
            "fit_siamese: resampler returned an empty pair set");
      }
      current = &resampled;
    }

    double epoch_sum = 0.0;
    std::size_t step = 0;
    for (const auto& batch_ids :
         make_batches(current->pairs.size(), opts.batch_size, rng)) {
      const std::size_t nb = batch_ids.size();
      std::vector<std::size_t> left(nb), right(nb);
      std::vector<double> deltas(nb);
      Tensor ti({nb}), tj({nb});
      for (std::size_t b = 0; b < nb; ++b) {
        const SampledPair& pair = current->pairs[batch_ids[b]];
        left[b] = pair.i;
        right[b] = pair.j;
        deltas[b] =
            delta(current->yi[batch_ids[b]], current->yj[batch_ids[b]]);
        ti[b] = data.targets[pair.i];
        tj[b] = data.targets[pair.j];
      }

      const Tensor xi = stack_features(data.features, left, bins, frames);
      const Tensor xj = stack_features(data.features, right, bins, frames);
      Tensor tag_i, tag_j;
      const Tensor *tag_ip = nullptr, *tag_jp = nullptr;
      if (rater.mu() > 0.0) {
        const std::size_t width = rater.tag_config()->input_width;
        tag_i = stack_tags(data.tags, left, width);
        tag_j = stack_tags(data.tags, right, width);
        tag_ip = &tag_i;
        tag_jp = &tag_j;
      }

      Tape tape;
      const Var si = rater.score_on(tape, xi, tag_ip);
      const Var sj = rater.score_on(tape, xj, tag_jp);

      Var loss{};
      if (weights.w == 1.0) {
        loss = tape.rank_hinge(si, sj, deltas, weights.margin);
      } else {
        const Var rate_term =
            tape.affine(0.5, tape.mse(si, ti), 0.5, tape.mse(sj, tj));
        if (weights.w == 0.0) {
          loss = rate_term;
        } else {
          const Var rank_term =
              tape.rank_hinge(si, sj, deltas, weights.margin);
          loss = tape.affine(1.0 - weights.w, rate_term, weights.w,
                             rank_term);
        }
      }
      const double loss_value = tape.scalar_value(loss);
      check_divergence(loss_value, epoch, step);

      rater.params().zero_grad();
      tape.backward(loss);
      optimizer.step(rater.params());

      epoch_sum += loss_value * static_cast<double>(nb);
      ++step;
    }
    result.epoch_loss.push_back(
        epoch_sum / static_cast<double>(current->pairs.size()));
  }
  return result;
}

void save_model(const std::string& path, const HybridRater& model,
                const Standardizer& target_scale) {
  nlohmann::json j;
  const RaterConfig& a = model.audio_config();
  j["audio"] = {{"bins", a.input_bins},
                {"frames", a.input_frames},
                {"conv1", conv_to_json(a.conv1)},
                {"conv2", conv_to_json(a.conv2)},
                {"dense", a.dense_widths}};
  if (model.tag_config()) {
    j["tag"] = {{"input", model.tag_config()->input_width},
                {"hidden", model.tag_config()->hidden_widths}};
  } else {
    j["tag"] = nullptr;
  }
  j["mu"] = model.mu();
  j["target_mean"] = target_scale.mean;
  j["target_std"] = target_scale.std_dev;
  const std::string header = j.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out.write(kModelMagic, 4);
  binio::put_u32(out, kModelVersion);
  binio::put_string(out, header);
  model.params().save(out);
  if (!out) throw std::runtime_error("save_model: write failure: " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0) {
    throw std::runtime_error("load_model: bad magic in " + path);
  }
  const std::uint32_t version = binio::get_u32(in);
  if (version != kModelVersion) {
    throw std::runtime_error("load_model: unsupported version " +
                             std::to_string(version) + " in " + path);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(binio::get_string(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_model: malformed config header: " +
                             std::string(e.what()));
  }

  RaterConfig audio;
  const nlohmann::json& ja = j.at("audio");
  audio.input_bins = ja.at("bins").get<std::size_t>();
  audio.input_frames = ja.at("frames").get<std::size_t>();
  audio.conv1 = conv_from_json(ja.at("conv1"));
  audio.conv2 = conv_from_json(ja.at("conv2"));
  audio.dense_widths = ja.at("dense").get<std::vector<std::size_t>>();

  std::optional<TagBranchConfig> tag;
  if (!j.at("tag").is_null()) {
    TagBranchConfig t;
    t.input_width = j.at("tag").at("input").get<std::size_t>();
    t.hidden_widths =
        j.at("tag").at("hidden").get<std::vector<std::size_t>>();
    tag = std::move(t);
  }

  LoadedModel loaded{
      HybridRater::from_parts(std::move(audio), std::move(tag),
                              j.at("mu").get<double>(), ParamSet::load(in)),
      Standardizer{j.at("target_mean").get<double>(),
                   j.at("target_std").get<double>()}};
  return loaded;
}

}  // namespace hitrank

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hitrank/autodiff.hpp"
#include "hitrank/mel.hpp"
#include "hitrank/params.hpp"
#include "hitrank/sampling.hpp"
#include "hitrank/tensor.hpp"

namespace hitrank {

/// One convolution stage: valid cross-correlation at the given stride,
/// ReLU, then max pooling whose stride equals its window.
struct ConvSpec {
  std::size_t filters = 32;
  std::size_t kernel_h = 128;
  std::size_t kernel_w = 4;
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  std::size_t pool_h = 1;
  std::size_t pool_w = 4;
};

/// Channel/height/width of one activation map.
struct StageShape {
  std::size_t channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;
};

/// Audio rater layout: two conv stages, then exactly three dense layers
/// over the flattened map, the last of width 1 (the scalar score). Dense
/// layers over the flattened per-song map coincide with 1x1-kernel
/// convolution stages, which is why no separate layer kind exists.
struct RaterConfig {
  std::size_t input_bins = 128;
  std::size_t input_frames = 321;
  ConvSpec conv1{32, 128, 4, 1, 1, 1, 4};
  ConvSpec conv2{32, 1, 4, 1, 1, 1, 4};
  std::vector<std::size_t> dense_widths{64, 32, 1};

  /// Full-size layout for 128-bin, 321-frame spectrograms: conv1 32
  /// filters of 128x4 (full height), pool 1x4; conv2 32 filters of 1x4,
  /// pool 1x4; dense 64, 32, 1.
  static RaterConfig standard();

  /// Small layout for synthetic features: full-height conv of width 4,
  /// pool 1x2, conv 1x3, pool 1x2, dense 16, 8, 1. Needs frames >= 11.
  static RaterConfig compact(std::size_t bins, std::size_t frames);

  /// Throws std::invalid_argument when the stages do not chain or the
  /// final dense width is not 1.
  void validate() const;

  StageShape shape_after_conv1() const;
  StageShape shape_after_conv2() const;
  std::size_t flattened_width() const;
};

/// Dense stack over externally supplied tag activations.
struct TagBranchConfig {
  std::size_t input_width = 50;
  std::vector<std::size_t> hidden_widths{100, 100, 30};

  static TagBranchConfig standard() { return TagBranchConfig{}; }
  void validate() const;
};

struct LossWeights {
  double margin = 0.05;
  double w = 0.5;

  /// margin > 0, w in [0,1].
  void validate() const;
};

/// Mean squared error between scores and targets.
double loss_rate(const std::vector<double>& scores,
                 const std::vector<double>& targets);

/// +1 when yi >= yj (ties included), -1 otherwise.
double delta(double yi, double yj);

/// (1/P) * sum over pairs of max(0, margin - delta * (si - sj)), with
/// delta taken from the batch's hit scores.
double loss_rank(const PairBatch& pairs, const std::vector<double>& si,
                 const std::vector<double>& sj, double margin);

/// (1-w) * rate_loss + w * rank_loss. The endpoints return the surviving
/// operand itself, so w = 0 and w = 1 are bit-exact.
double loss_multi(double rate_loss, double rank_loss, double w);

/// Affine map to zero-mean unit-variance targets and back.
struct Standardizer {
  double mean = 0.0;
  double std_dev = 1.0;

  /// Population statistics; a zero spread degrades to an identity scale
  /// so standardization stays invertible.
  static Standardizer fit(const std::vector<double>& values);

  double apply(double y) const { return (y - mean) / std_dev; }
  double invert(double z) const { return z * std_dev + mean; }
};

/// Audio rater plus optional tag branch fused as
/// (1-mu) * audio_score + mu * tag_score, jointly trainable. mu = 0 (or 1)
/// skips the other branch entirely, so the inert branch is never even
/// evaluated, and the fused score reduces to the live branch bit-exactly.
class HybridRater {
 public:
  /// Initializes weights uniformly in +-sqrt(6/(fan_in+fan_out)) (biases
  /// zero) from the seed. mu > 0 requires a tag branch config.
  HybridRater(RaterConfig audio, std::optional<TagBranchConfig> tag,
              double mu, std::uint64_t seed);

  /// Rebuilds a rater around checkpointed parameters, validating names
  /// and shapes against the configs.
  static HybridRater from_parts(RaterConfig audio,
                                std::optional<TagBranchConfig> tag, double mu,
                                ParamSet params);

  const RaterConfig& audio_config() const noexcept { return audio_; }
  const std::optional<TagBranchConfig>& tag_config() const noexcept {
    return tag_;
  }
  double mu() const noexcept { return mu_; }

  ParamSet& params() noexcept { return params_; }
  const ParamSet& params() const noexcept { return params_; }

  /// Builds the fused score graph for one batch on the caller's tape with
  /// gradient-tracking leaves. features is [B, 1, bins, frames]; tags is
  /// [B, tag_width] and may be null when mu == 0. Returns scores [B].
  Var score_on(Tape& tape, const Tensor& features, const Tensor* tags);

  /// Frozen scoring through the identical graph builder, with parameters
  /// entering as constants. tags entries may be null when mu == 0.
  std::vector<double> score(
      const std::vector<const Tensor*>& features,
      const std::vector<const std::vector<double>*>& tags) const;

 private:
  HybridRater() = default;

  RaterConfig audio_;
  std::optional<TagBranchConfig> tag_;
  double mu_ = 0.0;
  ParamSet params_;
};

/// Score one song. tags must be present when the rater fuses them
/// (mu > 0) and is ignored otherwise.
double rate(const HybridRater& rater, const Tensor& features,
            const std::vector<double>* tags = nullptr);
double rate(const HybridRater& rater, const MelSpectrogram& features,
            const std::vector<double>* tags = nullptr);

/// Training inputs, aligned by song index. Feature tensors are
/// [bins, frames]; tag pointers may be null wherever the model has no tag
/// branch in use.
struct TrainingSet {
  std::vector<const Tensor*> features;
  std::vector<const std::vector<double>*> tags;
  std::vector<double> targets;
};

struct TrainOptions {
  double lr = 1e-3;
  double momentum = 0.9;
  std::size_t epochs = 3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  bool resample_pairs_each_epoch = false;
};

/// Raised when a training loss stops being finite; the message carries
/// the epoch and step.
struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  /// Batch-size-weighted mean loss per epoch.
  std::vector<double> epoch_loss;
};

/// Regression training on per-song targets (the rating-only model).
TrainResult fit_rating(HybridRater& rater, const TrainingSet& data,
                       const TrainOptions& opts);

/// Produces the pair set for one epoch when pairs are resampled.
using PairResampler = std::function<PairBatch(std::uint64_t epoch_seed)>;

/// Joint rating + ranking training over sampled pairs. Both legs of every
/// pair are scored by the same parameter storage. The rating term runs
/// over both legs of each pair (2P song terms). With
/// opts.resample_pairs_each_epoch and a resampler, every epoch draws a
/// fresh pair set; otherwise `pairs` is fixed for the whole run.
TrainResult fit_siamese(HybridRater& rater, const TrainingSet& data,
                        const PairBatch& pairs, const LossWeights& weights,
                        const TrainOptions& opts,
                        const PairResampler& resampler = {});

/// Model checkpoint: magic "HRMD" | u32 version | u32 json_len | config
/// JSON (architecture, mu, standardization constants) | parameter blob.
void save_model(const std::string& path, const HybridRater& model,
                const Standardizer& target_scale);

struct LoadedModel {
  HybridRater model;
  Standardizer target_scale;
};

LoadedModel load_model(const std::string& path);

}  // namespace hitrank

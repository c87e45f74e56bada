#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hitrank/experiment.hpp"
#include "hitrank/mel.hpp"
#include "hitrank/rng.hpp"
#include "hitrank/sampling.hpp"

namespace {

using namespace hitrank;
namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& what) {
  throw std::invalid_argument(what);
}

std::string env_cache_dir() {
  const char* v = std::getenv("HITRANK_CACHE_DIR");
  return v != nullptr ? v : "";
}

void write_text_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) config_error("cannot write '" + path + "'");
  out << text;
}

struct SynthOptions {
  CLI::Option* songs;
  CLI::Option* artists;
  CLI::Option* latent;
  CLI::Option* bins;
  CLI::Option* frames;
  CLI::Option* audio_dims;
  CLI::Option* tags;
  CLI::Option* days;
  CLI::Option* spread;
  CLI::Option* artist_weight;
  CLI::Option* song_weight;
  CLI::Option* tilt;
  CLI::Option* signal;
  CLI::Option* feature_noise;
  CLI::Option* tag_noise;
  CLI::Option* luck_noise;
  CLI::Option* seed;
};

SynthOptions add_synth_options(CLI::App* sub, SynthSpec& s, const char* seed_flag) {
  SynthOptions o;
  o.songs = sub->add_option("--songs", s.n, "Songs to generate");
  o.artists = sub->add_option("--artists", s.n_artists, "Distinct artists");
  o.latent = sub->add_option("--latent-dim", s.latent_dim, "Latent dimensions");
  o.bins = sub->add_option("--bins", s.bins, "Feature matrix rows");
  o.frames = sub->add_option("--frames", s.frames, "Feature matrix columns");
  o.audio_dims = sub->add_option("--audio-dims", s.audio_dims,
                                 "Latent dimensions visible to audio features");
  o.tags = sub->add_option("--tags", s.tag_count, "Tag vector width");
  o.days = sub->add_option("--days", s.days, "Playcount series length in days");
  o.spread = sub->add_option("--release-spread", s.release_spread_days,
                             "Release date spread in days");
  o.artist_weight =
      sub->add_option("--artist-weight", s.artist_weight, "Artist latent weight");
  o.song_weight = sub->add_option("--song-weight", s.song_weight, "Song latent weight");
  o.tilt = sub->add_option("--tilt", s.tilt, "Long-tail exponent");
  o.signal = sub->add_option("--signal-weight", s.signal_weight,
                             "Feature signal strength");
  o.feature_noise =
      sub->add_option("--feature-noise", s.feature_noise, "Feature noise sigma");
  o.tag_noise = sub->add_option("--tag-noise", s.tag_noise, "Tag noise sigma");
  o.luck_noise = sub->add_option("--luck-noise", s.luck_noise,
                                 "Half-normal luck sigma added to share scales");
  o.seed = sub->add_option(seed_flag, s.seed, "Generator seed");
  return o;
}

// ---------------------------------------------------------------------------
// gen

struct GenOpts {
  SynthSpec spec;
  std::string out;
  std::string feature_dir = env_cache_dir();
  bool no_features = false;
};

int run_gen(const GenOpts& opts) {
  SynthCorpus corpus = synth_longtail(opts.spec);
  const std::string segment{to_string(SegmentStrategy::kMid30)};

  if (!opts.no_features) {
    if (opts.feature_dir.empty()) {
      config_error("--feature-dir or HITRANK_CACHE_DIR is required "
                   "(or pass --no-features)");
    }
    fs::create_directories(opts.feature_dir);
    for (SongRecord& rec : corpus.records) {
      const std::string name = rec.id + "." + segment + ".hrfc";
      write_feature_cache((fs::path(opts.feature_dir) / name).string(),
                          CachedFeature{rec.id, segment, *rec.features});
      rec.feature_path = name;
    }
  }
  write_manifest(opts.out, corpus.records);

  double mean = 0.0;
  for (double s : corpus.true_scores) mean += s;
  mean /= static_cast<double>(corpus.true_scores.size());
  std::size_t below = 0;
  for (double s : corpus.true_scores) below += s < mean ? 1 : 0;

  std::cout << "wrote " << corpus.records.size() << " songs to " << opts.out << '\n';
  if (!opts.no_features) {
    std::cout << "feature caches in " << opts.feature_dir << " (" << segment << ")\n";
  }
  std::cout << "below-mean share: "
            << static_cast<double>(below) /
                   static_cast<double>(corpus.true_scores.size())
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// features

struct FeaturesOpts {
  std::string manifest;
  std::string cache_dir = env_cache_dir();
  std::string segment = "mid30";
  std::size_t window = 4096;
  std::size_t hop = 2048;
  std::size_t mels = 128;
  std::size_t sample_rate = 22050;
  bool force = false;
};

int run_features(const FeaturesOpts& opts) {
  if (opts.cache_dir.empty()) {
    config_error("--cache-dir or HITRANK_CACHE_DIR is required");
  }
  const SegmentStrategy strategy = segment_strategy_from_string(opts.segment);
  const std::string tag{to_string(strategy)};
  std::vector<SongRecord> records = read_manifest(opts.manifest);
  fs::create_directories(opts.cache_dir);
  const fs::path manifest_dir = fs::path(opts.manifest).parent_path();

  std::size_t written = 0, cached = 0, no_audio = 0;
  for (const SongRecord& rec : records) {
    if (rec.audio_path.empty()) {
      ++no_audio;
      continue;
    }
    const fs::path out = fs::path(opts.cache_dir) / (rec.id + "." + tag + ".hrfc");
    if (!opts.force && fs::exists(out)) {
      ++cached;
      continue;
    }
    fs::path audio(rec.audio_path);
    if (audio.is_relative()) audio = manifest_dir / audio;

    const AudioClip clip = read_wav(audio.string());
    if (clip.sample_rate != opts.sample_rate) {
      config_error("'" + audio.string() + "' is sampled at " +
                   std::to_string(clip.sample_rate) + " Hz, expected " +
                   std::to_string(opts.sample_rate) + " (resampling is out of scope)");
    }
    const AudioClip segment = select_segment(clip, strategy);
    const Tensor magnitude = stft_magnitude(segment, opts.window, opts.hop);
    const MelFilterbank bank(opts.mels, opts.window,
                             static_cast<double>(clip.sample_rate), 0.0,
                             static_cast<double>(clip.sample_rate) / 2.0);
    const MelSpectrogram mel = mel_project(magnitude, bank);
    write_feature_cache(out.string(), CachedFeature{rec.id, tag, mel.values});
    ++written;
  }
  std::cout << "features written: " << written << ", already cached: " << cached
            << ", no audio path: " << no_audio << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// shared manifest loading for train/eval

struct LoadedCorpus {
  std::vector<SongRecord> records;
  std::vector<std::size_t> eligible;
  std::vector<double> hit;
  std::size_t bins = 0;
  std::size_t frames = 0;
};

LoadedCorpus load_corpus(const std::string& manifest, const std::string& cache_dir,
                         SegmentStrategy strategy) {
  LoadedCorpus corpus;
  corpus.records = read_manifest(manifest);
  load_features(corpus.records, strategy, cache_dir);

  std::vector<Exclusion> excluded;
  corpus.eligible = eligible_ids(corpus.records, &excluded);
  if (!excluded.empty()) {
    std::cerr << excluded.size() << " songs lack a day-" << kHitScoreDay
              << " playcount and are skipped\n";
  }
  if (corpus.eligible.empty()) config_error("no song in the manifest has a hit score");

  for (std::size_t id : corpus.eligible) {
    const Tensor& f = *corpus.records[id].features;
    if (corpus.bins == 0) {
      corpus.bins = f.dim(0);
      corpus.frames = f.dim(1);
    } else if (f.dim(0) != corpus.bins || f.dim(1) != corpus.frames) {
      config_error("song '" + corpus.records[id].id +
                   "' has a feature shape differing from earlier records");
    }
    corpus.hit.push_back(hit_score(corpus.records[id]));
  }
  return corpus;
}

RaterConfig rater_config_for(const std::string& scale, std::size_t bins,
                             std::size_t frames) {
  if (scale == "standard") {
    const RaterConfig cfg = RaterConfig::standard();
    if (bins != cfg.input_bins || frames != cfg.input_frames) {
      config_error("standard network expects " + std::to_string(cfg.input_bins) +
                   " x " + std::to_string(cfg.input_frames) + " features, data has " +
                   std::to_string(bins) + " x " + std::to_string(frames));
    }
    return cfg;
  }
  if (scale == "compact") return RaterConfig::compact(bins, frames);
  config_error("unknown scale '" + scale + "' (want compact | standard)");
}

TagBranchConfig tag_config_for(const std::string& scale, std::size_t width) {
  if (scale == "standard") {
    TagBranchConfig cfg = TagBranchConfig::standard();
    cfg.input_width = width;
    return cfg;
  }
  return TagBranchConfig{width, {16, 8}};
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  std::string manifest;
  std::string cache_dir = env_cache_dir();
  std::string out;
  std::string variant = "simple";
  std::string sampler = "naive";
  std::string features = "audio";
  std::string segment = "mid30";
  std::string scale = "standard";
  double margin = 0.05;
  double w = 0.5;
  double mu = 0.5;
  double lr = 1e-3;
  double momentum = 0.9;
  std::size_t epochs = 3;
  std::size_t batch_size = 32;
  std::size_t pairs = 3000;
  bool resample_pairs = false;
  std::uint64_t seed = 0;
};

int run_train(const TrainOpts& opts) {
  const ModelVariant variant = model_variant_from_string(opts.variant);
  const SamplerKind sampler = sampler_kind_from_string(opts.sampler);
  if (variant == ModelVariant::kSiamese && sampler == SamplerKind::kAbArtist) {
    config_error("ab+artist fuses two checkpoints: train the ab and artist models "
                 "separately, then pass both to eval --model");
  }
  const FeatureSet feature_set = feature_set_from_string(opts.features);
  const SegmentStrategy strategy = segment_strategy_from_string(opts.segment);

  LoadedCorpus corpus = load_corpus(opts.manifest, opts.cache_dir, strategy);
  const double mu = feature_set == FeatureSet::kAudioTag ? opts.mu : 0.0;
  if (mu > 0.0) {
    for (std::size_t id : corpus.eligible) {
      if (!corpus.records[id].tags) {
        config_error("song '" + corpus.records[id].id +
                     "' has no tags; audio+tags needs them everywhere");
      }
    }
  }

  const Standardizer scaler = Standardizer::fit(corpus.hit);
  TrainingSet ts;
  std::vector<std::string> artists;
  for (std::size_t k = 0; k < corpus.eligible.size(); ++k) {
    const SongRecord& rec = corpus.records[corpus.eligible[k]];
    ts.features.push_back(&*rec.features);
    if (mu > 0.0) ts.tags.push_back(&*rec.tags);
    ts.targets.push_back(scaler.apply(corpus.hit[k]));
    artists.push_back(rec.artist_id);
  }

  const RaterConfig rater_cfg = rater_config_for(opts.scale, corpus.bins, corpus.frames);
  std::optional<TagBranchConfig> tag_cfg;
  if (mu > 0.0) {
    tag_cfg = tag_config_for(opts.scale, corpus.records[corpus.eligible[0]].tags->size());
  }
  HybridRater model(rater_cfg, tag_cfg, mu, mix_seed(opts.seed, 1));

  TrainOptions train;
  train.lr = opts.lr;
  train.momentum = opts.momentum;
  train.epochs = opts.epochs;
  train.batch_size = opts.batch_size;
  train.seed = mix_seed(opts.seed, 3);
  train.resample_pairs_each_epoch = opts.resample_pairs;

  const auto draw = [&](std::uint64_t seed) {
    switch (sampler) {
      case SamplerKind::kNaive: return naive_sample(corpus.hit, opts.pairs, seed);
      case SamplerKind::kAb:
        return ab_sample(corpus.hit, ab_partition(corpus.hit), opts.pairs, seed);
      default: return artist_sample(corpus.hit, artists, opts.pairs, seed);
    }
  };

  TrainResult result;
  if (variant == ModelVariant::kSimple) {
    result = fit_rating(model, ts, train);
  } else {
    const PairBatch pairs = draw(mix_seed(opts.seed, 2));
    PairResampler resampler;
    if (opts.resample_pairs) resampler = draw;
    result = fit_siamese(model, ts, pairs, LossWeights{opts.margin, opts.w}, train,
                         resampler);
  }

  save_model(opts.out, model, scaler);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    std::cout << "epoch " << e << ": loss " << result.epoch_loss[e] << '\n';
  }
  std::cout << "saved " << opts.out << " (" << corpus.eligible.size() << " songs)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::string manifest;
  std::string cache_dir = env_cache_dir();
  std::vector<std::string> models;
  std::string segment = "mid30";
  std::string out;
  double fraction = 0.10;
};

int run_eval(const EvalOpts& opts) {
  const SegmentStrategy strategy = segment_strategy_from_string(opts.segment);
  LoadedCorpus corpus = load_corpus(opts.manifest, opts.cache_dir, strategy);

  std::vector<const Tensor*> feats;
  for (std::size_t id : corpus.eligible) feats.push_back(&*corpus.records[id].features);

  std::vector<double> fused;
  for (const std::string& path : opts.models) {
    const LoadedModel loaded = load_model(path);
    std::vector<const std::vector<double>*> tags;
    if (loaded.model.mu() > 0.0) {
      for (std::size_t id : corpus.eligible) {
        if (!corpus.records[id].tags) {
          config_error("model '" + path + "' fuses tags but song '" +
                       corpus.records[id].id + "' has none");
        }
        tags.push_back(&*corpus.records[id].tags);
      }
    }
    std::vector<double> scores = loaded.model.score(feats, tags);
    fused = fused.empty() ? std::move(scores) : fuse_scores(fused, scores);
  }

  RankedEval eval;
  eval.true_scores = corpus.hit;
  eval.predicted = std::move(fused);
  eval.fraction = opts.fraction;

  nlohmann::ordered_json j;
  j["manifest"] = opts.manifest;
  j["songs"] = corpus.eligible.size();
  j["fraction"] = opts.fraction;
  j["models"] = opts.models;
  const auto tau = kendall_tau(eval);
  const auto rho = spearman_rho(eval);
  j["metrics"] = {{"ndcg", ndcg(eval)},
                  {"kendall", tau ? nlohmann::ordered_json(*tau)
                                  : nlohmann::ordered_json(nullptr)},
                  {"spearman", rho ? nlohmann::ordered_json(*rho)
                                   : nlohmann::ordered_json(nullptr)}};
  write_text_output(opts.out, j.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// table

ExperimentConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    config_error("config '" + path + "': " + e.what());
  }

  const auto check_keys = [&](const nlohmann::json& obj,
                              std::initializer_list<const char*> known,
                              const std::string& where) {
    for (const auto& item : obj.items()) {
      bool ok = false;
      for (const char* k : known) ok = ok || item.key() == k;
      if (!ok) config_error("config " + where + ": unknown key '" + item.key() + "'");
    }
  };

  ExperimentConfig cfg;
  try {
    check_keys(j,
               {"manifest", "cache_dir", "synth", "rows", "grid", "train",
                "pair_count", "top_k", "folds", "fraction", "selection", "scale",
                "seed"},
               "root");
    if (j.contains("manifest")) cfg.manifest = j["manifest"].get<std::string>();
    if (j.contains("cache_dir")) cfg.cache_dir = j["cache_dir"].get<std::string>();
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      check_keys(s,
                 {"songs", "artists", "latent_dim", "bins", "frames", "audio_dims",
                  "tags", "days", "release_spread_days", "artist_weight",
                  "song_weight", "tilt", "signal_weight", "feature_noise",
                  "tag_noise", "luck_noise", "seed"},
                 "synth");
      if (s.contains("songs")) cfg.synth.n = s["songs"].get<std::size_t>();
      if (s.contains("artists")) cfg.synth.n_artists = s["artists"].get<std::size_t>();
      if (s.contains("latent_dim")) cfg.synth.latent_dim = s["latent_dim"].get<std::size_t>();
      if (s.contains("bins")) cfg.synth.bins = s["bins"].get<std::size_t>();
      if (s.contains("frames")) cfg.synth.frames = s["frames"].get<std::size_t>();
      if (s.contains("audio_dims")) cfg.synth.audio_dims = s["audio_dims"].get<std::size_t>();
      if (s.contains("tags")) cfg.synth.tag_count = s["tags"].get<std::size_t>();
      if (s.contains("days")) cfg.synth.days = s["days"].get<std::size_t>();
      if (s.contains("release_spread_days")) {
        cfg.synth.release_spread_days = s["release_spread_days"].get<std::size_t>();
      }
      if (s.contains("artist_weight")) cfg.synth.artist_weight = s["artist_weight"].get<double>();
      if (s.contains("song_weight")) cfg.synth.song_weight = s["song_weight"].get<double>();
      if (s.contains("tilt")) cfg.synth.tilt = s["tilt"].get<double>();
      if (s.contains("signal_weight")) cfg.synth.signal_weight = s["signal_weight"].get<double>();
      if (s.contains("feature_noise")) cfg.synth.feature_noise = s["feature_noise"].get<double>();
      if (s.contains("tag_noise")) cfg.synth.tag_noise = s["tag_noise"].get<double>();
      if (s.contains("luck_noise")) cfg.synth.luck_noise = s["luck_noise"].get<double>();
      if (s.contains("seed")) cfg.synth.seed = s["seed"].get<std::uint64_t>();
    }
    if (j.contains("rows")) {
      for (const auto& label : j["rows"]) {
        cfg.rows.push_back(row_spec_from_label(label.get<std::string>()));
      }
    }
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      check_keys(g, {"margins", "ws", "mus"}, "grid");
      if (g.contains("margins")) cfg.grid.margins = g["margins"].get<std::vector<double>>();
      if (g.contains("ws")) cfg.grid.ws = g["ws"].get<std::vector<double>>();
      if (g.contains("mus")) cfg.grid.mus = g["mus"].get<std::vector<double>>();
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      check_keys(t, {"lr", "momentum", "epochs", "batch_size", "resample_pairs"},
                 "train");
      if (t.contains("lr")) cfg.train.lr = t["lr"].get<double>();
      if (t.contains("momentum")) cfg.train.momentum = t["momentum"].get<double>();
      if (t.contains("epochs")) cfg.train.epochs = t["epochs"].get<std::size_t>();
      if (t.contains("batch_size")) cfg.train.batch_size = t["batch_size"].get<std::size_t>();
      if (t.contains("resample_pairs")) {
        cfg.train.resample_pairs_each_epoch = t["resample_pairs"].get<bool>();
      }
    }
    if (j.contains("pair_count")) cfg.pair_count = j["pair_count"].get<std::size_t>();
    if (j.contains("top_k")) cfg.top_k = j["top_k"].get<std::size_t>();
    if (j.contains("folds")) cfg.folds = j["folds"].get<std::size_t>();
    if (j.contains("fraction")) cfg.fraction = j["fraction"].get<double>();
    if (j.contains("selection")) {
      const std::string name = j["selection"].get<std::string>();
      if (name == "kendall") cfg.selection = SelectionMetric::kKendall;
      else if (name == "ndcg") cfg.selection = SelectionMetric::kNdcg;
      else if (name == "spearman") cfg.selection = SelectionMetric::kSpearman;
      else config_error("config selection: unknown metric '" + name + "'");
    }
    if (j.contains("scale")) {
      const std::string name = j["scale"].get<std::string>();
      if (name == "compact") cfg.scale = RaterScale::kCompact;
      else if (name == "standard") cfg.scale = RaterScale::kStandard;
      else config_error("config scale: unknown value '" + name + "'");
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    config_error("config '" + path + "': " + e.what());
  }
  return cfg;
}

std::vector<RowSpec> default_rows() {
  std::vector<RowSpec> rows;
  for (const char* label :
       {"simple-audio", "simple-audio+tags", "siamese-naive-audio",
        "siamese-naive-audio+tags", "siamese-ab-audio", "siamese-ab-audio+tags"}) {
    rows.push_back(row_spec_from_label(label));
  }
  return rows;
}

struct TableOpts {
  std::string config_path;
  std::string manifest;
  std::string cache_dir;
  std::vector<std::string> rows;
  std::vector<double> margins;
  std::vector<double> ws;
  std::vector<double> mus;
  double lr = 1e-3;
  double momentum = 0.9;
  std::size_t epochs = 3;
  std::size_t batch_size = 32;
  bool resample_pairs = false;
  std::size_t pairs = 3000;
  std::size_t top_k = 15000;
  std::size_t folds = 10;
  double fraction = 0.10;
  std::string selection = "kendall";
  std::string scale = "compact";
  std::uint64_t seed = 0;
  SynthSpec synth;
  std::string format = "text";
  std::string out;
  std::string report_dir;
  bool progress = false;
};

struct TableFlags {
  CLI::Option* manifest;
  CLI::Option* cache_dir;
  CLI::Option* rows;
  CLI::Option* margins;
  CLI::Option* ws;
  CLI::Option* mus;
  CLI::Option* lr;
  CLI::Option* momentum;
  CLI::Option* epochs;
  CLI::Option* batch_size;
  CLI::Option* resample_pairs;
  CLI::Option* pairs;
  CLI::Option* top_k;
  CLI::Option* folds;
  CLI::Option* fraction;
  CLI::Option* selection;
  CLI::Option* scale;
  CLI::Option* seed;
  SynthOptions synth;
};

int run_table(const TableOpts& opts, const TableFlags& flags) {
  ExperimentConfig cfg;
  if (!opts.config_path.empty()) cfg = config_from_file(opts.config_path);

  const auto set = [](const CLI::Option* flag, auto& dst, const auto& src) {
    if (flag->count() > 0) dst = src;
  };
  set(flags.manifest, cfg.manifest, opts.manifest);
  set(flags.cache_dir, cfg.cache_dir, opts.cache_dir);
  if (flags.rows->count() > 0) {
    cfg.rows.clear();
    for (const std::string& label : opts.rows) {
      cfg.rows.push_back(row_spec_from_label(label));
    }
  }
  set(flags.margins, cfg.grid.margins, opts.margins);
  set(flags.ws, cfg.grid.ws, opts.ws);
  set(flags.mus, cfg.grid.mus, opts.mus);
  set(flags.lr, cfg.train.lr, opts.lr);
  set(flags.momentum, cfg.train.momentum, opts.momentum);
  set(flags.epochs, cfg.train.epochs, opts.epochs);
  set(flags.batch_size, cfg.train.batch_size, opts.batch_size);
  set(flags.resample_pairs, cfg.train.resample_pairs_each_epoch, opts.resample_pairs);
  set(flags.pairs, cfg.pair_count, opts.pairs);
  set(flags.top_k, cfg.top_k, opts.top_k);
  set(flags.folds, cfg.folds, opts.folds);
  set(flags.fraction, cfg.fraction, opts.fraction);
  set(flags.seed, cfg.seed, opts.seed);

  if (flags.selection->count() > 0) {
    if (opts.selection == "kendall") cfg.selection = SelectionMetric::kKendall;
    else if (opts.selection == "ndcg") cfg.selection = SelectionMetric::kNdcg;
    else if (opts.selection == "spearman") cfg.selection = SelectionMetric::kSpearman;
    else config_error("unknown selection metric '" + opts.selection + "'");
  }
  if (flags.scale->count() > 0) {
    if (opts.scale == "compact") cfg.scale = RaterScale::kCompact;
    else if (opts.scale == "standard") cfg.scale = RaterScale::kStandard;
    else config_error("unknown scale '" + opts.scale + "'");
  }

  set(flags.synth.songs, cfg.synth.n, opts.synth.n);
  set(flags.synth.artists, cfg.synth.n_artists, opts.synth.n_artists);
  set(flags.synth.latent, cfg.synth.latent_dim, opts.synth.latent_dim);
  set(flags.synth.bins, cfg.synth.bins, opts.synth.bins);
  set(flags.synth.frames, cfg.synth.frames, opts.synth.frames);
  set(flags.synth.audio_dims, cfg.synth.audio_dims, opts.synth.audio_dims);
  set(flags.synth.tags, cfg.synth.tag_count, opts.synth.tag_count);
  set(flags.synth.days, cfg.synth.days, opts.synth.days);
  set(flags.synth.spread, cfg.synth.release_spread_days,
      opts.synth.release_spread_days);
  set(flags.synth.artist_weight, cfg.synth.artist_weight, opts.synth.artist_weight);
  set(flags.synth.song_weight, cfg.synth.song_weight, opts.synth.song_weight);
  set(flags.synth.tilt, cfg.synth.tilt, opts.synth.tilt);
  set(flags.synth.signal, cfg.synth.signal_weight, opts.synth.signal_weight);
  set(flags.synth.feature_noise, cfg.synth.feature_noise, opts.synth.feature_noise);
  set(flags.synth.tag_noise, cfg.synth.tag_noise, opts.synth.tag_noise);
  set(flags.synth.luck_noise, cfg.synth.luck_noise, opts.synth.luck_noise);
  set(flags.synth.seed, cfg.synth.seed, opts.synth.seed);

  if (cfg.rows.empty()) cfg.rows = default_rows();
  if (cfg.cache_dir.empty()) cfg.cache_dir = env_cache_dir();
  if (cfg.manifest.empty() && flags.synth.seed->count() == 0 &&
      cfg.synth.seed == 0) {
    cfg.synth.seed = cfg.seed;
  }
  if (opts.progress) {
    cfg.progress = [](const std::string& line) { std::cerr << line << '\n'; };
  }

  ReportFormat format = ReportFormat::kText;
  if (opts.format == "csv") format = ReportFormat::kCsv;
  else if (opts.format == "json") format = ReportFormat::kJson;
  else if (opts.format != "text") config_error("unknown format '" + opts.format + "'");

  const ExperimentResult result = run_experiment(cfg);
  write_text_output(opts.out, render_report(result, format));
  if (!opts.report_dir.empty()) {
    const auto paths = write_metric_reports(opts.report_dir, result);
    std::cerr << "wrote " << paths.size() << " metric reports to " << opts.report_dir
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pairwise learning-to-rank engine for song popularity"};
  app.require_subcommand(1);
  int rc = 0;

  GenOpts gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic long-tail manifest");
  add_synth_options(gen_cmd, gen.spec, "--seed");
  gen_cmd->add_option("--out", gen.out, "Manifest file to write")->required();
  gen_cmd->add_option("--feature-dir", gen.feature_dir,
                      "Feature cache directory (default: HITRANK_CACHE_DIR)");
  gen_cmd->add_flag("--no-features", gen.no_features,
                    "Skip writing feature cache files");
  gen_cmd->callback([&] { rc = run_gen(gen); });

  FeaturesOpts features;
  auto* feat_cmd =
      app.add_subcommand("features", "Cut segments and cache log-mel features");
  feat_cmd->add_option("--manifest", features.manifest, "Manifest to process")
      ->required();
  feat_cmd->add_option("--cache-dir", features.cache_dir,
                       "Feature cache directory (default: HITRANK_CACHE_DIR)");
  feat_cmd->add_option("--segment", features.segment, "mid30 | highlight");
  feat_cmd->add_option("--window", features.window, "STFT window size");
  feat_cmd->add_option("--hop", features.hop, "STFT hop size");
  feat_cmd->add_option("--mels", features.mels, "Mel band count");
  feat_cmd->add_option("--sample-rate", features.sample_rate,
                       "Expected WAV sample rate; mismatches are rejected");
  feat_cmd->add_flag("--force", features.force, "Recompute existing caches");
  feat_cmd->callback([&] { rc = run_features(features); });

  TrainOpts train;
  auto* train_cmd = app.add_subcommand("train", "Train one model and save a checkpoint");
  train_cmd->add_option("--manifest", train.manifest, "Training manifest")->required();
  train_cmd->add_option("--cache-dir", train.cache_dir,
                        "Feature cache directory (default: HITRANK_CACHE_DIR)");
  train_cmd->add_option("--out", train.out, "Checkpoint file to write")->required();
  train_cmd->add_option("--variant", train.variant, "simple | siamese");
  train_cmd->add_option("--sampler", train.sampler, "naive | ab | artist");
  train_cmd->add_option("--features", train.features, "audio | audio+tags");
  train_cmd->add_option("--segment", train.segment, "mid30 | highlight");
  train_cmd->add_option("--scale", train.scale, "compact | standard");
  train_cmd->add_option("--margin", train.margin, "Ranking margin m");
  train_cmd->add_option("--w", train.w, "Rank loss weight w in [0, 1]");
  train_cmd->add_option("--mu", train.mu, "Tag fusion weight in [0, 1]");
  train_cmd->add_option("--lr", train.lr, "Learning rate");
  train_cmd->add_option("--momentum", train.momentum, "SGD momentum");
  train_cmd->add_option("--epochs", train.epochs, "Training epochs");
  train_cmd->add_option("--batch-size", train.batch_size, "Batch size");
  train_cmd->add_option("--pairs", train.pairs, "Pairs to sample (siamese)");
  train_cmd->add_flag("--resample-pairs", train.resample_pairs,
                      "Draw a fresh pair set every epoch");
  train_cmd->add_option("--seed", train.seed, "Run seed");
  train_cmd->callback([&] { rc = run_train(train); });

  EvalOpts eval;
  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate checkpoints on a manifest (mean-fused)");
  eval_cmd->add_option("--manifest", eval.manifest, "Evaluation manifest")->required();
  eval_cmd->add_option("--cache-dir", eval.cache_dir,
                       "Feature cache directory (default: HITRANK_CACHE_DIR)");
  eval_cmd->add_option("--model", eval.models, "Checkpoint file (repeat to fuse)")
      ->required();
  eval_cmd->add_option("--segment", eval.segment, "mid30 | highlight");
  eval_cmd->add_option("--fraction", eval.fraction, "Top fraction for the metrics");
  eval_cmd->add_option("--out", eval.out, "Write the MetricReport JSON here");
  eval_cmd->callback([&] { rc = run_eval(eval); });

  TableOpts table;
  TableFlags flags;
  auto* table_cmd =
      app.add_subcommand("table", "Cross-validated model comparison table");
  table_cmd->add_option("--config", table.config_path,
                        "JSON config file; flags override its values");
  flags.manifest = table_cmd->add_option("--manifest", table.manifest,
                                         "Manifest (omit to use synthetic data)");
  flags.cache_dir =
      table_cmd->add_option("--cache-dir", table.cache_dir,
                            "Feature cache directory (default: HITRANK_CACHE_DIR)");
  flags.rows = table_cmd->add_option(
      "--row", table.rows, "Row label, e.g. siamese-ab-audio+tags (repeatable)");
  flags.margins =
      table_cmd->add_option("--margins", table.margins, "Margin grid")->delimiter(',');
  flags.ws = table_cmd->add_option("--ws", table.ws, "w grid")->delimiter(',');
  flags.mus = table_cmd->add_option("--mus", table.mus, "mu grid")->delimiter(',');
  flags.lr = table_cmd->add_option("--lr", table.lr, "Learning rate");
  flags.momentum = table_cmd->add_option("--momentum", table.momentum, "SGD momentum");
  flags.epochs = table_cmd->add_option("--epochs", table.epochs, "Training epochs");
  flags.batch_size = table_cmd->add_option("--batch-size", table.batch_size, "Batch size");
  flags.resample_pairs = table_cmd->add_flag("--resample-pairs", table.resample_pairs,
                                             "Draw a fresh pair set every epoch");
  flags.pairs = table_cmd->add_option("--pairs", table.pairs, "Pairs per siamese cell");
  flags.top_k = table_cmd->add_option("--top-k", table.top_k,
                                      "Keep the k best-selling songs");
  flags.folds = table_cmd->add_option("--folds", table.folds, "Cross-validation folds");
  flags.fraction =
      table_cmd->add_option("--fraction", table.fraction, "Top fraction for metrics");
  flags.selection = table_cmd->add_option("--selection", table.selection,
                                          "Validation metric: kendall | ndcg | spearman");
  flags.scale = table_cmd->add_option("--scale", table.scale, "compact | standard");
  flags.seed = table_cmd->add_option("--seed", table.seed, "Experiment seed");
  flags.synth = add_synth_options(table_cmd, table.synth, "--synth-seed");
  table_cmd->add_option("--format", table.format, "text | csv | json");
  table_cmd->add_option("--out", table.out, "Write the table here (default: stdout)");
  table_cmd->add_option("--report-dir", table.report_dir,
                        "Write per-(row, fold) MetricReport JSON files here");
  table_cmd->add_flag("--progress", table.progress, "Log per-fold progress to stderr");
  table_cmd->callback([&] { rc = run_table(table, flags); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return rc;
}

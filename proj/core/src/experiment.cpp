#include "hitrank/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "hitrank/mel.hpp"
#include "hitrank/rng.hpp"
#include "hitrank/sampling.hpp"

namespace hitrank {
namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument("experiment: " + what);
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::string to_string(ModelVariant v) {
  return v == ModelVariant::kSimple ? "simple" : "siamese";
}

std::string to_string(SamplerKind s) {
  switch (s) {
    case SamplerKind::kNaive: return "naive";
    case SamplerKind::kAb: return "ab";
    case SamplerKind::kArtist: return "artist";
    case SamplerKind::kAbArtist: return "ab+artist";
  }
  fail("unknown sampler kind");
}

std::string to_string(FeatureSet f) {
  return f == FeatureSet::kAudio ? "audio" : "audio+tags";
}

ModelVariant model_variant_from_string(const std::string& name) {
  if (name == "simple") return ModelVariant::kSimple;
  if (name == "siamese") return ModelVariant::kSiamese;
  fail("unknown model variant '" + name + "' (want simple | siamese)");
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  if (name == "naive") return SamplerKind::kNaive;
  if (name == "ab") return SamplerKind::kAb;
  if (name == "artist") return SamplerKind::kArtist;
  if (name == "ab+artist") return SamplerKind::kAbArtist;
  fail("unknown sampler '" + name + "' (want naive | ab | artist | ab+artist)");
}

FeatureSet feature_set_from_string(const std::string& name) {
  if (name == "audio") return FeatureSet::kAudio;
  if (name == "audio+tags") return FeatureSet::kAudioTag;
  fail("unknown feature set '" + name + "' (want audio | audio+tags)");
}

std::string row_label(const RowSpec& spec) {
  std::string label = to_string(spec.variant);
  if (spec.variant == ModelVariant::kSiamese) label += "-" + to_string(spec.sampler);
  label += "-" + to_string(spec.features);
  if (spec.segment == SegmentStrategy::kHighlight) label += "-hl30";
  return label;
}

RowSpec row_spec_from_label(const std::string& label) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream split(label);
  while (std::getline(split, part, '-')) parts.push_back(part);

  RowSpec spec;
  std::size_t i = 0;
  const auto next = [&]() -> const std::string& {
    if (i >= parts.size()) fail("row label '" + label + "' is incomplete");
    return parts[i++];
  };
  spec.variant = model_variant_from_string(next());
  if (spec.variant == ModelVariant::kSiamese) {
    spec.sampler = sampler_kind_from_string(next());
  }
  spec.features = feature_set_from_string(next());
  if (i < parts.size()) {
    if (parts[i] != "hl30") fail("row label '" + label + "' has trailing '" + parts[i] + "'");
    spec.segment = SegmentStrategy::kHighlight;
    ++i;
  }
  if (i != parts.size()) fail("row label '" + label + "' has extra tokens");
  return spec;
}

void sort_rows(std::vector<RowSpec>& rows) {
  const auto key = [](const RowSpec& r) {
    const int sampler =
        r.variant == ModelVariant::kSimple ? -1 : static_cast<int>(r.sampler);
    return std::make_tuple(static_cast<int>(r.variant), sampler,
                           static_cast<int>(r.features), static_cast<int>(r.segment));
  };
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const RowSpec& a, const RowSpec& b) { return key(a) < key(b); });
}

namespace {

struct Dataset {
  std::vector<SongRecord> records;
  std::vector<double> hit;
  std::vector<bool> intrinsic_features;
  bool has_tags = false;
  std::size_t bins = 0;
  std::size_t frames = 0;
};

Dataset load_dataset(const ExperimentConfig& config) {
  std::vector<SongRecord> all;
  if (config.manifest.empty()) {
    all = synth_longtail(config.synth).records;
  } else {
    all = read_manifest(config.manifest);
  }
  const TopSelection sel = select_top(all, config.top_k);

  Dataset ds;
  ds.records.reserve(sel.ids.size());
  for (std::size_t idx : sel.ids) ds.records.push_back(std::move(all[idx]));
  ds.hit.reserve(ds.records.size());
  ds.intrinsic_features.reserve(ds.records.size());
  ds.has_tags = !ds.records.empty();
  for (const SongRecord& rec : ds.records) {
    ds.hit.push_back(hit_score(rec));
    ds.intrinsic_features.push_back(rec.features.has_value());
    ds.has_tags = ds.has_tags && rec.tags.has_value();
  }
  return ds;
}

Tensor load_feature_for(const SongRecord& rec, const std::string& tag,
                        const std::string& cache_dir) {
  namespace fs = std::filesystem;
  std::string path;
  if (!cache_dir.empty()) {
    const fs::path candidate = fs::path(cache_dir) / (rec.id + "." + tag + ".hrfc");
    if (fs::exists(candidate)) path = candidate.string();
  }
  if (path.empty() && !rec.feature_path.empty()) {
    fs::path p(rec.feature_path);
    if (p.is_relative() && !cache_dir.empty()) p = fs::path(cache_dir) / p;
    path = p.string();
  }
  if (path.empty()) {
    fail("song '" + rec.id + "' has no cached features for segment '" + tag +
         "' (searched cache dir '" + cache_dir + "')");
  }
  CachedFeature cached = read_feature_cache(path);
  if (cached.strategy != tag) {
    fail("feature cache '" + path + "' was cut with segment '" + cached.strategy +
         "', row needs '" + tag + "'");
  }
  if (cached.song_id != rec.id) {
    fail("feature cache '" + path + "' belongs to song '" + cached.song_id + "'");
  }
  return std::move(cached.values);
}

/// Ensures every record carries features cut with `strategy`. Records that
/// arrived with in-memory features (the synthetic corpus) keep them; the
/// rest reload whenever the wanted strategy changes.
void materialize_features(Dataset& ds, SegmentStrategy strategy,
                          const std::string& cache_dir) {
  const std::string tag{to_string(strategy)};
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (ds.intrinsic_features[i]) continue;
    ds.records[i].features = load_feature_for(ds.records[i], tag, cache_dir);
  }
  ds.bins = 0;
  ds.frames = 0;

  for (const SongRecord& rec : ds.records) {
    const Tensor& f = *rec.features;
    if (ds.bins == 0) {
      ds.bins = f.dim(0);
      ds.frames = f.dim(1);
    } else if (f.dim(0) != ds.bins || f.dim(1) != ds.frames) {
      fail("song '" + rec.id + "' has feature shape [" + std::to_string(f.dim(0)) +
           ", " + std::to_string(f.dim(1)) + "]; earlier records have [" +
           std::to_string(ds.bins) + ", " + std::to_string(ds.frames) + "]");
    }
  }
}

RaterConfig make_rater_config(const Dataset& ds, RaterScale scale) {
  if (scale == RaterScale::kStandard) {
    const RaterConfig std_cfg = RaterConfig::standard();
    if (ds.bins != std_cfg.input_bins || ds.frames != std_cfg.input_frames) {
      fail("standard network expects " + std::to_string(std_cfg.input_bins) + " x " +
           std::to_string(std_cfg.input_frames) + " features, data has " +
           std::to_string(ds.bins) + " x " + std::to_string(ds.frames));
    }
    return std_cfg;
  }
  return RaterConfig::compact(ds.bins, ds.frames);
}

TagBranchConfig make_tag_config(const Dataset& ds, RaterScale scale) {
  const std::size_t width = ds.records.front().tags->size();
  if (scale == RaterScale::kStandard) {
    TagBranchConfig cfg = TagBranchConfig::standard();
    cfg.input_width = width;
    return cfg;
  }
  return TagBranchConfig{width, {16, 8}};
}

struct GridCell {
  double margin = 0.0;
  double w = 0.0;
  double mu = 0.0;
};

std::vector<GridCell> expand_grid(const GridSpec& grid, const RowSpec& row,
                                  bool tags_available) {
  const bool siamese = row.variant == ModelVariant::kSiamese;
  const bool uses_tags = row.features == FeatureSet::kAudioTag && tags_available;
  const std::vector<double> margins = siamese ? grid.margins : std::vector<double>{0.0};
  const std::vector<double> ws = siamese ? grid.ws : std::vector<double>{0.0};
  const std::vector<double> mus = uses_tags ? grid.mus : std::vector<double>{0.0};
  std::vector<GridCell> cells;
  cells.reserve(margins.size() * ws.size() * mus.size());
  for (double m : margins) {
    for (double w : ws) {
      for (double mu : mus) cells.push_back({m, w, mu});
    }
  }
  return cells;
}

PairBatch sample_pairs(SamplerKind kind, const std::vector<double>& scores,
                       const std::vector<std::string>& artists,
                       std::size_t pair_count, std::uint64_t seed) {
  switch (kind) {
    case SamplerKind::kNaive:
      return naive_sample(scores, pair_count, seed);
    case SamplerKind::kAb:
      return ab_sample(scores, ab_partition(scores), pair_count, seed);
    case SamplerKind::kArtist:
      return artist_sample(scores, artists, pair_count, seed);
    case SamplerKind::kAbArtist:
      break;
  }
  fail("ab+artist trains two models; sample each side separately");
}

HybridRater train_one(const Dataset& ds, const std::vector<std::size_t>& train_ids,
                      const RowSpec& row, SamplerKind sampler, const GridCell& cell,
                      const ExperimentConfig& config, std::uint64_t cell_seed) {
  const bool uses_tags = cell.mu > 0.0;
  Standardizer scaler;
  {
    std::vector<double> train_hit;
    train_hit.reserve(train_ids.size());
    for (std::size_t id : train_ids) train_hit.push_back(ds.hit[id]);
    scaler = Standardizer::fit(train_hit);
  }

  TrainingSet ts;
  ts.features.reserve(train_ids.size());
  ts.targets.reserve(train_ids.size());
  if (uses_tags) ts.tags.reserve(train_ids.size());
  std::vector<double> local_scores;
  local_scores.reserve(train_ids.size());
  std::vector<std::string> local_artists;
  for (std::size_t id : train_ids) {
    const SongRecord& rec = ds.records[id];
    ts.features.push_back(&*rec.features);
    if (uses_tags) ts.tags.push_back(&*rec.tags);
    ts.targets.push_back(scaler.apply(ds.hit[id]));
    local_scores.push_back(ds.hit[id]);
  }

  const RaterConfig rater_cfg = make_rater_config(ds, config.scale);
  std::optional<TagBranchConfig> tag_cfg;
  if (uses_tags) tag_cfg = make_tag_config(ds, config.scale);
  HybridRater model(rater_cfg, tag_cfg, cell.mu, mix_seed(cell_seed, 1));

  TrainOptions opts = config.train;
  opts.seed = mix_seed(cell_seed, 3);

  if (row.variant == ModelVariant::kSimple) {
    fit_rating(model, ts, opts);
    return model;
  }

  const std::uint64_t sampler_seed = mix_seed(cell_seed, 2);
  for (std::size_t id : train_ids) local_artists.push_back(ds.records[id].artist_id);
  const PairBatch pairs =
      sample_pairs(sampler, local_scores, local_artists, config.pair_count, sampler_seed);
  const LossWeights weights{cell.margin, cell.w};
  PairResampler resampler;
  if (opts.resample_pairs_each_epoch) {
    resampler = [&, sampler](std::uint64_t epoch_seed) {
      return sample_pairs(sampler, local_scores, local_artists, config.pair_count,
                          epoch_seed);
    };
  }
  fit_siamese(model, ts, pairs, weights, opts, resampler);
  return model;
}

std::vector<HybridRater> train_cell(const Dataset& ds,
                                    const std::vector<std::size_t>& train_ids,
                                    const RowSpec& row, const GridCell& cell,
                                    const ExperimentConfig& config,
                                    std::uint64_t cell_seed) {
  std::vector<HybridRater> models;
  if (row.variant == ModelVariant::kSiamese && row.sampler == SamplerKind::kAbArtist) {
    models.push_back(
        train_one(ds, train_ids, row, SamplerKind::kAb, cell, config, cell_seed));
    models.push_back(train_one(ds, train_ids, row, SamplerKind::kArtist, cell, config,
                               mix_seed(cell_seed, 7)));
  } else {
    models.push_back(
        train_one(ds, train_ids, row, row.sampler, cell, config, cell_seed));
  }
  return models;
}

std::vector<double> predict_ids(const std::vector<HybridRater>& models,
                                const Dataset& ds,
                                const std::vector<std::size_t>& ids) {
  std::vector<const Tensor*> feats;
  feats.reserve(ids.size());
  for (std::size_t id : ids) feats.push_back(&*ds.records[id].features);

  std::vector<double> fused;
  for (const HybridRater& model : models) {
    std::vector<const std::vector<double>*> tags;
    if (model.mu() > 0.0) {
      tags.reserve(ids.size());
      for (std::size_t id : ids) tags.push_back(&*ds.records[id].tags);
    }
    std::vector<double> scores = model.score(feats, tags);
    fused = fused.empty() ? std::move(scores) : fuse_scores(fused, scores);
  }
  return fused;
}

double selection_score(const ExperimentConfig& config, const RankedEval& eval) {
  switch (config.selection) {
    case SelectionMetric::kKendall:
      return kendall_tau(eval).value_or(0.0);
    case SelectionMetric::kNdcg:
      return ndcg(eval);
    case SelectionMetric::kSpearman:
      return spearman_rho(eval).value_or(0.0);
  }
  fail("unknown selection metric");
}

void check_config(const ExperimentConfig& config) {
  if (config.rows.empty()) fail("no rows configured");
  if (config.folds < 3) fail("needs >= 3 folds");
  if (!(config.fraction > 0.0 && config.fraction <= 1.0)) {
    fail("fraction must be in (0, 1]");
  }
  if (config.grid.margins.empty() || config.grid.ws.empty() || config.grid.mus.empty()) {
    fail("hyper-parameter grids must be non-empty");
  }
  for (double m : config.grid.margins) {
    if (!(m >= 0.0)) fail("margins must be nonnegative");
  }
  for (double w : config.grid.ws) {
    if (!(w >= 0.0 && w <= 1.0)) fail("w grid values must be in [0, 1]");
  }
  for (double mu : config.grid.mus) {
    if (!(mu >= 0.0 && mu <= 1.0)) fail("mu grid values must be in [0, 1]");
  }
  bool any_siamese = false;
  for (const RowSpec& row : config.rows) {
    any_siamese = any_siamese || row.variant == ModelVariant::kSiamese;
  }
  if (any_siamese && config.pair_count == 0) fail("siamese rows need pair_count >= 1");
}

}  // namespace

void load_features(std::vector<SongRecord>& records, SegmentStrategy strategy,
                   const std::string& cache_dir) {
  const std::string tag{to_string(strategy)};
  for (SongRecord& rec : records) {
    if (rec.features) continue;
    rec.features = load_feature_for(rec, tag, cache_dir);
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  check_config(config);
  Dataset ds = load_dataset(config);
  if (ds.records.empty()) fail("dataset is empty after selection");

  std::vector<RowSpec> rows = config.rows;
  sort_rows(rows);

  const SplitPlan plan =
      SplitPlan::make(ds.records.size(), mix_seed(config.seed, 17), config.folds);

  ExperimentResult result;
  result.fraction = config.fraction;
  result.folds = config.folds;
  result.seed = config.seed;
  result.rows.reserve(rows.size());

  std::optional<SegmentStrategy> loaded;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const RowSpec& row = rows[r];
    if (!loaded || *loaded != row.segment) {
      materialize_features(ds, row.segment, config.cache_dir);
      loaded = row.segment;
    }

    ReportRow report;
    report.spec = row;
    const std::vector<GridCell> cells = expand_grid(config.grid, row, ds.has_tags);

    for (std::size_t t = 0; t < config.folds && !report.failed; ++t) {
      const std::vector<std::size_t> train_ids = plan.train_ids(t);
      const std::vector<std::size_t> val_ids = plan.validation_ids(t);
      std::vector<double> val_true;
      val_true.reserve(val_ids.size());
      for (std::size_t id : val_ids) val_true.push_back(ds.hit[id]);

      std::vector<HybridRater> best_models;
      GridCell best_cell;
      double best_score = 0.0;
      bool have_best = false;
      try {
        for (std::size_t g = 0; g < cells.size(); ++g) {
          const std::uint64_t cell_seed = mix_seed(config.seed, (r << 20) | t, g);
          std::vector<HybridRater> models =
              train_cell(ds, train_ids, row, cells[g], config, cell_seed);
          RankedEval val_eval;
          val_eval.true_scores = val_true;
          val_eval.predicted = predict_ids(models, ds, val_ids);
          val_eval.fraction = config.fraction;
          const double score = selection_score(config, val_eval);
          if (!have_best || score > best_score) {
            have_best = true;
            best_score = score;
            best_cell = cells[g];
            best_models = std::move(models);
          }
        }
      } catch (const TrainingDiverged& e) {
        report.failed = true;
        report.failure = e.what();
        break;
      }

      const TestFold fold = plan.test_fold(t);
      const RankedEval eval = fold.evaluate(
          [&](std::size_t pos) { return ds.hit[pos]; },
          [&](const std::vector<std::size_t>& ids) {
            return predict_ids(best_models, ds, ids);
          },
          config.fraction);

      FoldResult fr;
      fr.fold = t;
      fr.margin = best_cell.margin;
      fr.w = best_cell.w;
      fr.mu = best_cell.mu;
      fr.validation_kendall = best_score;
      fr.ndcg = ndcg(eval);
      fr.kendall = kendall_tau(eval).value_or(0.0);
      fr.spearman = spearman_rho(eval).value_or(0.0);
      report.folds.push_back(fr);

      if (config.progress) {
        std::ostringstream line;
        line << row_label(row) << " fold " << t << ": kendall "
             << format_double("%.4f", fr.kendall) << " ndcg "
             << format_double("%.4f", fr.ndcg);
        config.progress(line.str());
      }
    }

    if (!report.failed && !report.folds.empty()) {
      double sn = 0.0, sk = 0.0, sr = 0.0;
      for (const FoldResult& fr : report.folds) {
        sn += fr.ndcg;
        sk += fr.kendall;
        sr += fr.spearman;
      }
      const double count = static_cast<double>(report.folds.size());
      report.mean_ndcg = sn / count;
      report.mean_kendall = sk / count;
      report.mean_spearman = sr / count;
    }
    result.rows.push_back(std::move(report));
  }
  return result;
}

namespace {

std::string sampler_column(const ReportRow& row) {
  return row.spec.variant == ModelVariant::kSiamese ? to_string(row.spec.sampler) : "-";
}

std::string render_text_report(const ExperimentResult& result) {
  const std::string pct = format_double("%g", result.fraction * 100.0);
  std::vector<std::vector<std::string>> table;
  table.push_back({"row", "variant", "sampling", "features", "segment",
                   "ndcg@" + pct + "%", "kendall@" + pct + "%",
                   "spearman@" + pct + "%", "status"});
  for (const ReportRow& row : result.rows) {
    std::vector<std::string> cells;
    cells.push_back(row_label(row.spec));
    cells.push_back(to_string(row.spec.variant));
    cells.push_back(sampler_column(row));
    cells.push_back(to_string(row.spec.features));
    cells.push_back(std::string{to_string(row.spec.segment)});
    if (row.failed) {
      cells.insert(cells.end(), {"-", "-", "-", "FAILED"});
    } else {
      cells.push_back(format_double("%.4f", row.mean_ndcg));
      cells.push_back(format_double("%.4f", row.mean_kendall));
      cells.push_back(format_double("%.4f", row.mean_spearman));
      cells.push_back("ok");
    }
    table.push_back(std::move(cells));
  }

  std::vector<std::size_t> widths(table.front().size(), 0);
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      widths[c] = std::max(widths[c], line[c].size());
    }
  }
  std::ostringstream out;
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      out << line[c];
      if (c + 1 < line.size()) {
        out << std::string(widths[c] - line[c].size() + 2, ' ');
      }
    }
    out << '\n';
  }
  for (const ReportRow& row : result.rows) {
    if (row.failed) out << row_label(row.spec) << " failed: " << row.failure << '\n';
  }
  return out.str();
}

std::string render_csv_report(const ExperimentResult& result) {
  std::ostringstream out;
  out << "label,variant,sampler,features,segment,folds,mean_ndcg,mean_kendall,"
         "mean_spearman,failed\n";
  for (const ReportRow& row : result.rows) {
    out << row_label(row.spec) << ',' << to_string(row.spec.variant) << ','
        << sampler_column(row) << ',' << to_string(row.spec.features) << ','
        << to_string(row.spec.segment) << ',' << row.folds.size() << ','
        << format_double("%.17g", row.mean_ndcg) << ','
        << format_double("%.17g", row.mean_kendall) << ','
        << format_double("%.17g", row.mean_spearman) << ','
        << (row.failed ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace

nlohmann::ordered_json report_json(const ExperimentResult& result) {
  nlohmann::ordered_json doc;
  doc["fraction"] = result.fraction;
  doc["folds"] = result.folds;
  doc["seed"] = result.seed;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const ReportRow& row : result.rows) {
    nlohmann::ordered_json j;
    j["label"] = row_label(row.spec);
    j["variant"] = to_string(row.spec.variant);
    if (row.spec.variant == ModelVariant::kSiamese) {
      j["sampler"] = to_string(row.spec.sampler);
    } else {
      j["sampler"] = nullptr;
    }
    j["features"] = to_string(row.spec.features);
    j["segment"] = to_string(row.spec.segment);
    j["failed"] = row.failed;
    if (row.failed) {
      j["failure"] = row.failure;
      j["mean"] = nullptr;
    } else {
      j["failure"] = nullptr;
      j["mean"] = {{"ndcg", row.mean_ndcg},
                   {"kendall", row.mean_kendall},
                   {"spearman", row.mean_spearman}};
    }
    j["folds"] = nlohmann::ordered_json::array();
    for (const FoldResult& fr : row.folds) {
      j["folds"].push_back({{"fold", fr.fold},
                            {"margin", fr.margin},
                            {"w", fr.w},
                            {"mu", fr.mu},
                            {"validation_kendall", fr.validation_kendall},
                            {"ndcg", fr.ndcg},
                            {"kendall", fr.kendall},
                            {"spearman", fr.spearman}});
    }
    doc["rows"].push_back(std::move(j));
  }
  return doc;
}

std::string render_report(const ExperimentResult& result, ReportFormat format) {
  if (result.rows.empty()) fail("report needs at least one row");
  switch (format) {
    case ReportFormat::kText: return render_text_report(result);
    case ReportFormat::kCsv: return render_csv_report(result);
    case ReportFormat::kJson: return report_json(result).dump(2) + "\n";
  }
  fail("unknown report format");
}

std::vector<CsvRow> parse_report_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) fail("CSV report is empty");
  const std::string expected =
      "label,variant,sampler,features,segment,folds,mean_ndcg,mean_kendall,"
      "mean_spearman,failed";
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) fail("CSV header mismatch: '" + line + "'");

  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream split(line);
    while (std::getline(split, field, ',')) fields.push_back(field);
    if (fields.size() != 10) {
      fail("CSV line has " + std::to_string(fields.size()) + " fields, want 10");
    }
    CsvRow row;
    row.label = fields[0];
    row.variant = fields[1];
    row.sampler = fields[2];
    row.features = fields[3];
    row.segment = fields[4];
    row.folds = static_cast<std::size_t>(std::stoull(fields[5]));
    row.mean_ndcg = std::stod(fields[6]);
    row.mean_kendall = std::stod(fields[7]);
    row.mean_spearman = std::stod(fields[8]);
    if (fields[9] != "true" && fields[9] != "false") {
      fail("CSV failed flag must be true or false, got '" + fields[9] + "'");
    }
    row.failed = fields[9] == "true";
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json metric_report_json(const ExperimentResult& result,
                                          const ReportRow& row,
                                          const FoldResult& fold) {
  nlohmann::ordered_json j;
  j["row"] = row_label(row.spec);
  j["variant"] = to_string(row.spec.variant);
  if (row.spec.variant == ModelVariant::kSiamese) {
    j["sampler"] = to_string(row.spec.sampler);
  } else {
    j["sampler"] = nullptr;
  }
  j["features"] = to_string(row.spec.features);
  j["segment"] = to_string(row.spec.segment);
  j["fold"] = fold.fold;
  j["fraction"] = result.fraction;
  j["seed"] = result.seed;
  j["selected"] = {{"margin", fold.margin}, {"w", fold.w}, {"mu", fold.mu}};
  j["validation_kendall"] = fold.validation_kendall;
  j["metrics"] = {{"ndcg", fold.ndcg},
                  {"kendall", fold.kendall},
                  {"spearman", fold.spearman}};
  return j;
}

std::vector<std::string> write_metric_reports(const std::string& dir,
                                              const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> paths;
  for (const ReportRow& row : result.rows) {
    for (const FoldResult& fold : row.folds) {
      const fs::path path = fs::path(dir) / (row_label(row.spec) + ".fold" +
                                             std::to_string(fold.fold) + ".json");
      std::ofstream out(path, std::ios::trunc);
      if (!out) fail("cannot write metric report '" + path.string() + "'");
      out << metric_report_json(result, row, fold).dump(2) << '\n';
      paths.push_back(path.string());
    }
  }
  return paths;
}

}  // namespace hitrank

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hitrank/audio.hpp"
#include "hitrank/data.hpp"
#include "hitrank/model.hpp"

namespace hitrank {

enum class ModelVariant { kSimple, kSiamese };
enum class SamplerKind { kNaive, kAb, kArtist, kAbArtist };
enum class FeatureSet { kAudio, kAudioTag };

std::string to_string(ModelVariant v);
std::string to_string(SamplerKind s);
std::string to_string(FeatureSet f);
ModelVariant model_variant_from_string(const std::string& name);
SamplerKind sampler_kind_from_string(const std::string& name);
FeatureSet feature_set_from_string(const std::string& name);

/// One table row to produce: a model variant, its pair sampler (meaningful
/// only for the siamese variant), the feature set, and which 30 s segment
/// the cached features were cut with.
struct RowSpec {
  ModelVariant variant = ModelVariant::kSimple;
  SamplerKind sampler = SamplerKind::kNaive;
  FeatureSet features = FeatureSet::kAudio;
  SegmentStrategy segment = SegmentStrategy::kMid30;
};

/// Stable display name, e.g. "siamese-ab-audio+tags".
std::string row_label(const RowSpec& spec);

/// Inverse of row_label: "variant[-sampler]-features[-hl30]".
RowSpec row_spec_from_label(const std::string& label);

/// Hyper-parameter grid searched per fold on validation Kendall within the
/// top fraction. Margins are in standardized target units. Values outside
/// a cell's reach collapse: the margin and w axes matter only for the
/// siamese variant and mu only when the row uses tags, so inert axes
/// shrink to a single placeholder value.
struct GridSpec {
  std::vector<double> margins = {0.01, 0.05, 0.1};
  std::vector<double> ws = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> mus = {0.0, 0.25, 0.5, 0.75, 1.0};
};

/// Which audio-network size to build. The full-size network expects
/// 128 x 321 log-mel inputs; the compact one is shaped from the data and
/// suits the low-resolution synthetic features.
enum class RaterScale { kCompact, kStandard };

/// Metric the grid search maximizes on the validation fold.
enum class SelectionMetric { kKendall, kNdcg, kSpearman };

struct ExperimentConfig {
  /// JSON Lines manifest; empty means generate `synth` instead.
  std::string manifest;
  SynthSpec synth;
  /// Directory holding feature caches named <song id>.<strategy>.hrfc.
  std::string cache_dir;

  std::vector<RowSpec> rows;
  GridSpec grid;
  TrainOptions train;
  RaterScale scale = RaterScale::kCompact;
  std::size_t pair_count = 3000;
  std::size_t top_k = 15000;
  std::size_t folds = 10;
  double fraction = 0.10;
  SelectionMetric selection = SelectionMetric::kKendall;
  std::uint64_t seed = 0;

  /// Optional progress sink; called with one line per completed fold.
  std::function<void(const std::string&)> progress;
};

/// Outcome of one cross-validation iteration: the grid point that won on
/// the validation fold and the held-out metrics it scored. Correlation
/// metrics degenerate to 0 when a model predicts a constant.
struct FoldResult {
  std::size_t fold = 0;
  double margin = 0.0;
  double w = 0.0;
  double mu = 0.0;
  double validation_kendall = 0.0;
  double ndcg = 0.0;
  double kendall = 0.0;
  double spearman = 0.0;
};

struct ReportRow {
  RowSpec spec;
  std::vector<FoldResult> folds;
  bool failed = false;
  std::string failure;
  double mean_ndcg = 0.0;
  double mean_kendall = 0.0;
  double mean_spearman = 0.0;
};

struct ExperimentResult {
  std::vector<ReportRow> rows;
  double fraction = 0.10;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
};

/// Sorts row specs into the report's fixed grouping: simple before
/// siamese, samplers naive / ab / artist / ab+artist, audio before
/// audio+tags, mid-30 before highlight.
void sort_rows(std::vector<RowSpec>& rows);

/// Fills features for every record that lacks an in-memory matrix:
/// <cache_dir>/<id>.<strategy>.hrfc when present, else the record's
/// feature path (relative paths resolve against cache_dir). The cache
/// entry's song id and segment strategy must match.
void load_features(std::vector<SongRecord>& records, SegmentStrategy strategy,
                   const std::string& cache_dir);

/// Runs every row over `folds` cross-validation iterations. Per fold each
/// grid cell trains on the training folds, the cell with the best
/// validation Kendall is kept, and only that model touches the test fold
/// (through TestFold::evaluate). A diverging cell marks the row failed and
/// the run continues with the next row.
ExperimentResult run_experiment(const ExperimentConfig& config);

enum class ReportFormat { kText, kCsv, kJson };

std::string render_report(const ExperimentResult& result, ReportFormat format);

/// Full report as JSON (also what render_report(kJson) serializes);
/// matches schemas/report.schema.json.
nlohmann::ordered_json report_json(const ExperimentResult& result);

/// The aggregate fields a CSV line carries, for numeric round-trips.
struct CsvRow {
  std::string label;
  std::string variant;
  std::string sampler;
  std::string features;
  std::string segment;
  std::size_t folds = 0;
  double mean_ndcg = 0.0;
  double mean_kendall = 0.0;
  double mean_spearman = 0.0;
  bool failed = false;
};

std::vector<CsvRow> parse_report_csv(const std::string& csv);

/// Per-(row, fold) metric record for artifact output.
nlohmann::ordered_json metric_report_json(const ExperimentResult& result,
                                          const ReportRow& row,
                                          const FoldResult& fold);

/// Writes one MetricReport JSON file per (row, fold) into `dir`, named
/// <row label>.fold<k>.json. Returns the written paths.
std::vector<std::string> write_metric_reports(const std::string& dir,
                                              const ExperimentResult& result);

}  // namespace hitrank

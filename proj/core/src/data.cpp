#include "hitrank/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "hitrank/rng.hpp"

namespace hitrank {
namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument("data: " + what);
}

// A manifest tag vector is a fixed-width activation profile.
constexpr std::size_t kTagWidth = 50;

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::chrono::sys_days parse_date(const std::string& iso) {
  const auto digit = [&](std::size_t i) {
    return i < iso.size() && std::isdigit(static_cast<unsigned char>(iso[i]));
  };
  bool shaped = iso.size() == 10 && iso[4] == '-' && iso[7] == '-';
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) shaped = shaped && digit(i);
  if (!shaped) fail("date '" + iso + "' is not YYYY-MM-DD");

  const int y = std::stoi(iso.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(iso.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(iso.substr(8, 2)));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) fail("date '" + iso + "' is not a real calendar day");
  return std::chrono::sys_days{ymd};
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

double hit_score(const SongRecord& record) {
  if (record.playcounts.size() <= kHitScoreDay) {
    fail("song '" + record.id + "' has " + std::to_string(record.playcounts.size()) +
         " playcount days; hit score needs " + std::to_string(kHitScoreDay + 1));
  }
  return record.playcounts[kHitScoreDay];
}

std::vector<std::size_t> eligible_ids(const std::vector<SongRecord>& records,
                                      std::vector<Exclusion>* excluded) {
  std::vector<std::size_t> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].playcounts.size() > kHitScoreDay) {
      out.push_back(i);
    } else if (excluded != nullptr) {
      excluded->push_back({records[i].id,
                           "playcount series has " +
                               std::to_string(records[i].playcounts.size()) +
                               " days; needs " + std::to_string(kHitScoreDay + 1)});
    }
  }
  return out;
}

TopSelection select_top(const std::vector<SongRecord>& records, std::size_t k,
                        std::vector<Exclusion>* excluded) {
  if (k == 0) fail("select_top needs k >= 1");
  TopSelection sel;
  sel.ids = eligible_ids(records, excluded);
  std::sort(sel.ids.begin(), sel.ids.end(), [&](std::size_t a, std::size_t b) {
    const double sa = records[a].playcounts[kHitScoreDay];
    const double sb = records[b].playcounts[kHitScoreDay];
    if (sa != sb) return sa > sb;
    return records[a].id < records[b].id;
  });
  if (sel.ids.size() < k) {
    sel.short_of_k = true;
  } else {
    sel.ids.resize(k);
  }
  return sel;
}

RankedEval TestFold::evaluate(
    const std::function<double(std::size_t)>& truth,
    const std::function<std::vector<double>(const std::vector<std::size_t>&)>& predict,
    double fraction) const {
  if (positions_.empty()) fail("evaluate on an empty test fold");
  RankedEval eval;
  eval.fraction = fraction;
  eval.true_scores.reserve(positions_.size());
  for (std::size_t p : positions_) eval.true_scores.push_back(truth(p));
  eval.predicted = predict(positions_);
  if (eval.predicted.size() != positions_.size()) {
    fail("predictor returned " + std::to_string(eval.predicted.size()) +
         " scores for " + std::to_string(positions_.size()) + " songs");
  }
  return eval;
}

SplitPlan SplitPlan::make(std::size_t count, std::uint64_t seed, std::size_t folds) {
  if (folds < 3) fail("cross-validation needs >= 3 folds (train/validation/test)");
  if (count < folds) fail("cannot split " + std::to_string(count) + " songs into " +
                          std::to_string(folds) + " folds");
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  Rng rng(seed);
  shuffle(order, rng);

  SplitPlan plan;
  plan.fold_size_ = count / folds;
  plan.folds_.resize(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const auto begin = order.begin() + static_cast<std::ptrdiff_t>(f * plan.fold_size_);
    plan.folds_[f].assign(begin, begin + static_cast<std::ptrdiff_t>(plan.fold_size_));
  }
  return plan;
}

std::vector<std::size_t> SplitPlan::train_ids(std::size_t iteration) const {
  if (iteration >= folds_.size()) fail("fold iteration out of range");
  const std::size_t val = (iteration + 1) % folds_.size();
  std::vector<std::size_t> out;
  out.reserve(fold_size_ * (folds_.size() - 2));
  for (std::size_t f = 0; f < folds_.size(); ++f) {
    if (f == iteration || f == val) continue;
    out.insert(out.end(), folds_[f].begin(), folds_[f].end());
  }
  return out;
}

std::vector<std::size_t> SplitPlan::validation_ids(std::size_t iteration) const {
  if (iteration >= folds_.size()) fail("fold iteration out of range");
  return folds_[(iteration + 1) % folds_.size()];
}

TestFold SplitPlan::test_fold(std::size_t iteration) const {
  if (iteration >= folds_.size()) fail("fold iteration out of range");
  TestFold fold;
  fold.positions_ = folds_[iteration];
  return fold;
}

namespace {

void check_synth_spec(const SynthSpec& spec) {
  if (spec.n == 0) fail("synthetic corpus needs n >= 1");
  if (spec.n_artists == 0) fail("synthetic corpus needs n_artists >= 1");
  if (spec.latent_dim == 0) fail("synthetic corpus needs latent_dim >= 1");
  if (spec.audio_dims == 0 || spec.audio_dims > spec.latent_dim) {
    fail("audio_dims must be in [1, latent_dim]");
  }
  if (spec.tag_count == 0) fail("synthetic corpus needs tag_count >= 1");
  if (spec.days <= kHitScoreDay) {
    fail("synthetic corpus needs days > " + std::to_string(kHitScoreDay));
  }
  if (spec.bins == 0 || spec.frames == 0) fail("feature shape must be nonzero");
  if (spec.release_spread_days == 0) fail("release_spread_days must be >= 1");
  if (!(spec.tilt > 0.0)) fail("tilt must be positive");
  if (spec.luck_noise < 0.0) fail("luck_noise must be nonnegative");
  if (spec.artist_weight < 0.0 || spec.song_weight < 0.0) {
    fail("latent mix weights must be nonnegative");
  }
  if (spec.artist_weight == 0.0 && spec.song_weight == 0.0) {
    fail("latent mix weights cannot both be zero");
  }
}

}  // namespace

SynthCorpus synth_longtail(const SynthSpec& spec) {
  check_synth_spec(spec);
  Rng rng(spec.seed);
  const std::size_t L = spec.latent_dim;

  // Planted unit map: t = w . z decides the eventual ranking.
  std::vector<double> w(L);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& wi : w) {
      wi = normal(rng);
      norm2 += wi * wi;
    }
  } while (norm2 == 0.0);
  const double inv_norm = 1.0 / std::sqrt(norm2);
  for (double& wi : w) wi *= inv_norm;

  std::vector<std::vector<double>> artist_latents(spec.n_artists,
                                                  std::vector<double>(L));
  for (auto& u : artist_latents) {
    for (double& ui : u) ui = normal(rng);
  }

  std::vector<std::vector<double>> tag_map(spec.tag_count, std::vector<double>(L));
  for (auto& row : tag_map) {
    for (double& c : row) c = normal(rng);
  }

  SynthCorpus corpus;
  corpus.records.resize(spec.n);
  corpus.true_scores.resize(spec.n);
  corpus.oracle_scores.resize(spec.n);

  const std::chrono::sys_days base =
      parse_date("2017-01-01");
  std::vector<double> z(L);
  std::vector<double> scale(spec.n);
  std::vector<std::size_t> offset(spec.n);
  std::vector<double> burst(spec.n);
  const double tag_scale = 1.0 / std::sqrt(static_cast<double>(L));

  for (std::size_t i = 0; i < spec.n; ++i) {
    SongRecord& rec = corpus.records[i];
    const std::size_t artist = uniform_index(rng, spec.n_artists);
    const std::vector<double>& u = artist_latents[artist];
    double t = 0.0;
    for (std::size_t d = 0; d < L; ++d) {
      z[d] = spec.artist_weight * u[d] + spec.song_weight * normal(rng);
      t += w[d] * z[d];
    }
    offset[i] = uniform_index(rng, spec.release_spread_days);
    burst[i] = uniform(rng, 0.5, 3.0);
    // Luck is drawn only when enabled so luck_noise = 0 replays the exact
    // generator stream of a luck-free corpus.
    const double luck =
        spec.luck_noise > 0.0 ? spec.luck_noise * std::abs(normal(rng)) : 0.0;
    scale[i] = std::exp(spec.tilt * softplus(t)) + luck;
    corpus.oracle_scores[i] = t;

    Tensor features({spec.bins, spec.frames});
    for (std::size_t b = 0; b < spec.bins; ++b) {
      for (std::size_t f = 0; f < spec.frames; ++f) {
        double v = 0.0;
        for (std::size_t d = 0; d < spec.audio_dims; ++d) {
          const double p = static_cast<double>(d % 4 + 1);
          const double q = static_cast<double>(d / 4 + 1);
          const double pattern =
              std::cos(3.14159265358979323846 * p * (static_cast<double>(b) + 0.5) /
                       static_cast<double>(spec.bins)) *
              std::cos(3.14159265358979323846 * q * (static_cast<double>(f) + 0.5) /
                       static_cast<double>(spec.frames));
          v += spec.signal_weight * z[d] * pattern;
        }
        features.at(b, f) = v + spec.feature_noise * normal(rng);
      }
    }
    rec.features = std::move(features);

    std::vector<double> tags(spec.tag_count);
    for (std::size_t k = 0; k < spec.tag_count; ++k) {
      double s = 0.0;
      for (std::size_t d = 0; d < L; ++d) s += tag_map[k][d] * z[d];
      tags[k] = sigmoid(s * tag_scale + spec.tag_noise * normal(rng));
    }
    rec.tags = std::move(tags);

    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "song-%06zu", i);
    rec.id = id_buf;
    std::snprintf(id_buf, sizeof id_buf, "artist-%05zu", artist);
    rec.artist_id = id_buf;
    rec.release_date = format_date(base + std::chrono::days(
                                              static_cast<int>(offset[i])));
  }

  // Raw daily series: the early burst decays to zero before day 30, so the
  // day-60 entry is the bare scale (content plus luck) and normalization
  // keeps ranks intact.
  std::vector<double> day_total(spec.release_spread_days + spec.days, 0.0);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t t = 0; t < spec.days; ++t) {
      const double ramp = std::max(0.0, 1.0 - static_cast<double>(t) / 30.0);
      const double raw =
          scale[i] * (1.0 + burst[i] * ramp * std::exp(-static_cast<double>(t) / 5.0));
      day_total[offset[i] + t] += raw;
    }
  }
  const double busiest = *std::max_element(day_total.begin(), day_total.end());

  for (std::size_t i = 0; i < spec.n; ++i) {
    std::vector<double>& series = corpus.records[i].playcounts;
    series.resize(spec.days);
    for (std::size_t t = 0; t < spec.days; ++t) {
      const double ramp = std::max(0.0, 1.0 - static_cast<double>(t) / 30.0);
      const double raw =
          scale[i] * (1.0 + burst[i] * ramp * std::exp(-static_cast<double>(t) / 5.0));
      series[t] = raw / busiest;
    }
    corpus.true_scores[i] = series[kHitScoreDay];
  }
  return corpus;
}

namespace {

nlohmann::ordered_json record_to_json(const SongRecord& rec) {
  nlohmann::ordered_json j;
  j["id"] = rec.id;
  j["artist_id"] = rec.artist_id;
  j["release_date"] = rec.release_date;
  j["playcounts"] = rec.playcounts;
  if (rec.tags) j["tags"] = *rec.tags;
  if (!rec.feature_path.empty()) j["feature"] = rec.feature_path;
  if (!rec.audio_path.empty()) j["audio"] = rec.audio_path;
  return j;
}

SongRecord record_from_json(const nlohmann::json& j, std::size_t line_no) {
  const std::string where = "manifest line " + std::to_string(line_no);
  if (!j.is_object()) fail(where + ": not a JSON object");
  static const std::unordered_set<std::string> known = {
      "id", "artist_id", "release_date", "playcounts", "tags", "feature", "audio"};
  for (const auto& item : j.items()) {
    if (known.find(item.key()) == known.end()) {
      fail(where + ": unknown field '" + item.key() + "'");
    }
  }
  for (const char* field : {"id", "artist_id", "release_date", "playcounts"}) {
    if (!j.contains(field)) fail(where + ": missing field '" + std::string(field) + "'");
  }

  SongRecord rec;
  try {
    rec.id = j.at("id").get<std::string>();
    rec.artist_id = j.at("artist_id").get<std::string>();
    rec.release_date = j.at("release_date").get<std::string>();
    rec.playcounts = j.at("playcounts").get<std::vector<double>>();
    if (j.contains("tags")) rec.tags = j.at("tags").get<std::vector<double>>();
    if (j.contains("feature")) rec.feature_path = j.at("feature").get<std::string>();
    if (j.contains("audio")) rec.audio_path = j.at("audio").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(where + ": " + e.what());
  }
  return rec;
}

}  // namespace

std::vector<SongRecord> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open manifest '" + path + "'");
  std::vector<SongRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(record_from_json(j, line_no));
  }
  validate_corpus(records);
  return records;
}

void write_manifest(const std::string& path, const std::vector<SongRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open manifest '" + path + "' for writing");
  for (const SongRecord& rec : records) {
    out << record_to_json(rec).dump() << '\n';
  }
  if (!out) fail("failed writing manifest '" + path + "'");
}

void validate_corpus(const std::vector<SongRecord>& records) {
  std::unordered_set<std::string> seen;
  seen.reserve(records.size());
  std::optional<std::pair<std::size_t, std::size_t>> feature_shape;

  std::vector<std::chrono::sys_days> dates(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SongRecord& rec = records[i];
    if (rec.id.empty()) fail("record " + std::to_string(i) + " has an empty id");
    if (!seen.insert(rec.id).second) fail("duplicate song id '" + rec.id + "'");
    if (rec.artist_id.empty()) fail("song '" + rec.id + "' has an empty artist id");
    dates[i] = parse_date(rec.release_date);

    for (double v : rec.playcounts) {
      if (!(v >= 0.0 && v <= 1.0)) {
        fail("song '" + rec.id + "' has a daily share outside [0, 1]");
      }
    }
    if (rec.tags) {
      if (rec.tags->size() != kTagWidth) {
        fail("song '" + rec.id + "' has " + std::to_string(rec.tags->size()) +
             " tags; a tag vector has exactly " + std::to_string(kTagWidth) +
             " entries");
      }
      for (double v : *rec.tags) {
        if (!(v >= 0.0 && v <= 1.0)) {
          fail("song '" + rec.id + "' has a tag activation outside [0, 1]");
        }
      }
    }
    if (rec.features) {
      if (rec.features->rank() != 2) {
        fail("song '" + rec.id + "' has features of rank " +
             std::to_string(rec.features->rank()) + "; expected a [bins, frames] matrix");
      }
      const auto shape = std::make_pair(rec.features->dim(0), rec.features->dim(1));
      if (feature_shape && shape != *feature_shape) {
        fail("song '" + rec.id + "' has a feature shape differing from earlier records");
      }
      feature_shape = shape;
      if (!rec.features->all_finite()) {
        fail("song '" + rec.id + "' has non-finite feature values");
      }
    }
  }
  if (records.empty()) return;

  const auto lo = *std::min_element(dates.begin(), dates.end());
  std::size_t span = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto day0 = static_cast<std::size_t>((dates[i] - lo).count());
    span = std::max(span, day0 + records[i].playcounts.size());
  }
  std::vector<double> day_total(span, 0.0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto day0 = static_cast<std::size_t>((dates[i] - lo).count());
    for (std::size_t t = 0; t < records[i].playcounts.size(); ++t) {
      day_total[day0 + t] += records[i].playcounts[t];
    }
  }
  for (std::size_t d = 0; d < span; ++d) {
    if (day_total[d] > 1.0 + 1e-6) {
      fail("calendar day " + format_date(lo + std::chrono::days(static_cast<int>(d))) +
           " has total share " + std::to_string(day_total[d]) + " > 1");
    }
  }
}

}  // namespace hitrank

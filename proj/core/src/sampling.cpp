#include "hitrank/sampling.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "hitrank/rng.hpp"

namespace hitrank {

namespace {

std::uint64_t unordered_pairs(std::uint64_t n) { return n * (n - 1) / 2; }

/// Count of pairs with equal scores, summed over equal-value groups.
std::uint64_t tied_pair_count(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::uint64_t total = 0;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j + 1 < values.size() && values[j + 1] == values[i]) ++j;
    const std::uint64_t g = j - i + 1;
    total += g * (g - 1) / 2;
    i = j + 1;
  }
  return total;
}

void reject_pair_count(const char* sampler, std::size_t requested,
                       std::uint64_t maximum) {
  if (requested > maximum) {
    throw std::invalid_argument(
        std::string(sampler) + ": requested " + std::to_string(requested) +
        " pairs but the qualifying population holds " +
        std::to_string(maximum));
  }
}

void push_pair(PairBatch& batch, const std::vector<double>& scores,
               std::size_t i, std::size_t j) {
  batch.pairs.push_back(SampledPair{i, j});
  batch.yi.push_back(scores[i]);
  batch.yj.push_back(scores[j]);
}

}  // namespace

PairBatch naive_sample(const std::vector<double>& scores,
                       std::size_t pair_count, std::uint64_t seed,
                       SampleOptions opts) {
  const std::size_t n = scores.size();
  std::uint64_t maximum = unordered_pairs(n);
  if (opts.exclude_ties) maximum -= tied_pair_count(scores);
  reject_pair_count("naive_sample", pair_count, maximum);

  PairBatch batch;
  batch.sampler = "naive";
  batch.seed = seed;
  Rng rng(seed);
  std::unordered_set<std::uint64_t> seen;
  while (batch.pairs.size() < pair_count) {
    std::size_t i = static_cast<std::size_t>(uniform_index(rng, n));
    std::size_t j = i;
    while (j == i) j = static_cast<std::size_t>(uniform_index(rng, n));
    if (j < i) std::swap(i, j);
    if (opts.exclude_ties && scores[i] == scores[j]) continue;
    if (!seen.insert(static_cast<std::uint64_t>(i) * n + j).second) continue;
    push_pair(batch, scores, i, j);
  }
  return batch;
}

AbPartition ab_partition(const std::vector<double>& scores) {
  if (scores.empty()) {
    throw std::invalid_argument("ab_partition: empty training set");
  }
  double sum = 0.0;
  for (double s : scores) sum += s;
  AbPartition part;
  part.threshold = sum / static_cast<double>(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > part.threshold) {
      part.group_a.push_back(i);
    } else {
      part.group_b.push_back(i);
    }
  }
  return part;
}

PairBatch ab_sample(const std::vector<double>& scores,
                    const AbPartition& partition, std::size_t pair_count,
                    std::uint64_t seed, SampleOptions opts) {
  const std::vector<std::size_t>& a = partition.group_a;
  const std::vector<std::size_t>& b = partition.group_b;
  if (a.empty()) {
    throw std::invalid_argument(
        "ab_sample: group A is empty, every song sits at or below the mean");
  }
  const std::uint64_t count_aa = unordered_pairs(a.size());
  const std::uint64_t count_ab =
      static_cast<std::uint64_t>(a.size()) * b.size();
  std::uint64_t maximum = count_aa + count_ab;
  if (opts.exclude_ties) {
    std::vector<double> a_scores;
    a_scores.reserve(a.size());
    for (std::size_t id : a) a_scores.push_back(scores[id]);
    // A and B scores sit on opposite sides of the threshold, so ties can
    // only pair two A songs.
    maximum -= tied_pair_count(std::move(a_scores));
  }
  reject_pair_count("ab_sample", pair_count, maximum);

  PairBatch batch;
  batch.sampler = "ab";
  batch.seed = seed;
  Rng rng(seed);
  std::unordered_set<std::uint64_t> seen;
  const std::size_t n = scores.size();
  while (batch.pairs.size() < pair_count) {
    std::size_t i, j;
    if (uniform_index(rng, count_aa + count_ab) < count_aa) {
      std::size_t x = static_cast<std::size_t>(uniform_index(rng, a.size()));
      std::size_t y = x;
      while (y == x) {
        y = static_cast<std::size_t>(uniform_index(rng, a.size()));
      }
      i = a[x];
      j = a[y];
    } else {
      i = a[static_cast<std::size_t>(uniform_index(rng, a.size()))];
      j = b[static_cast<std::size_t>(uniform_index(rng, b.size()))];
    }
    if (j < i) std::swap(i, j);
    if (opts.exclude_ties && scores[i] == scores[j]) continue;
    if (!seen.insert(static_cast<std::uint64_t>(i) * n + j).second) continue;
    push_pair(batch, scores, i, j);
  }
  return batch;
}

PairBatch artist_sample(const std::vector<double>& scores,
                        const std::vector<std::string>& artist_ids,
                        std::size_t pair_count, std::uint64_t seed,
                        SampleOptions opts) {
  if (scores.size() != artist_ids.size()) {
    throw std::invalid_argument(
        "artist_sample: scores and artist ids differ in length");
  }
  std::unordered_map<std::string, std::vector<std::size_t>> by_artist;
  std::vector<std::string> artist_order;
  for (std::size_t i = 0; i < artist_ids.size(); ++i) {
    auto [it, inserted] = by_artist.try_emplace(artist_ids[i]);
    if (inserted) artist_order.push_back(artist_ids[i]);
    it->second.push_back(i);
  }

  std::vector<SampledPair> population;
  for (const std::string& artist : artist_order) {
    const std::vector<std::size_t>& songs = by_artist[artist];
    for (std::size_t x = 0; x < songs.size(); ++x) {
      for (std::size_t y = x + 1; y < songs.size(); ++y) {
        if (opts.exclude_ties && scores[songs[x]] == scores[songs[y]]) {
          continue;
        }
        population.push_back(SampledPair{songs[x], songs[y]});
      }
    }
  }
  if (population.empty()) {
    throw std::invalid_argument(
        "artist_sample: no qualifying same-artist pairs");
  }

  PairBatch batch;
  batch.sampler = "artist";
  batch.seed = seed;
  Rng rng(seed);
  shuffle(population, rng);
  const std::size_t take = std::min(pair_count, population.size());
  for (std::size_t k = 0; k < take; ++k) {
    push_pair(batch, scores, population[k].i, population[k].j);
  }
  return batch;
}

std::vector<double> fuse_scores(const std::vector<double>& a,
                                const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("fuse_scores: length mismatch");
  }
  std::vector<double> fused(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) fused[i] = (a[i] + b[i]) / 2.0;
  return fused;
}

void write_pair_batch(std::ostream& out, const PairBatch& batch) {
  out << "# sampler=" << batch.sampler << " seed=" << batch.seed
      << " p=" << batch.pairs.size() << "\n";
  for (const SampledPair& p : batch.pairs) {
    out << p.i << "," << p.j << "\n";
  }
  if (!out) throw std::runtime_error("write_pair_batch: write failure");
}

PairBatch read_pair_batch(std::istream& in,
                          const std::vector<double>& scores) {
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("read_pair_batch: empty input");
  }
  PairBatch batch;
  std::size_t declared = 0;
  {
    std::istringstream hs(header);
    std::string hash, token;
    hs >> hash;
    if (hash != "#") {
      throw std::runtime_error("read_pair_batch: malformed header");
    }
    bool have_sampler = false, have_seed = false, have_count = false;
    while (hs >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error("read_pair_batch: malformed header field");
      }
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "sampler") {
        batch.sampler = value;
        have_sampler = true;
      } else if (key == "seed") {
        batch.seed = std::stoull(value);
        have_seed = true;
      } else if (key == "p") {
        declared = std::stoull(value);
        have_count = true;
      }
    }
    if (!have_sampler || !have_seed || !have_count) {
      throw std::runtime_error("read_pair_batch: incomplete header");
    }
  }

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("read_pair_batch: malformed pair line: " +
                               line);
    }
    const std::size_t i = std::stoull(line.substr(0, comma));
    const std::size_t j = std::stoull(line.substr(comma + 1));
    if (i >= j || j >= scores.size()) {
      throw std::runtime_error("read_pair_batch: pair out of range: " + line);
    }
    push_pair(batch, scores, i, j);
  }
  if (batch.pairs.size() != declared) {
    throw std::runtime_error("read_pair_batch: header declares " +
                             std::to_string(declared) + " pairs, found " +
                             std::to_string(batch.pairs.size()));
  }
  return batch;
}

}  // namespace hitrank

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hitrank {

/// Unordered song pair, stored with i < j. Orientation carries no
/// information; the ranking loss orients each pair from its scores.
struct SampledPair {
  std::size_t i = 0;
  std::size_t j = 0;
};

/// One sampled set of training pairs with the hit scores aligned to it.
/// Pairs are distinct as unordered pairs and i != j throughout.
struct PairBatch {
  std::string sampler;
  std::uint64_t seed = 0;
  std::vector<SampledPair> pairs;
  std::vector<double> yi;
  std::vector<double> yj;
};

struct SampleOptions {
  /// Drop candidate pairs with y_i == y_j.
  bool exclude_ties = false;
};

/// Training-set split at the mean hit score: group A holds the songs
/// scoring strictly above the mean, group B the rest. Both id lists are
/// in ascending index order.
struct AbPartition {
  double threshold = 0.0;
  std::vector<std::size_t> group_a;
  std::vector<std::size_t> group_b;
};

/// `pair_count` distinct unordered pairs drawn uniformly from all
/// n*(n-1)/2 pairs (song-level repetition allowed). Rejects a pair count
/// above the qualifying population.
PairBatch naive_sample(const std::vector<double>& scores,
                       std::size_t pair_count, std::uint64_t seed,
                       SampleOptions opts = {});

AbPartition ab_partition(const std::vector<double>& scores);

/// Uniform over pairs touching group A (A-A or A-B). Rejects an empty A
/// and a pair count above the qualifying population.
PairBatch ab_sample(const std::vector<double>& scores,
                    const AbPartition& partition, std::size_t pair_count,
                    std::uint64_t seed, SampleOptions opts = {});

/// Uniform over same-artist pairs. Songs whose artist has a single song
/// contribute nothing. Ties are excluded by default here because same
/// artist often means same score in practice. A pair count above the
/// qualifying population exhausts it (every qualifying pair, once)
/// instead of failing; zero qualifying pairs is an error.
PairBatch artist_sample(const std::vector<double>& scores,
                        const std::vector<std::string>& artist_ids,
                        std::size_t pair_count, std::uint64_t seed,
                        SampleOptions opts = {.exclude_ties = true});

/// Elementwise mean of two aligned per-song score vectors.
std::vector<double> fuse_scores(const std::vector<double>& a,
                                const std::vector<double>& b);

/// Text form: `# sampler=<name> seed=<seed> p=<count>` then one `i,j`
/// line per pair.
void write_pair_batch(std::ostream& out, const PairBatch& batch);

/// Reads the text form back, resolving y values from `scores`.
PairBatch read_pair_batch(std::istream& in, const std::vector<double>& scores);

}  // namespace hitrank

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace hitrank {

/// Aligned true/predicted score vectors for one evaluation set, plus the
/// top fraction (by true score) the metrics are restricted to.
struct RankedEval {
  std::vector<double> true_scores;
  std::vector<double> predicted;
  double fraction = 0.10;
};

/// Indices of the ceil(fraction * n) songs with the highest true score,
/// in ascending index order. Boundary ties keep the earlier index.
std::vector<std::size_t> top_fraction_subset(const RankedEval& eval);

/// kWithinSubset ranks only the true-top-fraction songs against each other.
/// kTruncatedFull ranks the whole set by prediction and scores the first
/// ceil(fraction * n) positions. The first is the reported default; the
/// second is kept selectable because the two disagree whenever predictions
/// pull tail songs into the top positions.
enum class NdcgMode {
  kWithinSubset,
  kTruncatedFull,
};

/// Normalized discounted cumulative gain with linear gain (relevance = raw
/// true score) and log2(k+1) discount. All-zero relevance yields 1.
double ndcg(const RankedEval& eval, NdcgMode mode = NdcgMode::kWithinSubset);

/// Tie-corrected Kendall tau-b over the top-fraction subset. Zero variance
/// in either ranking leaves tau undefined (empty optional).
std::optional<double> kendall_tau(const RankedEval& eval);

/// Spearman rho over the top-fraction subset: Pearson correlation of
/// mid-ranks (ties get averaged ranks). Zero rank variance -> empty.
std::optional<double> spearman_rho(const RankedEval& eval);

}  // namespace hitrank

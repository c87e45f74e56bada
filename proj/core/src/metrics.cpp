#include "hitrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace hitrank {

namespace {

std::size_t subset_size(const RankedEval& eval) {
  const auto n = static_cast<double>(eval.true_scores.size());
  return static_cast<std::size_t>(std::ceil(eval.fraction * n));
}

void validate(const RankedEval& eval) {
  if (eval.true_scores.size() != eval.predicted.size()) {
    throw std::invalid_argument("RankedEval: score vectors differ in length");
  }
  if (eval.true_scores.size() < 2) {
    throw std::invalid_argument("RankedEval: needs at least 2 songs");
  }
  if (!(eval.fraction > 0.0) || eval.fraction > 1.0) {
    throw std::invalid_argument("RankedEval: fraction must be in (0, 1]");
  }
  if (subset_size(eval) < 2) {
    throw std::invalid_argument(
        "RankedEval: fraction keeps fewer than 2 songs");
  }
}

/// Indices 0..n-1 ordered by scores[i] descending, equal scores keeping
/// ascending index order.
std::vector<std::size_t> order_desc(const std::vector<double>& scores,
                                    const std::vector<std::size_t>& subset) {
  std::vector<std::size_t> order = subset;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

double dcg(const std::vector<double>& relevance) {
  double acc = 0.0;
  for (std::size_t k = 0; k < relevance.size(); ++k) {
    acc += relevance[k] / std::log2(static_cast<double>(k) + 2.0);
  }
  return acc;
}

/// Mid-ranks (1-based, ties averaged) of the given values.
std::vector<double> mid_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return values[a] < values[b];
                   });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

/// Number of inversions in `values`, counted by merge sort.
std::uint64_t count_inversions(std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> scratch(n);
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (values[b] < values[a]) {
          swaps += mid - a;
          scratch[out++] = values[b++];
        } else {
          scratch[out++] = values[a++];
        }
      }
      while (a < mid) scratch[out++] = values[a++];
      while (b < hi) scratch[out++] = values[b++];
      std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
                scratch.begin() + static_cast<std::ptrdiff_t>(hi),
                values.begin() + static_cast<std::ptrdiff_t>(lo));
    }
  }
  return swaps;
}

/// Sum over runs of equal keys of g*(g-1)/2. `order` must already group
/// equal keys contiguously.
template <typename Same>
std::uint64_t tied_pairs(std::size_t n, Same same) {
  std::uint64_t total = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && same(j, j + 1)) ++j;
    const std::uint64_t g = j - i + 1;
    total += g * (g - 1) / 2;
    i = j + 1;
  }
  return total;
}

}  // namespace

std::vector<std::size_t> top_fraction_subset(const RankedEval& eval) {
  validate(eval);
  std::vector<std::size_t> order(eval.true_scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return eval.true_scores[a] > eval.true_scores[b];
                   });
  order.resize(subset_size(eval));
  std::sort(order.begin(), order.end());
  return order;
}

double ndcg(const RankedEval& eval, NdcgMode mode) {
  const std::vector<std::size_t> subset = top_fraction_subset(eval);
  const std::size_t k = subset.size();

  std::vector<std::size_t> ranked;
  if (mode == NdcgMode::kWithinSubset) {
    ranked = order_desc(eval.predicted, subset);
  } else {
    std::vector<std::size_t> all(eval.true_scores.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    ranked = order_desc(eval.predicted, all);
    ranked.resize(k);
  }

  std::vector<double> gains(k);
  for (std::size_t i = 0; i < k; ++i) gains[i] = eval.true_scores[ranked[i]];
  const double actual = dcg(gains);

  std::vector<double> ideal_gains(k);
  for (std::size_t i = 0; i < k; ++i) {
    ideal_gains[i] = eval.true_scores[subset[i]];
  }
  std::sort(ideal_gains.begin(), ideal_gains.end(), std::greater<>());
  const double ideal = dcg(ideal_gains);

  if (ideal == 0.0) return 1.0;
  return actual / ideal;
}

std::optional<double> kendall_tau(const RankedEval& eval) {
  const std::vector<std::size_t> subset = top_fraction_subset(eval);
  const std::size_t n = subset.size();

  std::vector<std::size_t> order = subset;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (eval.true_scores[a] != eval.true_scores[b]) {
                       return eval.true_scores[a] < eval.true_scores[b];
                     }
                     return eval.predicted[a] < eval.predicted[b];
                   });

  const std::uint64_t n0 =
      static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t n1 = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return eval.true_scores[order[a]] == eval.true_scores[order[b]];
  });
  const std::uint64_t n3 = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return eval.true_scores[order[a]] == eval.true_scores[order[b]] &&
           eval.predicted[order[a]] == eval.predicted[order[b]];
  });

  std::vector<double> pred(n);
  for (std::size_t i = 0; i < n; ++i) pred[i] = eval.predicted[order[i]];
  {
    std::vector<double> sorted_pred = pred;
    std::sort(sorted_pred.begin(), sorted_pred.end());
    // n2 needs equal predictions grouped contiguously regardless of the
    // true-score ordering above.
    std::uint64_t n2 = tied_pairs(n, [&](std::size_t a, std::size_t b) {
      return sorted_pred[a] == sorted_pred[b];
    });
    const std::uint64_t swaps = count_inversions(pred);
    if (n0 == n1 || n0 == n2) return std::nullopt;
    const double con_minus_dis =
        static_cast<double>(n0) - static_cast<double>(n1) -
        static_cast<double>(n2) + static_cast<double>(n3) -
        2.0 * static_cast<double>(swaps);
    const double denom = std::sqrt(static_cast<double>(n0 - n1)) *
                         std::sqrt(static_cast<double>(n0 - n2));
    return con_minus_dis / denom;
  }
}

std::optional<double> spearman_rho(const RankedEval& eval) {
  const std::vector<std::size_t> subset = top_fraction_subset(eval);
  const std::size_t n = subset.size();

  std::vector<double> t(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = eval.true_scores[subset[i]];
    p[i] = eval.predicted[subset[i]];
  }
  const std::vector<double> rt = mid_ranks(t);
  const std::vector<double> rp = mid_ranks(p);

  double sx = 0.0, sy = 0.0, sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += rt[i];
    sy += rp[i];
    sxy += rt[i] * rp[i];
    sxx += rt[i] * rt[i];
    syy += rp[i] * rp[i];
  }
  const double dn = static_cast<double>(n);
  const double cov = dn * sxy - sx * sy;
  const double vx = dn * sxx - sx * sx;
  const double vy = dn * syy - sy * sy;
  if (vx <= 0.0 || vy <= 0.0) return std::nullopt;
  return cov / (std::sqrt(vx) * std::sqrt(vy));
}

}  // namespace hitrank

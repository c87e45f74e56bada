// Microbenchmarks for the hot paths: the convolutional forward/backward
// pass, the mel feature pipeline, and the pair samplers. Run with
// ./hitrank_benchmarks [--benchmark_filter=...].

#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "hitrank/audio.hpp"
#include "hitrank/autodiff.hpp"
#include "hitrank/mel.hpp"
#include "hitrank/model.hpp"
#include "hitrank/rng.hpp"
#include "hitrank/sampling.hpp"
#include "hitrank/tensor.hpp"

namespace {

using namespace hitrank;

Tensor random_tensor(const std::vector<std::size_t>& shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform(rng, -1.0, 1.0);
  return t;
}

// Forward pass of the compact audio network on one batch.
void BM_RaterForward(benchmark::State& state) {
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  HybridRater rater(RaterConfig::compact(32, 16), std::nullopt, 0.0, 1);
  const Tensor feats = random_tensor({batch, 1, 32, 16}, 2);
  for (auto _ : state) {
    Tape tape;
    Var scores = rater.score_on(tape, feats, nullptr);
    benchmark::DoNotOptimize(tape.value(scores));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_RaterForward)->Arg(1)->Arg(8)->Arg(32);

// Full forward + backward step through the scoring graph and MSE loss.
void BM_RaterTrainStep(benchmark::State& state) {
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  HybridRater rater(RaterConfig::compact(32, 16), std::nullopt, 0.0, 1);
  const Tensor feats = random_tensor({batch, 1, 32, 16}, 2);
  Tensor targets({batch});
  for (std::size_t i = 0; i < batch; ++i) targets[i] = 0.1 * static_cast<double>(i);
  for (auto _ : state) {
    Tape tape;
    Var loss = tape.mse(rater.score_on(tape, feats, nullptr), targets);
    tape.backward(loss);
    benchmark::DoNotOptimize(rater.params()[0].grad[0]);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_RaterTrainStep)->Arg(8)->Arg(32);

// STFT + filterbank projection for one 30 s clip.
void BM_MelPipeline(benchmark::State& state) {
  AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.resize(30 * clip.sample_rate);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = std::sin(0.285 * static_cast<double>(i));
  }
  const MelFilterbank bank;
  for (auto _ : state) {
    const MelSpectrogram mel = mel_project(stft_magnitude(clip), bank);
    benchmark::DoNotOptimize(mel.values[0]);
  }
}
BENCHMARK(BM_MelPipeline)->Unit(benchmark::kMillisecond);

std::vector<double> bench_scores(std::size_t n) {
  Rng rng(11);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = std::exp(2.0 * normal(rng));
  }
  return scores;
}

void BM_NaiveSampler(benchmark::State& state) {
  const std::vector<double> scores = bench_scores(12000);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const PairBatch batch = naive_sample(scores, 3000, ++seed);
    benchmark::DoNotOptimize(batch.pairs.size());
  }
}
BENCHMARK(BM_NaiveSampler)->Unit(benchmark::kMicrosecond);

void BM_AbSampler(benchmark::State& state) {
  const std::vector<double> scores = bench_scores(12000);
  const AbPartition part = ab_partition(scores);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const PairBatch batch = ab_sample(scores, part, 3000, ++seed);
    benchmark::DoNotOptimize(batch.pairs.size());
  }
}
BENCHMARK(BM_AbSampler)->Unit(benchmark::kMicrosecond);

void BM_ArtistSampler(benchmark::State& state) {
  const std::size_t n = 12000;
  const std::vector<double> scores = bench_scores(n);
  std::vector<std::string> artists(n);
  for (std::size_t i = 0; i < n; ++i) {
    artists[i] = "artist-" + std::to_string(i / 10);
  }
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const PairBatch batch = artist_sample(scores, artists, 3000, ++seed);
    benchmark::DoNotOptimize(batch.pairs.size());
  }
}
BENCHMARK(BM_ArtistSampler)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "hitrank/audio.hpp"
#include "hitrank/mel.hpp"
#include "hitrank/rng.hpp"
#include "hitrank/tensor.hpp"
#include "support/oracles.hpp"

using hitrank::AudioClip;
using hitrank::MelFilterbank;
using hitrank::MelSpectrogram;
using hitrank::Tensor;

TEST_SUITE_BEGIN("mel");

namespace {

constexpr double kPi = 3.14159265358979323846;

AudioClip sine_clip(double hz, double seconds, double amplitude = 0.5,
                    std::size_t rate = 22050) {
  AudioClip clip;
  clip.sample_rate = rate;
  const auto n = static_cast<std::size_t>(seconds * static_cast<double>(rate));
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    clip.samples[i] = amplitude * std::sin(2.0 * kPi * hz *
                                           static_cast<double>(i) /
                                           static_cast<double>(rate));
  }
  return clip;
}

std::size_t row_argmax(const Tensor& m, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < m.dim(1); ++j) {
    if (m.at(row, j) > m.at(row, best)) best = j;
  }
  return best;
}

}  // namespace

TEST_CASE("hamming window has the textbook shape") {
  const auto w = hitrank::hamming_window(5);
  REQUIRE(w.size() == 5);
  CHECK(w[0] == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(w[4] == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(w[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(w[3]).epsilon(1e-12));  // symmetric
}

TEST_CASE("thirty seconds at 22050 Hz give exactly 321 frames") {
  AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(661500, 0.1);
  const Tensor mag = hitrank::stft_magnitude(clip);
  CHECK(mag.dim(0) == 321);
  CHECK(mag.dim(1) == 2049);
}

TEST_CASE("frame count follows the hop formula at any length") {
  hitrank::Rng rng(14);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t len =
        4096 + static_cast<std::size_t>(hitrank::uniform_index(rng, 60000));
    AudioClip clip;
    clip.samples.assign(len, 0.01);
    const Tensor mag = hitrank::stft_magnitude(clip);
    CHECK(mag.dim(0) == (len - 4096) / 2048 + 1);
  }
}

TEST_CASE("clips shorter than one window are rejected") {
  AudioClip clip;
  clip.samples.assign(4095, 0.1);
  CHECK_THROWS_AS(hitrank::stft_magnitude(clip), hitrank::ClipTooShortError);
}

TEST_CASE("silence transforms to zero magnitudes") {
  AudioClip clip;
  clip.samples.assign(10000, 0.0);
  const Tensor mag = hitrank::stft_magnitude(clip);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    CHECK(mag[i] == 0.0);
  }
}

TEST_CASE("a 1 kHz tone peaks at the bin the transform definition picks") {
  const AudioClip clip = sine_clip(1000.0, 2.0);
  const Tensor mag = hitrank::stft_magnitude(clip);

  // 1000 Hz maps to bin 1000 * 4096 / 22050, nearest integer 186.
  CHECK(row_argmax(mag, 0) == 186);

  // Cross-check the first frame against a direct one-bin transform.
  const std::vector<double> frame(clip.samples.begin(),
                                  clip.samples.begin() + 4096);
  std::size_t oracle_best = 180;
  for (std::size_t bin = 180; bin <= 192; ++bin) {
    const double want = oracle::dft_bin_magnitude(frame, bin);
    const double got = mag.at(0, bin);
    CHECK(std::abs(got - want) <= 1e-6 * std::max(1.0, want));
    if (want > oracle::dft_bin_magnitude(frame, oracle_best)) {
      oracle_best = bin;
    }
  }
  CHECK(oracle_best == 186);
}

TEST_CASE("zero spectra land on the uniform log floor") {
  const MelFilterbank bank(16, 256, 22050.0, 0.0, 11025.0);
  const Tensor mag({3, 129});
  const MelSpectrogram mel = hitrank::mel_project(mag, bank);
  CHECK(mel.bins() == 16);
  CHECK(mel.frames() == 3);
  const double floor = std::log(1e-10);
  for (std::size_t i = 0; i < mel.values.size(); ++i) {
    CHECK(mel.values[i] == doctest::Approx(floor).epsilon(1e-12));
  }
}

TEST_CASE("filter rows are positive unimodal triangles") {
  const MelFilterbank bank(128, 4096, 22050.0, 0.0, 11025.0);
  const Tensor& w = bank.weights();
  REQUIRE(w.dim(0) == 128);
  REQUIRE(w.dim(1) == 2049);
  for (std::size_t m = 0; m < 128; ++m) {
    double sum = 0.0;
    double peak = 0.0;
    std::size_t first = 2049, last = 0;
    for (std::size_t j = 0; j < 2049; ++j) {
      const double v = w.at(m, j);
      REQUIRE(v >= 0.0);
      sum += v;
      peak = std::max(peak, v);
      if (v > 0.0) {
        first = std::min(first, j);
        last = std::max(last, j);
      }
    }
    CHECK(sum > 0.0);
    CHECK(peak <= 1.0 + 1e-12);
    // Support is one contiguous run that rises then falls.
    REQUIRE(first <= last);
    for (std::size_t j = first + 1; j < last; ++j) {
      CHECK(w.at(m, j) > 0.0);
    }
    bool rising = true;
    for (std::size_t j = first; j < last; ++j) {
      const double a = w.at(m, j), b = w.at(m, j + 1);
      if (rising && b < a) rising = false;
      if (!rising) CHECK(b <= a + 1e-12);
    }
  }
}

TEST_CASE("a rising sweep moves the mel peak monotonically") {
  AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.resize(661500);
  double phase = 0.0;
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const double t = static_cast<double>(i) / 661500.0;
    const double hz = 200.0 + (8000.0 - 200.0) * t;
    phase += 2.0 * kPi * hz / 22050.0;
    clip.samples[i] = 0.5 * std::sin(phase);
  }
  const Tensor mag = hitrank::stft_magnitude(clip);
  const MelFilterbank bank;
  const MelSpectrogram mel = hitrank::mel_project(mag, bank);

  std::size_t prev = 0;
  for (std::size_t f = 0; f < mel.frames(); ++f) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < mel.bins(); ++m) {
      if (mel.values.at(m, f) > mel.values.at(best, f)) best = m;
    }
    CHECK(best >= prev);
    prev = best;
  }
}

TEST_CASE("scaling the signal shifts log energies by twice the log gain") {
  hitrank::Rng rng(55);
  AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.resize(22050);
  for (auto& s : clip.samples) s = hitrank::uniform(rng, -0.8, 0.8);

  AudioClip louder = clip;
  const double gain = 3.0;
  for (auto& s : louder.samples) s *= gain;

  const MelFilterbank bank;
  const MelSpectrogram quiet =
      hitrank::mel_project(hitrank::stft_magnitude(clip), bank);
  const MelSpectrogram loud =
      hitrank::mel_project(hitrank::stft_magnitude(louder), bank);

  const double shift = 2.0 * std::log(gain);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < quiet.values.size(); ++i) {
    if (quiet.values[i] < std::log(1e-3)) continue;  // near the floor
    CHECK(std::abs(loud.values[i] - quiet.values[i] - shift) < 1e-6);
    ++checked;
  }
  CHECK(checked > quiet.values.size() / 2);
}

TEST_CASE("the full pipeline makes a 128 by 321 matrix from 30 s of audio") {
  const AudioClip clip = sine_clip(440.0, 30.0);
  const Tensor mag = hitrank::stft_magnitude(clip);
  const MelSpectrogram mel = hitrank::mel_project(mag, MelFilterbank());
  CHECK(mel.bins() == 128);
  CHECK(mel.frames() == 321);
  CHECK(mel.values.all_finite());
}

TEST_CASE("feature cache files round-trip bit-exactly") {
  hitrank::CachedFeature feature;
  feature.song_id = "song-000123";
  feature.strategy = "mid30";
  feature.values = Tensor({3, 4});
  for (std::size_t i = 0; i < 12; ++i) {
    feature.values[i] = 1.0 / (static_cast<double>(i) + 3.0);
  }

  const auto path =
      (std::filesystem::temp_directory_path() / "hitrank_cache_test.hrfc")
          .string();
  hitrank::write_feature_cache(path, feature);
  const hitrank::CachedFeature back = hitrank::read_feature_cache(path);
  std::filesystem::remove(path);

  CHECK(back.song_id == feature.song_id);
  CHECK(back.strategy == feature.strategy);
  REQUIRE(back.values.same_shape(feature.values));
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(back.values[i] == feature.values[i]);
  }
}

TEST_CASE("the cache reader rejects foreign bytes") {
  const auto path =
      (std::filesystem::temp_directory_path() / "hitrank_cache_bad.hrfc")
          .string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "JUNKJUNKJUNK";
  }
  CHECK_THROWS(hitrank::read_feature_cache(path));
  std::filesystem::remove(path);
}

TEST_SUITE_END();

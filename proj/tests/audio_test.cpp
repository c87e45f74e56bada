#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "hitrank/audio.hpp"
#include "hitrank/rng.hpp"

using hitrank::AudioClip;
using hitrank::ClipTooShortError;
using hitrank::SegmentStrategy;

TEST_SUITE_BEGIN("audio");

namespace {

/// Clip whose sample values equal their index, for position tracking.
AudioClip ramp_clip(std::size_t seconds, std::size_t rate = 22050) {
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(seconds * rate);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = static_cast<double>(i);
  }
  return clip;
}

std::filesystem::path temp_wav(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("center strategy takes the middle third of a 90 s clip") {
  const AudioClip clip = ramp_clip(90);
  const AudioClip segment =
      hitrank::select_segment(clip, SegmentStrategy::kMid30);
  REQUIRE(segment.samples.size() == 30 * 22050);
  CHECK(segment.samples.front() == static_cast<double>(30 * 22050));
  CHECK(segment.samples.back() == static_cast<double>(60 * 22050 - 1));
}

TEST_CASE("an exactly 30 s clip passes through unchanged") {
  const AudioClip clip = ramp_clip(30);
  for (const auto strategy :
       {SegmentStrategy::kMid30, SegmentStrategy::kHighlight}) {
    const AudioClip segment = hitrank::select_segment(clip, strategy);
    CHECK(segment.samples == clip.samples);
    CHECK(segment.sample_rate == clip.sample_rate);
  }
}

TEST_CASE("a loud tail wins the default highlight scan") {
  AudioClip clip;
  clip.sample_rate = 1000;  // keep the scan small
  clip.samples.assign(90 * 1000, 0.01);
  for (std::size_t i = 60 * 1000; i < 90 * 1000; ++i) {
    clip.samples[i] = 0.9;
  }
  const AudioClip segment =
      hitrank::select_segment(clip, SegmentStrategy::kHighlight);
  REQUIRE(segment.samples.size() == 30 * 1000);
  CHECK(segment.samples.front() == 0.9);  // the final window was chosen
  CHECK(segment.samples.back() == 0.9);
}

TEST_CASE("highlight energy ties keep the earliest window") {
  AudioClip clip;
  clip.sample_rate = 100;
  clip.samples.assign(100 * 100, 0.5);  // constant: every window ties
  CHECK(hitrank::max_rms_start(clip, 30 * 100) == 0);
}

TEST_CASE("a custom highlight selector decides the window") {
  const AudioClip clip = ramp_clip(50, 1000);
  const AudioClip segment = hitrank::select_segment(
      clip, SegmentStrategy::kHighlight,
      [](const AudioClip&, std::size_t) -> std::size_t { return 1234; });
  REQUIRE(segment.samples.size() == 30 * 1000);
  CHECK(segment.samples.front() == 1234.0);
}

TEST_CASE("clips shorter than 30 s are rejected distinctly") {
  const AudioClip clip = ramp_clip(29);
  CHECK_THROWS_AS(hitrank::select_segment(clip, SegmentStrategy::kMid30),
                  ClipTooShortError);
  CHECK_THROWS_AS(hitrank::select_segment(clip, SegmentStrategy::kHighlight),
                  ClipTooShortError);
}

TEST_CASE("segments are exactly 30 s at any input length") {
  hitrank::Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    AudioClip clip;
    clip.sample_rate = 2000;
    const std::size_t len =
        30 * 2000 + static_cast<std::size_t>(
                        hitrank::uniform_index(rng, 50 * 2000));
    clip.samples.resize(len);
    for (auto& s : clip.samples) s = hitrank::uniform(rng, -1.0, 1.0);
    for (const auto strategy :
         {SegmentStrategy::kMid30, SegmentStrategy::kHighlight}) {
      CHECK(hitrank::select_segment(clip, strategy).samples.size() ==
            30 * 2000);
    }
  }
}

TEST_CASE("strategy names round-trip") {
  CHECK(hitrank::segment_strategy_from_string(
            hitrank::to_string(SegmentStrategy::kMid30)) ==
        SegmentStrategy::kMid30);
  CHECK(hitrank::segment_strategy_from_string(
            hitrank::to_string(SegmentStrategy::kHighlight)) ==
        SegmentStrategy::kHighlight);
  CHECK_THROWS(hitrank::segment_strategy_from_string("bogus"));
}

TEST_CASE("wav files round-trip within 16-bit quantization") {
  AudioClip clip;
  clip.sample_rate = 8000;
  hitrank::Rng rng(33);
  clip.samples.resize(8000);
  for (auto& s : clip.samples) s = hitrank::uniform(rng, -0.99, 0.99);

  const auto path = temp_wav("hitrank_roundtrip.wav");
  hitrank::write_wav(path.string(), clip);
  const AudioClip back = hitrank::read_wav(path.string());
  std::filesystem::remove(path);

  CHECK(back.sample_rate == 8000);
  REQUIRE(back.samples.size() == clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    CHECK(std::abs(back.samples[i] - clip.samples[i]) <= 1.0 / 32768.0);
  }
}

TEST_CASE("non-wav bytes are rejected") {
  const auto path = temp_wav("hitrank_notwav.wav");
  {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fputs("this is not audio", f);
    std::fclose(f);
  }
  CHECK_THROWS(hitrank::read_wav(path.string()));
  std::filesystem::remove(path);
}

TEST_CASE("reading a missing file fails cleanly") {
  CHECK_THROWS(hitrank::read_wav("/nonexistent/missing.wav"));
}

TEST_SUITE_END();

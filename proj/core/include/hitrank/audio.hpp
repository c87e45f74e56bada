#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hitrank {

/// Mono audio in [-1, 1] doubles at an integer sample rate.
struct AudioClip {
  std::vector<double> samples;
  std::size_t sample_rate = 22050;
};

/// Raised when a clip is too short for the requested segment or window.
struct ClipTooShortError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// kMid30 takes the center-aligned window. kHighlight delegates to a
/// selector chosen by the caller; the built-in default picks the window
/// with maximum RMS energy, a plumbing stand-in rather than a learned
/// thumbnailer.
enum class SegmentStrategy {
  kMid30,
  kHighlight,
};

std::string_view to_string(SegmentStrategy strategy);
SegmentStrategy segment_strategy_from_string(std::string_view name);

/// Maps (clip, window length in samples) to the chosen start sample.
using HighlightSelector =
    std::function<std::size_t(const AudioClip&, std::size_t)>;

/// Extracts exactly 30 * sample_rate samples. Shorter clips raise
/// ClipTooShortError. An empty `selector` means the built-in max-RMS scan
/// (earliest window on ties).
AudioClip select_segment(const AudioClip& clip, SegmentStrategy strategy,
                         const HighlightSelector& selector = {});

/// Start index of the window with the highest RMS energy; ties keep the
/// earliest start.
std::size_t max_rms_start(const AudioClip& clip, std::size_t window_samples);

/// WAV PCM, 16-bit, mono. Anything else is rejected.
AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip);

}  // namespace hitrank

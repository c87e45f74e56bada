#include "hitrank/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace hitrank {

namespace {

constexpr std::size_t kSegmentSeconds = 30;

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] |
                                    (static_cast<std::uint16_t>(b[1]) << 8));
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

std::string_view to_string(SegmentStrategy strategy) {
  switch (strategy) {
    case SegmentStrategy::kMid30:
      return "mid30";
    case SegmentStrategy::kHighlight:
      return "highlight";
  }
  throw std::invalid_argument("to_string: unknown SegmentStrategy");
}

SegmentStrategy segment_strategy_from_string(std::string_view name) {
  if (name == "mid30") return SegmentStrategy::kMid30;
  if (name == "highlight") return SegmentStrategy::kHighlight;
  throw std::invalid_argument("unknown segment strategy '" +
                              std::string(name) + "'");
}

std::size_t max_rms_start(const AudioClip& clip, std::size_t window_samples) {
  if (window_samples == 0 || clip.samples.size() < window_samples) {
    throw ClipTooShortError("max_rms_start: clip shorter than window");
  }
  // Prefix sums of squared samples make every window's energy O(1).
  std::vector<double> prefix(clip.samples.size() + 1, 0.0);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    prefix[i + 1] = prefix[i] + clip.samples[i] * clip.samples[i];
  }
  std::size_t best_start = 0;
  double best_energy = prefix[window_samples];
  for (std::size_t s = 1; s + window_samples <= clip.samples.size(); ++s) {
    const double energy = prefix[s + window_samples] - prefix[s];
    if (energy > best_energy) {
      best_energy = energy;
      best_start = s;
    }
  }
  return best_start;
}

AudioClip select_segment(const AudioClip& clip, SegmentStrategy strategy,
                         const HighlightSelector& selector) {
  if (clip.sample_rate == 0) {
    throw std::invalid_argument("select_segment: zero sample rate");
  }
  const std::size_t window = kSegmentSeconds * clip.sample_rate;
  if (clip.samples.size() < window) {
    throw ClipTooShortError("select_segment: clip shorter than 30 s (" +
                            std::to_string(clip.samples.size()) + " of " +
                            std::to_string(window) + " samples)");
  }

  std::size_t start = 0;
  switch (strategy) {
    case SegmentStrategy::kMid30:
      start = (clip.samples.size() - window) / 2;
      break;
    case SegmentStrategy::kHighlight:
      start = selector ? selector(clip, window) : max_rms_start(clip, window);
      if (start + window > clip.samples.size()) {
        throw std::invalid_argument(
            "select_segment: highlight selector returned an out-of-range "
            "start");
      }
      break;
  }

  AudioClip segment;
  segment.sample_rate = clip.sample_rate;
  segment.samples.assign(
      clip.samples.begin() + static_cast<std::ptrdiff_t>(start),
      clip.samples.begin() + static_cast<std::ptrdiff_t>(start + window));
  return segment;
}

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_wav: cannot open " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0) {
    throw std::runtime_error("read_wav: not a RIFF file: " + path);
  }
  read_u32(in);
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0) {
    throw std::runtime_error("read_wav: not a WAVE file: " + path);
  }

  bool have_format = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  AudioClip clip;
  while (in.read(tag, 4)) {
    const std::uint32_t chunk_size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const std::uint16_t format = read_u16(in);
      channels = read_u16(in);
      rate = read_u32(in);
      read_u32(in);
      read_u16(in);
      bits = read_u16(in);
      if (chunk_size > 16) {
        in.seekg(chunk_size - 16, std::ios::cur);
      }
      if (format != 1) {
        throw std::runtime_error("read_wav: only PCM supported: " + path);
      }
      if (channels != 1) {
        throw std::runtime_error("read_wav: only mono supported: " + path);
      }
      if (bits != 16) {
        throw std::runtime_error("read_wav: only 16-bit supported: " + path);
      }
      have_format = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_format) {
        throw std::runtime_error("read_wav: data chunk before fmt: " + path);
      }
      const std::size_t count = chunk_size / 2;
      clip.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        unsigned char b[2];
        in.read(reinterpret_cast<char*>(b), 2);
        const auto raw = static_cast<std::int16_t>(
            b[0] | (static_cast<std::uint16_t>(b[1]) << 8));
        clip.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      if (!in) throw std::runtime_error("read_wav: truncated data: " + path);
      clip.sample_rate = rate;
      return clip;
    } else {
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  throw std::runtime_error("read_wav: no data chunk: " + path);
}

void write_wav(const std::string& path, const AudioClip& clip) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_wav: cannot open " + path);
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(clip.samples.size() * 2);

  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);
  write_u16(out, 1);
  write_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  write_u32(out, static_cast<std::uint32_t>(clip.sample_rate * 2));
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (double v : clip.samples) {
    const long scaled =
        std::clamp(std::lround(v * 32768.0), -32768L, 32767L);
    write_u16(out, static_cast<std::uint16_t>(
                       static_cast<std::int16_t>(scaled)));
  }
  if (!out) throw std::runtime_error("write_wav: write failure: " + path);
}

}  // namespace hitrank

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hitrank/audio.hpp"
#include "hitrank/tensor.hpp"

namespace hitrank {

/// Log-compressed mel energies, laid out [bins, frames].
struct MelSpectrogram {
  Tensor values;

  std::size_t bins() const { return values.dim(0); }
  std::size_t frames() const { return values.dim(1); }
};

/// Hamming window coefficients 0.54 - 0.46*cos(2*pi*i/(n-1)).
std::vector<double> hamming_window(std::size_t n);

/// Short-time magnitude spectrum over complete Hamming windows only (no
/// end padding): result is [frames, window/2 + 1] with
/// frames = floor((len - window) / hop) + 1. The window length must be a
/// power of two; clips shorter than one window raise ClipTooShortError.
Tensor stft_magnitude(const AudioClip& clip, std::size_t window = 4096,
                      std::size_t hop = 2048);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular mel filters over FFT bin center frequencies. Triangles are
/// equally spaced on the 2595*log10(1 + f/700) scale and peak at 1.
class MelFilterbank {
 public:
  MelFilterbank(std::size_t n_mels = 128, std::size_t fft_size = 4096,
                double sample_rate = 22050.0, double fmin = 0.0,
                double fmax = 11025.0);

  /// [n_mels, fft_size/2 + 1]
  const Tensor& weights() const noexcept { return weights_; }
  std::size_t n_mels() const { return weights_.dim(0); }
  std::size_t spectrum_bins() const { return weights_.dim(1); }

 private:
  Tensor weights_;
};

/// Filterbank applied to the squared magnitudes, then ln(x + 1e-10).
/// `magnitude` is the [frames, bins] output of stft_magnitude.
MelSpectrogram mel_project(const Tensor& magnitude,
                           const MelFilterbank& bank);

/// One cached feature matrix plus the identity needed to trust it later.
struct CachedFeature {
  std::string song_id;
  std::string strategy;
  Tensor values;
};

/// Binary cache, one file per song:
///   magic "HRFC" | u32 version | song id | strategy | u32 bins |
///   u32 frames | f64 values row-major
/// Strings are u32 length + bytes; everything little-endian.
void write_feature_cache(const std::string& path,
                         const CachedFeature& feature);
CachedFeature read_feature_cache(const std::string& path);

}  // namespace hitrank

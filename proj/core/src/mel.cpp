#include "hitrank/mel.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "binio.hpp"

namespace hitrank {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLogFloor = 1e-10;
constexpr char kCacheMagic[4] = {'H', 'R', 'F', 'C'};
constexpr std::uint32_t kCacheVersion = 1;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place radix-2 FFT. Twiddles come from a table of direct cos/sin
/// evaluations, so accuracy does not degrade with transform size.
void fft_inplace(std::vector<double>& re, std::vector<double>& im,
                 const std::vector<double>& tw_re,
                 const std::vector<double>& tw_im) {
  const std::size_t n = re.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const double wr = tw_re[k * stride];
        const double wi = tw_im[k * stride];
        const std::size_t a = base + k;
        const std::size_t b = a + len / 2;
        const double tr = re[b] * wr - im[b] * wi;
        const double ti = re[b] * wi + im[b] * wr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
      }
    }
  }
}

}  // namespace

std::vector<double> hamming_window(std::size_t n) {
  if (n < 2) throw std::invalid_argument("hamming_window: n must be >= 2");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  }
  return w;
}

Tensor stft_magnitude(const AudioClip& clip, std::size_t window,
                      std::size_t hop) {
  if (!is_pow2(window)) {
    throw std::invalid_argument("stft_magnitude: window must be a power of 2");
  }
  if (hop == 0) throw std::invalid_argument("stft_magnitude: zero hop");
  if (clip.samples.size() < window) {
    throw ClipTooShortError("stft_magnitude: clip shorter than one window (" +
                            std::to_string(clip.samples.size()) + " of " +
                            std::to_string(window) + " samples)");
  }
  const std::size_t frames = (clip.samples.size() - window) / hop + 1;
  const std::size_t bins = window / 2 + 1;
  const std::vector<double> win = hamming_window(window);

  std::vector<double> tw_re(window / 2), tw_im(window / 2);
  for (std::size_t k = 0; k < window / 2; ++k) {
    const double ang =
        -2.0 * kPi * static_cast<double>(k) / static_cast<double>(window);
    tw_re[k] = std::cos(ang);
    tw_im[k] = std::sin(ang);
  }

  Tensor out({frames, bins});
  std::vector<double> re(window), im(window);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < window; ++i) {
      re[i] = clip.samples[start + i] * win[i];
      im[i] = 0.0;
    }
    fft_inplace(re, im, tw_re, tw_im);
    for (std::size_t k = 0; k < bins; ++k) {
      out.at(t, k) = std::hypot(re[k], im[k]);
    }
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank::MelFilterbank(std::size_t n_mels, std::size_t fft_size,
                             double sample_rate, double fmin, double fmax) {
  if (n_mels == 0) throw std::invalid_argument("MelFilterbank: zero bands");
  if (!is_pow2(fft_size)) {
    throw std::invalid_argument("MelFilterbank: fft_size must be a power of 2");
  }
  if (!(sample_rate > 0.0)) {
    throw std::invalid_argument("MelFilterbank: sample_rate must be positive");
  }
  if (fmin < 0.0 || !(fmax > fmin) || fmax > sample_rate / 2.0 + 1e-9) {
    throw std::invalid_argument(
        "MelFilterbank: need 0 <= fmin < fmax <= Nyquist");
  }

  const std::size_t bins = fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t m = 0; m < edges.size(); ++m) {
    edges[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(m) /
                                      static_cast<double>(n_mels + 1));
  }

  weights_ = Tensor({n_mels, bins});
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz =
          static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
      double w = 0.0;
      if (hz > left && hz < right) {
        w = hz <= center ? (hz - left) / (center - left)
                         : (right - hz) / (right - center);
      }
      weights_.at(m, k) = w;
    }
  }
}

MelSpectrogram mel_project(const Tensor& magnitude, const MelFilterbank& bank) {
  if (magnitude.rank() != 2) {
    throw std::invalid_argument("mel_project: expects [frames, bins]");
  }
  if (magnitude.dim(1) != bank.spectrum_bins()) {
    throw std::invalid_argument(
        "mel_project: spectrum bins do not match the filterbank");
  }
  const std::size_t frames = magnitude.dim(0);
  const std::size_t bins = magnitude.dim(1);
  const std::size_t mels = bank.n_mels();
  const Tensor& w = bank.weights();

  MelSpectrogram out;
  out.values = Tensor({mels, frames});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t m = 0; m < mels; ++m) {
      double energy = 0.0;
      for (std::size_t k = 0; k < bins; ++k) {
        const double mag = magnitude.at(t, k);
        energy += w.at(m, k) * mag * mag;
      }
      out.values.at(m, t) = std::log(energy + kLogFloor);
    }
  }
  return out;
}

void write_feature_cache(const std::string& path,
                         const CachedFeature& feature) {
  if (feature.values.rank() != 2) {
    throw std::invalid_argument("write_feature_cache: expects [bins, frames]");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_feature_cache: cannot open " + path);
  }
  out.write(kCacheMagic, 4);
  binio::put_u32(out, kCacheVersion);
  binio::put_string(out, feature.song_id);
  binio::put_string(out, feature.strategy);
  binio::put_u32(out, static_cast<std::uint32_t>(feature.values.dim(0)));
  binio::put_u32(out, static_cast<std::uint32_t>(feature.values.dim(1)));
  for (double v : feature.values.values()) binio::put_f64(out, v);
  if (!out) {
    throw std::runtime_error("write_feature_cache: write failure: " + path);
  }
}

CachedFeature read_feature_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("read_feature_cache: cannot open " + path);
  }
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0) {
    throw std::runtime_error("read_feature_cache: bad magic in " + path);
  }
  const std::uint32_t version = binio::get_u32(in);
  if (version != kCacheVersion) {
    throw std::runtime_error("read_feature_cache: unsupported version " +
                             std::to_string(version) + " in " + path);
  }
  CachedFeature feature;
  feature.song_id = binio::get_string(in);
  feature.strategy = binio::get_string(in);
  const std::uint32_t bins = binio::get_u32(in);
  const std::uint32_t frames = binio::get_u32(in);
  std::vector<double> values(static_cast<std::size_t>(bins) * frames);
  for (double& v : values) v = binio::get_f64(in);
  feature.values = Tensor({bins, frames}, std::move(values));
  return feature;
}

}  // namespace hitrank

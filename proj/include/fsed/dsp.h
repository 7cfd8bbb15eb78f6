// Copyright 2026 The fsed Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FSED_DSP_H_
#define FSED_DSP_H_

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "fsed/audio.h"
#include "fsed/fft.h"

namespace fsed {

// Resampler quality: windowed-sinc half width in zero crossings of the
// narrower band, and the Kaiser window shape parameter.
inline constexpr int kResampleHalfWidth = 16;
inline constexpr double kResampleKaiserBeta = 8.6;

// Band-limited rational resampling. Annotations are in seconds and are carried
// over unchanged. Throws kEmptyAudio for a clip without samples.
AudioClip resample(const AudioClip& clip, int target_rate);

enum class WindowKind { kHann, kHamming, kRectangular };

struct StftConfig {
  double frame_len_s = 0.030;
  double hop_s = 0.010;
  WindowKind window = WindowKind::kHann;
  int n_fft = 0;  // 0 selects the next power of two >= frame length
};

std::vector<double> make_window(WindowKind kind, int length);

// Power |X|^2 for frames of a real signal. Layout: (n_fft/2+1) x frames.
struct PowerSpectrogram {
  Eigen::MatrixXd power;
  int sample_rate = 0;
  int n_fft = 0;
  int frame_len = 0;
  int hop = 0;

  int bins() const { return static_cast<int>(power.rows()); }
  int frames() const { return static_cast<int>(power.cols()); }
  double hop_s() const { return static_cast<double>(hop) / sample_rate; }
};

// T = floor((len - frame_len) / hop) + 1. Throws kTooShort when the clip
// does not hold one full frame.
PowerSpectrogram stft_power(const AudioClip& clip, const StftConfig& config = {});

double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelFilterbank {
  Eigen::MatrixXd weights;  // channels x (n_fft/2+1)
  int sample_rate = 0;
  int n_fft = 0;
  std::vector<double> peak_hz;

  int channels() const { return static_cast<int>(weights.rows()); }
};

// Triangular filters with peaks equally spaced on the HTK mel scale between
// f_min and f_max. Throws kInvalidBand unless 0 <= f_min < f_max <= rate/2.
MelFilterbank mel_filterbank(int channels, int n_fft, int sample_rate, double f_min, double f_max);

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Log-mel energies, one row per mel channel and one column per frame.
struct MelFeatures {
  FeatureMatrix values;
  double frame_hop_s = 0.010;

  int channels() const { return static_cast<int>(values.rows()); }
  int frames() const { return static_cast<int>(values.cols()); }

  // Frames [start, start + length). Throws kTooShort if out of range.
  MelFeatures window(int start, int length) const;
};

// ln(max(fb * power, floor)). Throws kShapeMismatch on a bin-count mismatch.
MelFeatures log_mel(const PowerSpectrogram& spec, const MelFilterbank& fb, double floor = 1e-10);

struct FeatureConfig {
  int sample_rate = 16000;
  StftConfig stft;
  int mel_channels = 40;
  double f_min = 0.0;
  double f_max = 8000.0;
  double log_floor = 1e-10;
};

// Bundles a precomputed window, FFT plan and filterbank. Immutable after
// construction; extract() may be called concurrently.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureConfig config = {});

  const FeatureConfig& config() const { return config_; }
  int frame_len() const { return frame_len_; }
  int hop() const { return hop_; }
  double hop_s() const { return static_cast<double>(hop_) / config_.sample_rate; }
  const MelFilterbank& filterbank() const { return filterbank_; }

  // Number of samples spanned by `frames` consecutive frames.
  int samples_for_frames(int frames) const { return (frames - 1) * hop_ + frame_len_; }

  // Resamples first if the clip rate differs from the configured rate.
  MelFeatures extract(const AudioClip& clip) const;
  // Samples are assumed to be at the configured rate.
  MelFeatures extract(std::span<const float> samples) const;

 private:
  FeatureConfig config_;
  int frame_len_;
  int hop_;
  int n_fft_;
  std::vector<double> window_;
  FftPlan plan_;
  MelFilterbank filterbank_;
  std::vector<std::pair<int, int>> support_;  // nonzero bin range per channel
};

// Flat binary dump: "FSED", version u32, F u32, T u32, hop_us u64, then F*T
// little-endian f32 values, row-major by channel.
inline constexpr uint32_t kFeatureDumpVersion = 1;
void write_feature_dump(const std::filesystem::path& path, const MelFeatures& features);
MelFeatures read_feature_dump(const std::filesystem::path& path);

}  // namespace fsed

#endif  // FSED_DSP_H_

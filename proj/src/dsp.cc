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

#include "fsed/dsp.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "fsed/error.h"

namespace fsed {
namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double kaiser(double x, double beta) {
  // x in [-1, 1]
  if (std::abs(x) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - x * x)) / std::cyl_bessel_i(0.0, beta);
}

int frame_count(size_t length, int frame_len, int hop) {
  if (length < static_cast<size_t>(frame_len)) return 0;
  return static_cast<int>((length - static_cast<size_t>(frame_len)) / static_cast<size_t>(hop)) + 1;
}

// Shared frame loop. `emit(frame, spectrum)` receives the power spectrum of
// each frame as n_fft/2+1 values.
template <typename Emit>
void power_frames(std::span<const float> samples, int frame_len, int hop, const std::vector<double>& window,
                  const FftPlan& plan, Emit&& emit) {
  const int frames = frame_count(samples.size(), frame_len, hop);
  const size_t n_fft = plan.size();
  const size_t bins = n_fft / 2 + 1;
  std::vector<std::complex<double>> buf(n_fft);
  std::vector<double> power(bins);
  for (int t = 0; t < frames; ++t) {
    const size_t start = static_cast<size_t>(t) * static_cast<size_t>(hop);
    for (int i = 0; i < frame_len; ++i) buf[i] = {samples[start + i] * window[i], 0.0};
    std::fill(buf.begin() + frame_len, buf.end(), std::complex<double>{});
    plan.forward(buf);
    for (size_t k = 0; k < bins; ++k) power[k] = std::norm(buf[k]);
    emit(t, power);
  }
}

int samples_from_seconds(double seconds, int rate) {
  return static_cast<int>(std::lround(seconds * rate));
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (clip.samples.empty()) throw Error(ErrorCode::kEmptyAudio, "cannot resample an empty clip");
  if (clip.sample_rate <= 0 || target_rate <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "sample rates must be positive");
  }
  if (clip.sample_rate == target_rate) return clip;

  const int64_t g = std::gcd(clip.sample_rate, target_rate);
  const int64_t up = target_rate / g;
  const int64_t down = clip.sample_rate / g;
  const double cutoff = std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
  const double half_width = kResampleHalfWidth / cutoff;  // in input samples
  const int taps = static_cast<int>(std::ceil(half_width));

  // Phase p corresponds to a fractional input position p/up. Each phase keeps
  // 2*taps coefficients for input offsets -taps+1 .. taps.
  std::vector<double> table(static_cast<size_t>(up) * 2 * taps);
  for (int64_t p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    double* row = table.data() + p * 2 * taps;
    double sum = 0.0;
    for (int k = 0; k < 2 * taps; ++k) {
      const double x = frac - static_cast<double>(k - taps + 1);
      row[k] = cutoff * sinc(cutoff * x) * kaiser(x / half_width, kResampleKaiserBeta);
      sum += row[k];
    }
    for (int k = 0; k < 2 * taps; ++k) row[k] /= sum;
  }

  const int64_t n = static_cast<int64_t>(clip.samples.size());
  const int64_t out_len = (n * up + down / 2) / down;
  AudioClip out;
  out.sample_rate = target_rate;
  out.annotations = clip.annotations;
  out.samples.resize(static_cast<size_t>(out_len));
  for (int64_t j = 0; j < out_len; ++j) {
    const int64_t num = j * down;
    const int64_t base = num / up;
    const int64_t phase = num % up;
    const double* row = table.data() + phase * 2 * taps;
    double acc = 0.0;
    for (int k = 0; k < 2 * taps; ++k) {
      const int64_t idx = base + k - taps + 1;
      if (idx >= 0 && idx < n) acc += row[k] * clip.samples[static_cast<size_t>(idx)];
    }
    out.samples[static_cast<size_t>(j)] = static_cast<float>(acc);
  }
  return out;
}

std::vector<double> make_window(WindowKind kind, int length) {
  std::vector<double> w(static_cast<size_t>(length), 1.0);
  // Periodic windows, the usual choice for STFT analysis.
  for (int i = 0; i < length; ++i) {
    const double phase = 2.0 * std::numbers::pi * i / length;
    switch (kind) {
      case WindowKind::kHann: w[i] = 0.5 - 0.5 * std::cos(phase); break;
      case WindowKind::kHamming: w[i] = 0.54 - 0.46 * std::cos(phase); break;
      case WindowKind::kRectangular: break;
    }
  }
  return w;
}

PowerSpectrogram stft_power(const AudioClip& clip, const StftConfig& config) {
  if (clip.sample_rate <= 0) throw Error(ErrorCode::kInvalidConfig, "sample rate must be positive");
  const int frame_len = samples_from_seconds(config.frame_len_s, clip.sample_rate);
  const int hop = samples_from_seconds(config.hop_s, clip.sample_rate);
  if (frame_len < 1 || hop < 1) throw Error(ErrorCode::kInvalidConfig, "frame length and hop must be positive");
  const int n_fft = config.n_fft > 0 ? config.n_fft : static_cast<int>(next_power_of_two(frame_len));
  if (n_fft < frame_len) throw Error(ErrorCode::kInvalidConfig, "n_fft shorter than frame");
  const int frames = frame_count(clip.samples.size(), frame_len, hop);
  if (frames < 1) {
    throw Error(ErrorCode::kTooShort, "clip of " + std::to_string(clip.samples.size()) +
                                          " samples is shorter than one frame of " +
                                          std::to_string(frame_len));
  }
  PowerSpectrogram spec;
  spec.sample_rate = clip.sample_rate;
  spec.n_fft = n_fft;
  spec.frame_len = frame_len;
  spec.hop = hop;
  spec.power.resize(n_fft / 2 + 1, frames);
  const FftPlan plan(static_cast<size_t>(n_fft));
  const auto window = make_window(config.window, frame_len);
  power_frames(clip.samples, frame_len, hop, window, plan, [&](int t, const std::vector<double>& p) {
    for (size_t k = 0; k < p.size(); ++k) spec.power(static_cast<Eigen::Index>(k), t) = p[k];
  });
  return spec;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(int channels, int n_fft, int sample_rate, double f_min, double f_max) {
  if (channels < 1 || n_fft < 2 || sample_rate <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "filterbank needs channels >= 1, n_fft >= 2, rate > 0");
  }
  if (!(f_min >= 0.0 && f_min < f_max) || f_max > sample_rate / 2.0) {
    throw Error(ErrorCode::kInvalidBand, "band [" + std::to_string(f_min) + ", " + std::to_string(f_max) +
                                             "] Hz invalid for rate " + std::to_string(sample_rate));
  }
  const int bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  std::vector<double> edges(static_cast<size_t>(channels) + 2);
  for (size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (channels + 1));
  }

  MelFilterbank fb;
  fb.sample_rate = sample_rate;
  fb.n_fft = n_fft;
  fb.weights = Eigen::MatrixXd::Zero(channels, bins);
  fb.peak_hz.assign(edges.begin() + 1, edges.end() - 1);
  const double bin_hz = static_cast<double>(sample_rate) / n_fft;
  for (int m = 0; m < channels; ++m) {
    const double lo = edges[m], peak = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      const double rise = (f - lo) / (peak - lo);
      const double fall = (hi - f) / (hi - peak);
      fb.weights(m, k) = std::max(0.0, std::min(rise, fall));
    }
    // A filter narrower than one bin would otherwise be all zero; give its
    // nearest bin full weight so every channel carries energy.
    if (fb.weights.row(m).maxCoeff() <= 0.0) {
      const int k = std::clamp(static_cast<int>(std::lround(peak / bin_hz)), 0, bins - 1);
      fb.weights(m, k) = 1.0;
    }
  }
  return fb;
}

MelFeatures MelFeatures::window(int start, int length) const {
  if (start < 0 || length < 1 || start + length > frames()) {
    throw Error(ErrorCode::kTooShort, "window [" + std::to_string(start) + ", +" + std::to_string(length) +
                                          ") exceeds " + std::to_string(frames()) + " frames");
  }
  MelFeatures out;
  out.frame_hop_s = frame_hop_s;
  out.values = values.middleCols(start, length);
  return out;
}

MelFeatures log_mel(const PowerSpectrogram& spec, const MelFilterbank& fb, double floor) {
  if (spec.bins() != fb.weights.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "spectrogram has " + std::to_string(spec.bins()) +
                                               " bins, filterbank expects " +
                                               std::to_string(fb.weights.cols()));
  }
  if (!(floor > 0.0)) throw Error(ErrorCode::kInvalidConfig, "log floor must be positive");
  const Eigen::MatrixXd energy = fb.weights * spec.power;
  MelFeatures out;
  out.frame_hop_s = spec.hop_s();
  out.values = energy.array().max(floor).log().cast<float>().matrix();
  return out;
}

FeatureExtractor::FeatureExtractor(FeatureConfig config)
    : config_(config),
      frame_len_(samples_from_seconds(config.stft.frame_len_s, config.sample_rate)),
      hop_(samples_from_seconds(config.stft.hop_s, config.sample_rate)),
      n_fft_(config.stft.n_fft > 0 ? config.stft.n_fft : static_cast<int>(next_power_of_two(frame_len_))),
      window_(make_window(config.stft.window, frame_len_)),
      plan_(static_cast<size_t>(n_fft_)),
      filterbank_(mel_filterbank(config.mel_channels, n_fft_, config.sample_rate, config.f_min, config.f_max)) {
  if (frame_len_ < 1 || hop_ < 1 || n_fft_ < frame_len_) {
    throw Error(ErrorCode::kInvalidConfig, "invalid frame/hop/n_fft configuration");
  }
  const auto& w = filterbank_.weights;
  for (Eigen::Index c = 0; c < w.rows(); ++c) {
    int first = 0, last = static_cast<int>(w.cols());
    while (first < last && w(c, first) == 0.0) ++first;
    while (last > first && w(c, last - 1) == 0.0) --last;
    support_.emplace_back(first, last);
  }
}

MelFeatures FeatureExtractor::extract(const AudioClip& clip) const {
  if (clip.samples.empty()) throw Error(ErrorCode::kEmptyAudio, "cannot extract features from an empty clip");
  if (clip.sample_rate != config_.sample_rate) {
    const AudioClip converted = resample(clip, config_.sample_rate);
    return extract(std::span<const float>(converted.samples));
  }
  return extract(std::span<const float>(clip.samples));
}

MelFeatures FeatureExtractor::extract(std::span<const float> samples) const {
  if (samples.empty()) throw Error(ErrorCode::kEmptyAudio, "cannot extract features from an empty clip");
  const int frames = frame_count(samples.size(), frame_len_, hop_);
  if (frames < 1) {
    throw Error(ErrorCode::kTooShort, std::to_string(samples.size()) + " samples is shorter than one frame");
  }
  MelFeatures out;
  out.frame_hop_s = hop_s();
  out.values.resize(filterbank_.channels(), frames);
  power_frames(samples, frame_len_, hop_, window_, plan_, [&](int t, const std::vector<double>& p) {
    for (int c = 0; c < filterbank_.channels(); ++c) {
      double energy = 0.0;
      for (int b = support_[c].first; b < support_[c].second; ++b) energy += filterbank_.weights(c, b) * p[b];
      out.values(c, t) = static_cast<float>(std::log(std::max(energy, config_.log_floor)));
    }
  });
  return out;
}

void write_feature_dump(const std::filesystem::path& path, const MelFeatures& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  const uint32_t version = kFeatureDumpVersion;
  const uint32_t f = static_cast<uint32_t>(features.channels());
  const uint32_t t = static_cast<uint32_t>(features.frames());
  const uint64_t hop_us = static_cast<uint64_t>(std::llround(features.frame_hop_s * 1e6));
  out.write("FSED", 4);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&f), 4);
  out.write(reinterpret_cast<const char*>(&t), 4);
  out.write(reinterpret_cast<const char*>(&hop_us), 8);
  out.write(reinterpret_cast<const char*>(features.values.data()),
            static_cast<std::streamsize>(sizeof(float) * f * t));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

MelFeatures read_feature_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr size_t kHeader = 4 + 4 + 4 + 4 + 8;
  if (buf.size() < kHeader || std::memcmp(buf.data(), "FSED", 4) != 0) {
    throw Error(ErrorCode::kIo, path.string() + ": not a feature dump");
  }
  uint32_t version, f, t;
  uint64_t hop_us;
  std::memcpy(&version, buf.data() + 4, 4);
  std::memcpy(&f, buf.data() + 8, 4);
  std::memcpy(&t, buf.data() + 12, 4);
  std::memcpy(&hop_us, buf.data() + 16, 8);
  if (version != kFeatureDumpVersion) {
    throw Error(ErrorCode::kIo, path.string() + ": unsupported dump version " + std::to_string(version));
  }
  const size_t payload = sizeof(float) * static_cast<size_t>(f) * t;
  if (buf.size() != kHeader + payload) throw Error(ErrorCode::kIo, path.string() + ": truncated feature dump");
  MelFeatures out;
  out.frame_hop_s = static_cast<double>(hop_us) * 1e-6;
  out.values.resize(f, t);
  std::memcpy(out.values.data(), buf.data() + kHeader, payload);
  return out;
}

}  // namespace fsed

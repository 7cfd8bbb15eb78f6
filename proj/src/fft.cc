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

#include "fsed/fft.h"

#include <cmath>
#include <numbers>
#include <utility>

#include "fsed/error.h"

namespace fsed {

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_power_of_two(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

FftPlan::FftPlan(size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
  if (!is_power_of_two(n)) {
    throw Error(ErrorCode::kInvalidConfig, "FFT size " + std::to_string(n) + " is not a power of two");
  }
  size_t bits = 0;
  while ((size_t{1} << bits) < n) ++bits;
  for (size_t i = 0; i < n; ++i) {
    size_t r = 0;
    for (size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    bitrev_[i] = r;
  }
  for (size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) {
    throw Error(ErrorCode::kShapeMismatch, "FFT buffer size mismatch");
  }
  for (size_t i = 0; i < n_; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (size_t len = 2; len <= n_; len <<= 1) {
    const size_t half = len / 2;
    const size_t stride = n_ / len;
    for (size_t start = 0; start < n_; start += len) {
      for (size_t k = 0; k < half; ++k) {
        // Written out to avoid the NaN-recovery path of std::complex multiply.
        const std::complex<double> w = twiddle_[k * stride];
        const std::complex<double> x = data[start + k + half];
        const std::complex<double> t(w.real() * x.real() - w.imag() * x.imag(),
                                     w.real() * x.imag() + w.imag() * x.real());
        data[start + k + half] = data[start + k] - t;
        data[start + k] += t;
      }
    }
  }
}

}  // namespace fsed

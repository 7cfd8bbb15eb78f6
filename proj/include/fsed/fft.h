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

#ifndef FSED_FFT_H_
#define FSED_FFT_H_

#include <complex>
#include <span>
#include <vector>

namespace fsed {

// In-place iterative radix-2 FFT. The size must be a power of two. Plans
// (bit-reversal table and twiddles) are immutable once built, so one plan may
// be shared by many threads.
class FftPlan {
 public:
  explicit FftPlan(size_t n);

  size_t size() const { return n_; }
  void forward(std::span<std::complex<double>> data) const;

 private:
  size_t n_;
  std::vector<size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;
};

bool is_power_of_two(size_t n);
size_t next_power_of_two(size_t n);

}  // namespace fsed

#endif  // FSED_FFT_H_

// Copyright 2026 The MSD Authors.
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

#include "core/conditioning.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "core/error.hpp"

namespace msd {
namespace {

// FFTW plan creation is not thread safe; execution of a created plan is.
std::mutex g_fftw_mutex;

}  // namespace

void BandSpec::Validate() const {
  if (!(0.0 < low_hz && low_hz < high_hz && high_hz < rate_hz / 2.0))
    FailArgument("band edges must satisfy 0 < low < high < rate/2");
}

std::vector<double> FourierBandpass(const std::vector<double>& signal,
                                    const BandSpec& band) {
  band.Validate();
  const std::size_t n = signal.size();
  if (n < 2) FailArgument("band-pass needs at least 2 samples");
  for (double v : signal)
    if (!std::isfinite(v)) FailArgument("band-pass input has non-finite samples");

  const std::size_t n_bins = n / 2 + 1;
  std::vector<double> time(n);
  std::vector<fftw_complex> freq(n_bins);

  fftw_plan forward, inverse;
  {
    std::lock_guard lock(g_fftw_mutex);
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), time.data(),
                                   freq.data(), FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), freq.data(),
                                   time.data(), FFTW_ESTIMATE);
  }
  std::copy(signal.begin(), signal.end(), time.begin());
  fftw_execute(forward);

  // Keep bin k iff low <= k*rate/n <= high; the comparison is done on
  // k*rate against low*n / high*n so exact band edges are not lost to the
  // division rounding. Zeroing a half-spectrum bin zeroes its conjugate.
  const double low_scaled = band.low_hz * static_cast<double>(n);
  const double high_scaled = band.high_hz * static_cast<double>(n);
  for (std::size_t k = 0; k < n_bins; ++k) {
    const double f_scaled = static_cast<double>(k) * band.rate_hz;
    if (f_scaled < low_scaled || f_scaled > high_scaled) {
      freq[k][0] = 0.0;
      freq[k][1] = 0.0;
    }
  }

  fftw_execute(inverse);
  {
    std::lock_guard lock(g_fftw_mutex);
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }

  const double scale = 1.0 / static_cast<double>(n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = time[i] * scale;
  return out;
}

Recording BandpassRecording(const Recording& rec, double low_hz,
                            double high_hz) {
  rec.Validate();
  BandSpec band{low_hz, high_hz, rec.rate_hz};
  Recording out = rec;
  for (auto& channel : out.channels)
    channel.samples = FourierBandpass(channel.samples, band);
  return out;
}

float NormalizeCnnSample(double microvolts) {
  return static_cast<float>(std::clamp(microvolts / 100.0, -1.0, 1.0));
}

float NormalizeLstmSample(double microvolts) {
  return static_cast<float>(std::clamp((microvolts + 100.0) / 200.0, 0.0, 1.0));
}

std::vector<float> NormalizeCnn(const std::vector<double>& microvolts) {
  std::vector<float> out(microvolts.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = NormalizeCnnSample(microvolts[i]);
  return out;
}

std::vector<float> NormalizeLstm(const std::vector<double>& microvolts) {
  std::vector<float> out(microvolts.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = NormalizeLstmSample(microvolts[i]);
  return out;
}

}  // namespace msd

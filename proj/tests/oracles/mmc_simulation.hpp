#pragma once

// Test-only M/M/c FCFS simulation. The jump chain of the station is simulated
// event by event; time averages use the expected holding time in each visited
// state and waits use the expected FCFS delay given the number an arrival
// finds. The time-average number of busy chargers, whose mean is lambda/mu by
// flow conservation, serves as a control variate fitted over batch means.
// Nothing here uses a closed-form M/M/c result.

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

struct SimEstimate {
  double p0 = 0.0;
  double lq = 0.0;
  double tw = 0.0;
};

inline SimEstimate simulate_mmc(double lambda, double mu, int c, long arrivals, std::uint64_t seed,
                                int batches = 100) {
  struct Batch {
    double time = 0, empty = 0, queue = 0, busy = 0, wait = 0;
    long arrivals = 0;
  };
  std::vector<Batch> bs(static_cast<std::size_t>(batches));
  const long per_batch = std::max(1L, arrivals / batches);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  long n = 0, arrived = 0;
  while (arrived < arrivals) {
    Batch& b = bs[static_cast<std::size_t>(std::min<long>(arrived / per_batch, batches - 1))];
    const double busy = static_cast<double>(std::min<long>(n, c));
    const double rate = lambda + mu * busy;
    const double hold = 1.0 / rate;
    b.time += hold;
    if (n == 0) b.empty += hold;
    b.queue += hold * static_cast<double>(std::max<long>(0, n - c));
    b.busy += hold * busy;
    if (u01(rng) * rate < lambda) {
      if (n >= c) b.wait += static_cast<double>(n - c + 1) / (c * mu);
      ++b.arrivals;
      ++arrived;
      ++n;
    } else {
      --n;
    }
  }
  // Per-batch estimates and the control deviation.
  const double a = lambda / mu;
  std::vector<std::array<double, 4>> y;  // p0, lq, tw, busy - a
  for (const auto& b : bs) {
    if (b.arrivals == 0) continue;
    y.push_back({b.empty / b.time, b.queue / b.time, b.wait / static_cast<double>(b.arrivals), b.busy / b.time - a});
  }
  const double m = static_cast<double>(y.size());
  std::array<double, 4> mean{};
  for (const auto& r : y)
    for (int k = 0; k < 4; ++k) mean[k] += r[k] / m;
  double var_x = 0.0;
  std::array<double, 3> cov{};
  for (const auto& r : y) {
    const double dx = r[3] - mean[3];
    var_x += dx * dx;
    for (int k = 0; k < 3; ++k) cov[k] += (r[k] - mean[k]) * dx;
  }
  std::array<double, 3> est{};
  for (int k = 0; k < 3; ++k) est[k] = mean[k] - (var_x > 0.0 ? cov[k] / var_x : 0.0) * mean[3];
  return {est[0], est[1], est[2]};
}

}  // namespace oracle

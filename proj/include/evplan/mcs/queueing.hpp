#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evplan/errors.hpp"

namespace evplan::mcs {

struct QueueInput {
  double lambda = 0.0;  // arrivals per hour
  double mu = 4.0;      // services per hour per charger
  int c = 1;            // chargers
};

struct QueueMetrics {
  double rho = 0.0;  // per-charger utilisation
  double p0 = 1.0;   // probability the station is empty
  double lq = 0.0;   // mean queue length
  double ls = 0.0;   // mean number in the station
  double tw = 0.0;   // mean wait before service, h
};

struct Unstable : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};

struct NoFeasibleCount : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};

// Steady-state M/M/c measures. Factorials and powers are handled in log
// space so large charger counts do not overflow.
inline QueueMetrics erlang_metrics(const QueueInput& q) {
  if (q.lambda < 0.0 || !(q.mu > 0.0) || q.c < 1)
    throw ValidationError("queue needs lambda >= 0, mu > 0 and at least one charger");
  QueueMetrics m;
  if (q.lambda == 0.0) return m;
  const double a = q.lambda / q.mu;
  const double rho = a / q.c;
  if (rho >= 1.0)
    throw Unstable("utilisation " + std::to_string(rho) + " >= 1 with " + std::to_string(q.c) +
                   " chargers; more chargers required");
  const double log_a = std::log(a);
  // log of a^c / c!
  const double log_tail = q.c * log_a - std::lgamma(q.c + 1.0);
  double hi = log_tail - std::log1p(-rho);
  for (int l = 0; l < q.c; ++l) hi = std::max(hi, l * log_a - std::lgamma(l + 1.0));
  double sum = std::exp(log_tail - std::log1p(-rho) - hi);
  for (int l = 0; l < q.c; ++l) sum += std::exp(l * log_a - std::lgamma(l + 1.0) - hi);
  m.rho = rho;
  m.p0 = std::exp(-hi) / sum;
  m.lq = std::exp(log_tail) * rho / ((1.0 - rho) * (1.0 - rho)) * m.p0;
  m.ls = m.lq + a;
  m.tw = m.lq / q.lambda;
  return m;
}

// Fewest chargers that keep the queue stable and the mean wait within `tw_limit_h`.
inline int min_servers(double lambda, double mu, double tw_limit_h, int c_max) {
  if (!(mu > 0.0)) throw ValidationError("service rate must be positive");
  if (lambda <= 0.0) return 1;
  int c = std::max(1, static_cast<int>(std::floor(lambda / mu)) + 1);
  for (; c <= c_max; ++c)
    if (erlang_metrics({lambda, mu, c}).tw <= tw_limit_h) return c;
  throw NoFeasibleCount("no charger count up to " + std::to_string(c_max) + " keeps the wait at lambda = " +
                        std::to_string(lambda) + " within " + std::to_string(tw_limit_h) + " h");
}

}  // namespace evplan::mcs

#include "ehdcs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "ehdcs/parallel.hpp"

namespace ehdcs {

Interval wilson_interval(long long hits, long long trials, double z) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be > 0");
  if (hits < 0 || hits > trials) throw std::invalid_argument("wilson_interval: hits out of range");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double low = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  const double high = hits == trials ? 1.0 : std::min(1.0, centre + half);
  return {low, high};
}

double PidrEstimate::standard_error() const {
  if (trials <= 0) return 0.0;
  return std::sqrt(pidr * (1.0 - pidr) / static_cast<double>(trials));
}

PidrEstimate make_estimate(long long failures, long long trials, std::uint64_t seed,
                           std::uint64_t digest) {
  PidrEstimate e;
  e.failures = failures;
  e.trials = trials;
  e.pidr = static_cast<double>(failures) / static_cast<double>(trials);
  e.ci95 = wilson_interval(failures, trials);
  e.seed = seed;
  e.config_digest = digest;
  return e;
}

int default_workers() {
  if (const char* env = std::getenv("EHDCS_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace ehdcs

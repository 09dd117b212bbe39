#pragma once

#include <cstdint>

namespace ehdcs {

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

// Wilson score interval for a binomial proportion (z = 1.96 -> 95%).
Interval wilson_interval(long long hits, long long trials, double z = 1.959963984540054);

// Empirical probability of incorrect data reconstruction.
struct PidrEstimate {
  long long failures = 0;
  long long trials = 0;
  double pidr = 0.0;
  Interval ci95;
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;
  long long solver_failures = 0;  // counted as failures as well

  // Binomial standard error sqrt(p (1 - p) / trials).
  double standard_error() const;
};

PidrEstimate make_estimate(long long failures, long long trials, std::uint64_t seed,
                           std::uint64_t digest);

}  // namespace ehdcs

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ehdcs/rng.hpp"
#include "ehdcs/types.hpp"

namespace ehdcs {

// Sparse common component + innovations signal model parameters.
struct ScciParams {
  int n = 50;           // samples per signal
  int K = 2;            // sensors
  int s_common = 4;     // nonzeros of the common component
  int s_innov = 1;      // nonzeros of each innovation component
  double value_scale = 1.0;

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

// Support structure of the block location matrix P = [P_c P_1 .. P_K].
struct LocationMatrix {
  int n = 0;
  IndexSet common_support;
  std::vector<IndexSet> innov_supports;

  int sensors() const { return static_cast<int>(innov_supports.size()); }
  int columns() const;

  // Kn x (s_c + K s') 0/1 matrix; block row k is [P_c, 0, .., P_k, .., 0].
  Matrix materialize() const;
};

struct ScciEnsemble {
  ScciParams params;
  Vector z_common;
  std::vector<Vector> z_innov;
  std::vector<Vector> x;
  BasisPtr basis;
  std::vector<Vector> f;
  LocationMatrix location;
};

// Supports uniform without replacement, drawn independently per component
// (overlap allowed); nonzeros i.i.d. N(0, value_scale^2).
LocationMatrix draw_location(const ScciParams& params, Rng& rng);

ScciEnsemble generate_ensemble(const ScciParams& params, BasisPtr basis,
                               std::uint64_t seed);

// q(J, P): common-support positions that sit in every innovation support of
// the sensors outside J. `subset` holds 0-based sensor indices.
int overlap_size(std::span<const int> subset, const LocationMatrix& location);

// Bitmask form used by the subset enumerations (bit k set <=> sensor k in J).
int overlap_size_mask(std::uint32_t subset_mask, const LocationMatrix& location);

bool location_full_rank(const LocationMatrix& location);

std::string ensemble_to_json(const ScciEnsemble& ensemble);

}  // namespace ehdcs

#include "ehdcs/scci.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace ehdcs {

void ScciParams::validate() const {
  if (n < 1) throw std::invalid_argument("ScciParams: n must be >= 1");
  if (K < 1) throw std::invalid_argument("ScciParams: K must be >= 1");
  if (s_common < 0 || s_common > n)
    throw std::invalid_argument("ScciParams: s_common must lie in [0, n]");
  if (s_innov < 0 || s_innov > n)
    throw std::invalid_argument("ScciParams: s_innov must lie in [0, n]");
  if (!(value_scale > 0.0))
    throw std::invalid_argument("ScciParams: value_scale must be positive");
}

int LocationMatrix::columns() const {
  int cols = static_cast<int>(common_support.size());
  for (const auto& s : innov_supports) cols += static_cast<int>(s.size());
  return cols;
}

Matrix LocationMatrix::materialize() const {
  const int K = sensors();
  const int sc = static_cast<int>(common_support.size());
  Matrix P = Matrix::Zero(static_cast<Eigen::Index>(K) * n, columns());
  int col = sc;
  for (int k = 0; k < K; ++k) {
    const Eigen::Index row0 = static_cast<Eigen::Index>(k) * n;
    for (int c = 0; c < sc; ++c) P(row0 + common_support[c], c) = 1.0;
    for (int j : innov_supports[k]) P(row0 + j, col++) = 1.0;
  }
  return P;
}

namespace {

IndexSet sample_support(int n, int count, Rng& rng) {
  // Partial Fisher-Yates keeps the draw exact for any count <= n.
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  IndexSet support(pool.begin(), pool.begin() + count);
  std::sort(support.begin(), support.end());
  return support;
}

}  // namespace

LocationMatrix draw_location(const ScciParams& params, Rng& rng) {
  params.validate();
  LocationMatrix loc;
  loc.n = params.n;
  loc.common_support = sample_support(params.n, params.s_common, rng);
  loc.innov_supports.reserve(params.K);
  for (int k = 0; k < params.K; ++k)
    loc.innov_supports.push_back(sample_support(params.n, params.s_innov, rng));
  return loc;
}

ScciEnsemble generate_ensemble(const ScciParams& params, BasisPtr basis,
                               std::uint64_t seed) {
  params.validate();
  if (!basis || basis->rows() != params.n || basis->cols() != params.n)
    throw std::invalid_argument("generate_ensemble: basis must be n x n");

  Rng rng(seed);
  ScciEnsemble e;
  e.params = params;
  e.basis = std::move(basis);
  e.location = draw_location(params, rng);

  std::normal_distribution<double> value(0.0, params.value_scale);
  e.z_common = Vector::Zero(params.n);
  for (int j : e.location.common_support) e.z_common(j) = value(rng);

  e.z_innov.reserve(params.K);
  e.x.reserve(params.K);
  e.f.reserve(params.K);
  for (int k = 0; k < params.K; ++k) {
    Vector z = Vector::Zero(params.n);
    for (int j : e.location.innov_supports[k]) z(j) = value(rng);
    e.x.push_back(e.z_common + z);
    e.f.push_back(*e.basis * e.x.back());
    e.z_innov.push_back(std::move(z));
  }
  return e;
}

int overlap_size_mask(std::uint32_t subset_mask, const LocationMatrix& location) {
  const int K = location.sensors();
  int count = 0;
  for (int j : location.common_support) {
    bool in_all = true;
    for (int k = 0; k < K && in_all; ++k) {
      if (subset_mask & (1u << k)) continue;
      const auto& s = location.innov_supports[k];
      in_all = std::binary_search(s.begin(), s.end(), j);
    }
    if (in_all) ++count;
  }
  return count;
}

int overlap_size(std::span<const int> subset, const LocationMatrix& location) {
  const int K = location.sensors();
  if (subset.empty()) throw std::invalid_argument("overlap_size: empty subset");
  if (K > 32) throw std::invalid_argument("overlap_size: at most 32 sensors");
  std::uint32_t mask = 0;
  for (int k : subset) {
    if (k < 0 || k >= K)
      throw std::invalid_argument("overlap_size: sensor index out of range");
    mask |= 1u << k;
  }
  return overlap_size_mask(mask, location);
}

bool location_full_rank(const LocationMatrix& location) {
  const int cols = location.columns();
  if (cols == 0) return true;
  Eigen::ColPivHouseholderQR<Matrix> qr(location.materialize());
  return qr.rank() == cols;
}

std::string ensemble_to_json(const ScciEnsemble& e) {
  using nlohmann::json;
  auto sparse = [](const Vector& v) {
    json idx = json::array(), val = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (v(i) != 0.0) {
        idx.push_back(i);
        val.push_back(v(i));
      }
    return json{{"indices", idx}, {"values", val}};
  };
  json j;
  j["n"] = e.params.n;
  j["K"] = e.params.K;
  j["s_common"] = e.params.s_common;
  j["s_innov"] = e.params.s_innov;
  j["value_scale"] = e.params.value_scale;
  j["z_common"] = sparse(e.z_common);
  j["z_innov"] = json::array();
  for (const auto& z : e.z_innov) j["z_innov"].push_back(sparse(z));
  j["common_support"] = e.location.common_support;
  j["innov_supports"] = e.location.innov_supports;
  return j.dump(2);
}

}  // namespace ehdcs

#include "ehdcs/rng.hpp"
#include "ehdcs/types.hpp"

namespace ehdcs {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial,
                          std::uint64_t stream, std::uint64_t sub) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ trial);
  h = splitmix64(h ^ (stream * 0xD6E8FEB86659FD93ULL));
  h = splitmix64(h ^ (sub * 0xA0761D6478BD642FULL));
  return h;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

BasisPtr identity_basis(int n) {
  return std::make_shared<const Matrix>(Matrix::Identity(n, n));
}

}  // namespace ehdcs

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>
#include <boost/random/normal_distribution.hpp>

namespace pi2dof {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and an index path,
/// e.g. child_seed(master, {iter, i, j, k}). Pure, so rollouts can be
/// scheduled in any order and still see the same randomness.
inline std::uint64_t child_seed(std::uint64_t master,
                                std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t v : path) h = mix64(h ^ mix64(v + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

// Boost's ziggurat sampler: several times faster than the polar method in
// libstdc++ and produces the same stream on every standard library.
using NormalDist = boost::random::normal_distribution<double>;

inline double standard_normal(Rng& rng) { return NormalDist()(rng); }

inline void fill_standard_normal(Eigen::VectorXd& v, Eigen::Index n, Rng& rng) {
  NormalDist d;
  v.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
}

inline Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd v;
  fill_standard_normal(v, n, rng);
  return v;
}

inline Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows,
                                              Eigen::Index cols, Rng& rng) {
  NormalDist d;
  Eigen::MatrixXd m(rows, cols);
  // Row-major fill order so the draw sequence matches the serialized layout.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = d(rng);
  return m;
}

}  // namespace pi2dof

#pragma once

#include <cmath>
#include <random>

#include "lmc/types.hpp"

namespace lmc::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  Mat symmetric(int n, double lo, double hi) {
    Mat a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) a(i, j) = a(j, i) = uniform(lo, hi);
    }
    return a;
  }

  /// B^T B + floor I with B entries in [-scale, scale].
  Mat spd(int n, double scale, double floor) {
    Mat b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) b(i, j) = uniform(-scale, scale);
    }
    Mat a = b.transpose() * b;
    for (int i = 0; i < n; ++i) a(i, i) += floor;
    return a;
  }

  Vec vec(int n, double lo, double hi) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lmc::testing

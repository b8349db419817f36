#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jsqa/config.hpp"
#include "jsqa/distribution.hpp"
#include "jsqa/rng.hpp"

namespace jsqa::test {

using D = BoundedDistribution;

inline SystemConfig make_config(double gamma, D arrivals, std::vector<D> services) {
  SystemConfig c;
  c.n = static_cast<int>(services.size());
  c.gamma = gamma;
  c.arrivals = std::move(arrivals);
  c.services = std::move(services);
  return c;
}

// The single-server config used by the oracle comparisons.
inline SystemConfig ssq_config(double gamma = 0.1) {
  return make_config(gamma, D::bernoulli_scaled(1, 0.3), {D::bernoulli_scaled(1, 0.4)});
}

inline SystemConfig jsq2_config(double gamma = 0.1) {
  return make_config(gamma, D::bernoulli_scaled(2, 0.2), {D::bernoulli_scaled(1, 0.25), D::bernoulli_scaled(1, 0.25)});
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

template <class Range>
Moments sample_moments(const Range& xs) {
  double s = 0.0, s2 = 0.0, n = 0.0;
  for (double x : xs) {
    s += x;
    s2 += x * x;
    n += 1.0;
  }
  const double m = s / n;
  return {m, (s2 - n * m * m) / (n - 1.0)};
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("jsqa_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace jsqa::test

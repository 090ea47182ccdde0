#ifndef CGA_TESTS_TESTUTIL_HPP_
#define CGA_TESTS_TESTUTIL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "cga/coalition.hpp"
#include "cga/game.hpp"
#include "cga/rng.hpp"

namespace cga::test {

// Random dense game with v(empty) = 0 and i.i.d. uniform values in
// [-scale, scale].
inline Game random_game(int n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<double> values(std::size_t{1} << n, 0.0);
  for (std::size_t mask = 1; mask < values.size(); ++mask) {
    values[mask] = rng.uniform_pm(scale);
  }
  return Game(PlayerUniverse::Synthetic(n), std::move(values));
}

// Independent oracle for model evaluation: enumerate every subset of c and
// look the weight up in the map, instead of scanning stored weights.
inline double eval_by_subset_enumeration(const CgaModel& model, Coalition c) {
  double total = 0.0;
  for_each_subset(c.mask, [&](Coalition s) {
    if (!s.empty()) total += model.weight(s);
  });
  return total;
}

// Independent Shapley oracle: average marginal contribution over all n!
// player orderings. Exponentially slower than either library path; intended
// for n <= 6.
inline std::vector<double> shapley_by_permutations(const Game& g) {
  const int n = g.players();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  std::size_t count = 0;
  do {
    std::uint64_t mask = 0;
    double prev = g.value(Coalition(0));
    for (int player : order) {
      mask |= std::uint64_t{1} << player;
      const double cur = g.value(Coalition(mask));
      phi[static_cast<std::size_t>(player)] += cur - prev;
      prev = cur;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& p : phi) p /= static_cast<double>(count);
  return phi;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace cga::test

#endif  // CGA_TESTS_TESTUTIL_HPP_

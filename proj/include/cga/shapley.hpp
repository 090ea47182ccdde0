// Copyright 2026 The CGA Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CGA_SHAPLEY_HPP_
#define CGA_SHAPLEY_HPP_

#include <cstdint>
#include <vector>

#include "cga/coalition.hpp"
#include "cga/game.hpp"

namespace cga {

inline constexpr int kBruteForceMaxPlayers = 20;

// Closed-form Shapley from interaction weights: each stored omega_S
// contributes omega_S / |S| to every member of S. One pass over the weight
// map, so the cost is linear in the number of stored weights.
inline Allocation shapley_from_weights(const CgaModel& model) {
  std::vector<double> phi(static_cast<std::size_t>(model.players()), 0.0);
  for (const auto& [s, w] : model.weights()) {
    const double share = w / s.size();
    for (std::uint64_t m = s.mask; m != 0; m &= m - 1) {
      phi[static_cast<std::size_t>(std::countr_zero(m))] += share;
    }
  }
  return Allocation(model.universe(), std::move(phi));
}

namespace internal {

// phi_i = sum over S not containing i of |S|!(n-|S|-1)!/n! (v(S+i) - v(S)),
// evaluated for the subgame on `domain`. One scan of the subsets of domain.
template <typename ValueFn>
void shapley_exact_on(ValueFn&& value, Coalition domain,
                      std::vector<double>& phi) {
  const int n = domain.size();
  std::vector<double> size_weight(static_cast<std::size_t>(n), 0.0);
  double factor = 1.0 / n;  // |S|!(n-|S|-1)!/n! at |S| = 0 is 1/n.
  for (int s = 0; s < n; ++s) {
    size_weight[s] = factor;
    // From size s to s+1: multiply by (s+1)/(n-s-1).
    factor *= static_cast<double>(s + 1) / static_cast<double>(n - s - 1);
  }
  const std::uint64_t rest = domain.mask;
  std::uint64_t sub = rest;
  while (true) {
    const double base = value(Coalition(sub));
    const int size = std::popcount(sub);
    for (std::uint64_t m = rest & ~sub; m != 0; m &= m - 1) {
      const int player = std::countr_zero(m);
      const std::uint64_t joined = sub | (m & (~m + 1));
      phi[static_cast<std::size_t>(player)] +=
          size_weight[size] * (value(Coalition(joined)) - base);
    }
    if (sub == 0) break;
    sub = (sub - 1) & rest;
  }
}

}  // namespace internal

// Direct evaluation of the Shapley definition over all 2^n coalitions.
inline Allocation shapley_bruteforce(const Game& g) {
  const int n = g.players();
  if (n > kBruteForceMaxPlayers) {
    throw CapacityError("shapley_bruteforce limited to n <= 20");
  }
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  internal::shapley_exact_on([&](Coalition c) { return g.value(c); },
                             g.universe().grand(), phi);
  return Allocation(g.universe(), std::move(phi));
}

inline void check_partition(const PlayerUniverse& universe,
                            const std::vector<Coalition>& groups) {
  std::uint64_t seen = 0;
  for (Coalition g : groups) {
    universe.check_coalition(g);
    if (g.empty()) throw DomainError("partition groups must be non-empty");
    if (seen & g.mask) throw DomainError("partition groups overlap");
    seen |= g.mask;
  }
  if (seen != universe.grand().mask) {
    throw DomainError("partition does not cover the universe");
  }
}

namespace internal {

template <typename ValueFn>
Allocation group_shapley_impl(const PlayerUniverse& universe, ValueFn&& value,
                              const std::vector<Coalition>& groups) {
  check_partition(universe, groups);
  std::vector<double> phi(static_cast<std::size_t>(universe.size()), 0.0);
  for (Coalition g : groups) {
    if (g.size() > kBruteForceMaxPlayers) {
      throw CapacityError("group_shapley group size limited to 20");
    }
    shapley_exact_on(value, g, phi);
  }
  return Allocation(universe, std::move(phi));
}

}  // namespace internal

// Shapley values computed per group: player i in group G gets its Shapley
// value in the subgame restricted to subsets of G.
inline Allocation group_shapley(const Game& g,
                                const std::vector<Coalition>& groups) {
  return internal::group_shapley_impl(
      g.universe(), [&](Coalition c) { return g.value(c); }, groups);
}

inline Allocation group_shapley(const CgaModel& model,
                                const std::vector<Coalition>& groups) {
  return internal::group_shapley_impl(
      model.universe(), [&](Coalition c) { return model.evaluate(c); },
      groups);
}

}  // namespace cga

#endif  // CGA_SHAPLEY_HPP_

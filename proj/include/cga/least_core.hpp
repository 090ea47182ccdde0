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

#ifndef CGA_LEAST_CORE_HPP_
#define CGA_LEAST_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cga/coalition.hpp"
#include "cga/game.hpp"
#include "cga/rng.hpp"

namespace cga {

// Sample size for a delta-probable least-core estimate, with the failure
// probability Delta over the draw. The multiplicative constant is fixed at 8
// and validated empirically by the acceptance suite.
struct SampleBudget {
  double delta = 0.1;
  double Delta = 0.1;
  std::int64_t m = 1;

  static SampleBudget from_probabilities(double delta, double Delta) {
    if (delta <= 0.0 || delta >= 1.0 || Delta <= 0.0 || Delta >= 1.0) {
      throw DomainError("delta and Delta must lie in (0, 1)");
    }
    SampleBudget b;
    b.delta = delta;
    b.Delta = Delta;
    b.m = static_cast<std::int64_t>(
        std::ceil(8.0 * std::log(1.0 / Delta) / (delta * delta)));
    return b;
  }
};

struct LeastCoreEstimate {
  Allocation allocation;
  double e_hat = 0.0;
  std::int64_t samples_used = 0;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  // Which value oracle produced the deficits (game table or CGA model).
  std::string value_kind;
};

struct DeficitReport {
  double value = 0.0;
  bool efficiency_warning = false;
};

namespace internal {

inline double deficit(double coalition_value, const Allocation& x,
                      Coalition c) {
  return coalition_value - x.total(c);
}

// e_hat over m uniform coalition draws plus the empty coalition. Draw t
// comes from the stream keyed by (seed, t), which makes a larger budget a
// superset of a smaller one and e_hat monotone in m.
template <typename ValueFn>
LeastCoreEstimate sampled_least_core_impl(const PlayerUniverse& universe,
                                          ValueFn&& value,
                                          const Allocation& x,
                                          const SampleBudget& budget,
                                          std::uint64_t seed,
                                          std::string kind) {
  check_same_universe(universe, x.universe);
  if (budget.m < 1) throw DomainError("sample budget must be >= 1");
  const int n = universe.size();
  const std::uint64_t table = std::uint64_t{1} << n;

  LeastCoreEstimate estimate{x, 0.0, 0, seed, false, std::move(kind)};
  double best = value(Coalition(0));  // the empty coalition's deficit
  if (budget.m >= static_cast<std::int64_t>(table)) {
    // Full enumeration: the exact maximum over every coalition.
    for (std::uint64_t mask = 1; mask < table; ++mask) {
      best = std::max(best, deficit(value(Coalition(mask)), x,
                                    Coalition(mask)));
    }
    estimate.samples_used = static_cast<std::int64_t>(table);
    estimate.exhaustive = true;
  } else {
    for (std::int64_t t = 0; t < budget.m; ++t) {
      Rng rng(seed, static_cast<std::uint64_t>(t));
      const Coalition c(rng.uniform_int(table));
      best = std::max(best, deficit(value(c), x, c));
    }
    estimate.samples_used = budget.m;
  }
  estimate.e_hat = best;
  return estimate;
}

}  // namespace internal

inline LeastCoreEstimate sampled_least_core_value(const Game& g,
                                                  const Allocation& x,
                                                  const SampleBudget& budget,
                                                  std::uint64_t seed) {
  return internal::sampled_least_core_impl(
      g.universe(), [&](Coalition c) { return g.value(c); }, x, budget, seed,
      "game");
}

inline LeastCoreEstimate sampled_least_core_value(const CgaModel& model,
                                                  const Allocation& x,
                                                  const SampleBudget& budget,
                                                  std::uint64_t seed) {
  return internal::sampled_least_core_impl(
      model.universe(), [&](Coalition c) { return model.evaluate(c); }, x,
      budget, seed, "model");
}

// Maximum deficit v(C) - x(C) over all proper non-empty coalitions. The raw
// maximum is returned even when negative. An allocation that misses
// efficiency by more than 1e-6 only raises a warning flag.
inline DeficitReport exact_max_deficit(const Game& g, const Allocation& x) {
  check_same_universe(g.universe(), x.universe);
  const int n = g.players();
  check_dense_capacity(n, 20, "exact_max_deficit");
  DeficitReport report;
  const Coalition grand = g.universe().grand();
  report.efficiency_warning =
      std::abs(x.total(grand) - g.value(grand)) > 1e-6;
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < grand.mask; ++mask) {
    best = std::max(best,
                    internal::deficit(g.values()[mask], x, Coalition(mask)));
  }
  report.value = best;
  return report;
}

// Projected subgradient descent on the maximum deficit over the efficiency
// hyperplane sum x = v(A), with a diminishing step and the best iterate
// kept. Ties at the maximum are broken uniformly from the seeded stream.
inline Allocation improve_allocation(const Game& g, const Allocation& x0,
                                     int steps, double step_size,
                                     std::uint64_t seed) {
  check_same_universe(g.universe(), x0.universe);
  const int n = g.players();
  check_dense_capacity(n, 12, "improve_allocation");
  if (steps < 0 || step_size <= 0.0) {
    throw DomainError("steps must be >= 0 and step_size > 0");
  }
  const Coalition grand = g.universe().grand();
  Rng rng(seed);

  auto max_deficit_set = [&](const Allocation& x, double* out_value) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::uint64_t> argmax;
    for (std::uint64_t mask = 1; mask < grand.mask; ++mask) {
      const double d = internal::deficit(g.values()[mask], x,
                                         Coalition(mask));
      if (d > best) {
        best = d;
        argmax.assign(1, mask);
      } else if (d == best) {
        argmax.push_back(mask);
      }
    }
    *out_value = best;
    return argmax;
  };

  auto project = [&](std::vector<double>& payoffs) {
    double total = 0.0;
    for (double p : payoffs) total += p;
    const double shift = (total - g.value(grand)) / n;
    for (double& p : payoffs) p -= shift;
  };

  Allocation best = x0;
  double best_value = exact_max_deficit(g, x0).value;

  std::vector<double> current = x0.payoffs;
  project(current);
  for (int t = 0; t < steps; ++t) {
    Allocation iterate(g.universe(), current);
    double value;
    const auto argmax = max_deficit_set(iterate, &value);
    if (value < best_value) {
      best = iterate;
      best_value = value;
    }
    if (argmax.empty()) break;  // degenerate one-player game
    const std::uint64_t chosen =
        argmax[static_cast<std::size_t>(rng.uniform_int(argmax.size()))];
    const double step = step_size / std::sqrt(static_cast<double>(t + 1));
    for (std::uint64_t m = chosen; m != 0; m &= m - 1) {
      current[static_cast<std::size_t>(std::countr_zero(m))] += step;
    }
    project(current);
  }
  Allocation final_iterate(g.universe(), current);
  const double final_value = exact_max_deficit(g, final_iterate).value;
  if (final_value < best_value) {
    best = final_iterate;
  }
  return best;
}

}  // namespace cga

#endif  // CGA_LEAST_CORE_HPP_

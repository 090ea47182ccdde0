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

#ifndef CGA_EXPERIMENTS_HPP_
#define CGA_EXPERIMENTS_HPP_

#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "cga/coalition.hpp"
#include "cga/game.hpp"
#include "cga/io.hpp"
#include "cga/rng.hpp"

namespace cga {

// Team-completion query: extend `base` with `slots` players chosen from
// `pool`.
struct CompletionQuery {
  Coalition base;
  int slots = 1;
  Coalition pool;

  void validate(const PlayerUniverse& universe) const {
    universe.check_coalition(base);
    universe.check_coalition(pool);
    if (!base.disjoint(pool)) {
      throw DomainError("candidate pool must be disjoint from the base team");
    }
    if (slots < 1) throw DomainError("slots must be >= 1");
    if (pool.size() < slots) {
      throw DomainError("pool smaller than the number of slots");
    }
  }
};

struct CompletionResult {
  Coalition team;
  double score = 0.0;
  std::uint64_t candidates = 0;
};

namespace internal {

// Exhaustive scan of all slots-subsets of the pool; ties go to the smallest
// coalition mask.
template <typename ValueFn>
CompletionResult best_completion_impl(const PlayerUniverse& universe,
                                      ValueFn&& value,
                                      const CompletionQuery& q) {
  q.validate(universe);
  const std::uint64_t count = binomial_u64(q.pool.size(), q.slots);
  if (count > 10'000'000ULL) {
    throw CapacityError("completion search over " + std::to_string(count) +
                        " candidate teams exceeds the 1e7 budget");
  }
  const std::vector<int> pool = q.pool.members();
  std::vector<int> pick(static_cast<std::size_t>(q.slots));
  std::iota(pick.begin(), pick.end(), 0);

  CompletionResult best;
  best.candidates = count;
  bool first = true;
  while (true) {
    std::uint64_t addition = 0;
    for (int idx : pick) {
      addition |= std::uint64_t{1} << pool[static_cast<std::size_t>(idx)];
    }
    const Coalition team(q.base.mask | addition);
    const double score = value(team);
    if (first || score > best.score ||
        (score == best.score && team.mask < best.team.mask)) {
      best.team = team;
      best.score = score;
      first = false;
    }
    // Next combination in lexicographic order.
    int i = q.slots - 1;
    while (i >= 0 &&
           pick[static_cast<std::size_t>(i)] == q.pool.size() - q.slots + i) {
      --i;
    }
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < q.slots; ++j) {
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(i)] +
                                          (j - i);
    }
  }
  return best;
}

}  // namespace internal

inline CompletionResult best_completion(const Game& g,
                                        const CompletionQuery& q) {
  return internal::best_completion_impl(
      g.universe(), [&](Coalition c) { return g.value(c); }, q);
}

inline CompletionResult best_completion(const CgaModel& model,
                                        const CompletionQuery& q) {
  return internal::best_completion_impl(
      model.universe(), [&](Coalition c) { return model.evaluate(c); }, q);
}

namespace internal {

// Uniform random size-m subset of [0, n) from the per-sample stream.
inline Coalition random_team(int n, int team_size, Rng& rng) {
  std::uint64_t mask = 0;
  int chosen = 0;
  // Floyd's algorithm: for j in [n - m, n), pick t in [0, j]; insert t or j.
  for (int j = n - team_size; j < n; ++j) {
    const int t = static_cast<int>(rng.uniform_int(
        static_cast<std::uint64_t>(j) + 1));
    const std::uint64_t bit = std::uint64_t{1} << t;
    if (mask & bit) {
      mask |= std::uint64_t{1} << j;
    } else {
      mask |= bit;
    }
    ++chosen;
  }
  (void)chosen;
  return Coalition(mask);
}

template <typename ValueFn>
double score_team_percentile_impl(const PlayerUniverse& universe,
                                  ValueFn&& value, Coalition team,
                                  std::int64_t random_teams, int team_size,
                                  std::uint64_t seed) {
  universe.check_coalition(team);
  const int n = universe.size();
  if (team_size < 1 || team_size > n) {
    throw DomainError("team_size must be in [1, n]");
  }
  if (random_teams < 1) throw DomainError("need at least one random team");
  const double target = value(team);
  std::int64_t below = 0;
  for (std::int64_t t = 0; t < random_teams; ++t) {
    Rng rng(seed, static_cast<std::uint64_t>(t));
    if (value(random_team(n, team_size, rng)) < target) ++below;
  }
  return static_cast<double>(below) / static_cast<double>(random_teams);
}

}  // namespace internal

// Fraction of uniformly random distinct teams of the given size scoring
// strictly below the target team.
inline double score_team_percentile(const Game& g, Coalition team,
                                    std::int64_t random_teams, int team_size,
                                    std::uint64_t seed) {
  return internal::score_team_percentile_impl(
      g.universe(), [&](Coalition c) { return g.value(c); }, team,
      random_teams, team_size, seed);
}

inline double score_team_percentile(const CgaModel& model, Coalition team,
                                    std::int64_t random_teams, int team_size,
                                    std::uint64_t seed) {
  return internal::score_team_percentile_impl(
      model.universe(), [&](Coalition c) { return model.evaluate(c); }, team,
      random_teams, team_size, seed);
}

struct SimulationOutput {
  std::string csv_path;
  std::string model_path;
  std::uint64_t rows = 0;
};

inline std::string simulation_model_path(const std::string& csv_path) {
  const std::string suffix = ".csv";
  if (csv_path.size() > suffix.size() &&
      csv_path.compare(csv_path.size() - suffix.size(), suffix.size(),
                       suffix) == 0) {
    return csv_path.substr(0, csv_path.size() - suffix.size()) +
           ".model.json";
  }
  return csv_path + ".model.json";
}

// Writes a performance CSV of a random order-k model evaluated on every
// coalition of the requested sizes, plus optional i.i.d. Gaussian
// observation noise, and the generating weights as model JSON next to it.
// Byte-identical for identical arguments.
inline SimulationOutput simulate_game(int n, int k, std::uint64_t seed,
                                      double noise_sd,
                                      const std::vector<int>& sizes,
                                      const std::string& out_path) {
  if (noise_sd < 0.0) throw DomainError("noise_sd must be >= 0");
  if (sizes.empty()) throw DomainError("need at least one coalition size");
  for (int s : sizes) {
    if (s < 0 || s > n) throw DomainError("coalition sizes must lie in [0, n]");
  }
  const CgaModel model = random_cga(n, k, seed);
  Rng noise(seed, 0xD1CEULL);

  std::vector<PerformanceRow> rows;
  for (int s : sizes) {
    for (Coalition c : coalitions_of_size(n, s)) {
      double value = model.evaluate(c);
      if (noise_sd > 0.0) value += noise_sd * noise.normal();
      rows.push_back({c, value});
    }
  }
  PerformanceDataset data(model.universe(), std::move(rows));

  SimulationOutput out;
  out.csv_path = out_path;
  out.model_path = simulation_model_path(out_path);
  out.rows = data.rows().size();
  write_text_file(out.csv_path, performance_csv_string(data));
  write_model_json(model, out.model_path);
  return out;
}

}  // namespace cga

#endif  // CGA_EXPERIMENTS_HPP_

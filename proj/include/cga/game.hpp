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

#ifndef CGA_GAME_HPP_
#define CGA_GAME_HPP_

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "cga/coalition.hpp"
#include "cga/rng.hpp"

namespace cga {

inline constexpr int kDenseTableMaxPlayers = 24;

// Exact characteristic function: a dense table of 2^n coalition values
// indexed by mask. values[0] is the empty coalition, which may be nonzero
// for data-born games (CGA models always evaluate the empty coalition to 0).
class Game {
 public:
  Game(PlayerUniverse universe, std::vector<double> values)
      : universe_(std::move(universe)), values_(std::move(values)) {
    check_dense_capacity(universe_.size(), kDenseTableMaxPlayers, "Game");
    if (values_.size() != (std::size_t{1} << universe_.size())) {
      throw DomainError("game table must have exactly 2^n entries");
    }
  }

  const PlayerUniverse& universe() const { return universe_; }
  int players() const { return universe_.size(); }
  std::size_t table_size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

  double value(Coalition c) const {
    universe_.check_coalition(c);
    return values_[c.mask];
  }
  double operator()(Coalition c) const { return value(c); }

 private:
  PlayerUniverse universe_;
  std::vector<double> values_;
};

using WeightMap = std::map<Coalition, double, SizeThenMaskLess>;

// Order-k interaction model: sparse weights omega_S for 1 <= |S| <= k,
// absent keys meaning zero. Evaluation of a coalition sums the stored
// weights contained in it, so the empty coalition is always 0.
class CgaModel {
 public:
  CgaModel(PlayerUniverse universe, int order)
      : universe_(std::move(universe)), order_(order) {
    if (order_ < 1) throw DomainError("model order must be >= 1");
    if (order_ > universe_.size()) {
      throw DomainError("model order exceeds player count");
    }
  }

  const PlayerUniverse& universe() const { return universe_; }
  int players() const { return universe_.size(); }
  int order() const { return order_; }
  const WeightMap& weights() const { return weights_; }

  void set_weight(Coalition s, double w) {
    universe_.check_coalition(s);
    const int size = s.size();
    if (size < 1 || size > order_) {
      throw DomainError("weight subset size must be in [1, order]");
    }
    weights_[s] = w;
  }

  double weight(Coalition s) const {
    auto it = weights_.find(s);
    return it == weights_.end() ? 0.0 : it->second;
  }

  // Sum of stored weights whose subset lies inside c. Linear in the number
  // of stored weights.
  double evaluate(Coalition c) const {
    universe_.check_coalition(c);
    double v = 0.0;
    for (const auto& [s, w] : weights_) {
      if (s.subset_of(c)) v += w;
    }
    return v;
  }
  double operator()(Coalition c) const { return evaluate(c); }

 private:
  PlayerUniverse universe_;
  int order_;
  WeightMap weights_;
};

// Unique full-order interaction weights of an exact game, computed by
// increasing subset size: omega_S = v(S) - sum of omega over proper
// non-empty subsets of S. Implemented as the fast in-place transform on a
// copy of the table with the empty entry forced to 0, which realizes that
// recursion in O(n 2^n). The round trip through evaluate() reproduces the
// game on every non-empty coalition; the empty coalition evaluates to 0 by
// the model convention.
inline CgaModel weights_from_game(const Game& g) {
  const int n = g.players();
  std::vector<double> w = g.values();
  w[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    for (std::uint64_t mask = 0; mask < w.size(); ++mask) {
      if (mask & bit) w[mask] -= w[mask ^ bit];
    }
  }
  CgaModel model(g.universe(), n);
  for (std::uint64_t mask = 1; mask < w.size(); ++mask) {
    if (w[mask] != 0.0) model.set_weight(Coalition(mask), w[mask]);
  }
  return model;
}

// Drops every weight with |S| > k. The resulting order is min(k, order).
inline CgaModel truncate(const CgaModel& model, int k) {
  if (k < 1) throw DomainError("truncation order must be >= 1");
  const int order = std::min(k, model.order());
  CgaModel out(model.universe(), order);
  for (const auto& [s, w] : model.weights()) {
    if (s.size() <= order) out.set_weight(s, w);
  }
  return out;
}

// Dense table induced by a model.
inline Game to_game(const CgaModel& model) {
  const int n = model.players();
  check_dense_capacity(n, kDenseTableMaxPlayers, "to_game");
  std::vector<double> values(std::size_t{1} << n, 0.0);
  // Scatter each weight onto its supersets; O(sum over weights of 2^(n-|S|)),
  // far cheaper than evaluating the sparse sum per coalition for small k.
  for (const auto& [s, w] : model.weights()) {
    const std::uint64_t rest = model.universe().grand().mask & ~s.mask;
    std::uint64_t sup = rest;
    while (true) {
      values[s.mask | sup] += w;
      if (sup == 0) break;
      sup = (sup - 1) & rest;
    }
  }
  return Game(model.universe(), std::move(values));
}

// Random order-k model over a synthetic universe: every subset with
// 1 <= |S| <= k gets an i.i.d. weight uniform in [-weight_scale,
// weight_scale], drawn in size-then-mask order from the seeded stream.
inline CgaModel random_cga(int n, int k, std::uint64_t seed,
                           double weight_scale = 1.0) {
  if (k < 1 || k > n) throw DomainError("random_cga needs 1 <= k <= n");
  check_dense_capacity(n, kDenseTableMaxPlayers, "random_cga");
  CgaModel model(PlayerUniverse::Synthetic(n), k);
  Rng rng(seed);
  for (Coalition s : canonical_weight_order(n, k)) {
    model.set_weight(s, rng.uniform_pm(weight_scale));
  }
  return model;
}

}  // namespace cga

#endif  // CGA_GAME_HPP_

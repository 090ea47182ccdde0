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

#ifndef CGA_COALITION_HPP_
#define CGA_COALITION_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cga {

// Error taxonomy mirrored by the CLI exit codes: format 2, capacity 3,
// numeric 4. DomainError covers contract violations on otherwise
// well-formed inputs and maps to the format code.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A coalition is a bitmask over player indices: bit i set <=> player i is a
// member. All dense tables in the library are indexed by mask value.
struct Coalition {
  std::uint64_t mask = 0;

  constexpr Coalition() = default;
  constexpr explicit Coalition(std::uint64_t m) : mask(m) {}

  int size() const { return std::popcount(mask); }
  bool empty() const { return mask == 0; }
  bool contains(int player) const { return (mask >> player) & 1u; }
  bool subset_of(Coalition other) const { return (mask & ~other.mask) == 0; }
  bool disjoint(Coalition other) const { return (mask & other.mask) == 0; }

  Coalition with(int player) const {
    return Coalition(mask | (std::uint64_t{1} << player));
  }
  Coalition without(int player) const {
    return Coalition(mask & ~(std::uint64_t{1} << player));
  }

  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::uint64_t m = mask; m != 0; m &= m - 1) {
      out.push_back(std::countr_zero(m));
    }
    return out;
  }

  friend bool operator==(Coalition a, Coalition b) { return a.mask == b.mask; }
  friend auto operator<=>(Coalition a, Coalition b) { return a.mask <=> b.mask; }
};

// Size-then-mask order: the canonical ordering for weight maps, design-matrix
// columns, and serialized output.
struct SizeThenMaskLess {
  bool operator()(Coalition a, Coalition b) const {
    const int sa = a.size();
    const int sb = b.size();
    if (sa != sb) return sa < sb;
    return a.mask < b.mask;
  }
  bool operator()(std::uint64_t a, std::uint64_t b) const {
    return (*this)(Coalition(a), Coalition(b));
  }
};

// Ordered set of player ids. Index i <-> ids[i]; all Coalition masks are
// interpreted against this indexing.
class PlayerUniverse {
 public:
  PlayerUniverse() = default;

  explicit PlayerUniverse(std::vector<std::string> ids) : ids_(std::move(ids)) {
    if (ids_.empty()) throw DomainError("player universe must be non-empty");
    if (ids_.size() > 63) {
      throw CapacityError("player universe exceeds 63 players");
    }
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (ids_[i].empty()) throw DomainError("player id must be non-empty");
      auto [it, fresh] = index_.emplace(ids_[i], static_cast<int>(i));
      if (!fresh) throw DomainError("duplicate player id: " + ids_[i]);
    }
  }

  // Synthetic universe p0..p{n-1}, zero padded so lexicographic id order
  // matches index order.
  static PlayerUniverse Synthetic(int n) {
    if (n < 1) throw DomainError("need at least one player");
    int width = 1;
    for (int v = n - 1; v >= 10; v /= 10) ++width;
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::string digits = std::to_string(i);
      ids.push_back("p" + std::string(width - digits.size(), '0') + digits);
    }
    return PlayerUniverse(std::move(ids));
  }

  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(int index) const { return ids_.at(index); }

  int index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DomainError("unknown player id: " + id);
    return it->second;
  }
  bool has(const std::string& id) const { return index_.count(id) > 0; }

  Coalition grand() const {
    return Coalition((std::uint64_t{1} << size()) - 1);
  }

  void check_coalition(Coalition c) const {
    if (c.mask >> size()) {
      throw DomainError("coalition mask has players outside the universe");
    }
  }

  friend bool operator==(const PlayerUniverse& a, const PlayerUniverse& b) {
    return a.ids_ == b.ids_;
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
};

inline void check_same_universe(const PlayerUniverse& a,
                                const PlayerUniverse& b) {
  if (!(a == b)) throw DomainError("mismatched player universes");
}

// Guard for any operation that materializes a dense 2^n table.
inline void check_dense_capacity(int n, int limit, const char* what) {
  if (n > limit) {
    throw CapacityError(std::string(what) + ": n = " + std::to_string(n) +
                        " exceeds limit " + std::to_string(limit));
  }
}

// Per-player payoff vector.
struct Allocation {
  PlayerUniverse universe;
  std::vector<double> payoffs;

  Allocation(PlayerUniverse u, std::vector<double> p)
      : universe(std::move(u)), payoffs(std::move(p)) {
    if (payoffs.size() != static_cast<std::size_t>(universe.size())) {
      throw DomainError("allocation length must equal player count");
    }
  }

  double total(Coalition c) const {
    universe.check_coalition(c);
    double s = 0.0;
    for (std::uint64_t m = c.mask; m != 0; m &= m - 1) {
      s += payoffs[static_cast<std::size_t>(std::countr_zero(m))];
    }
    return s;
  }
};

inline std::uint64_t binomial_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) /
        static_cast<std::uint64_t>(i);
  }
  return r;
}

inline double binomial(int n, int k) {
  return static_cast<double>(binomial_u64(n, k));
}

// Number of weights of a full order-k model: sum_{j=1..k} C(n, j).
inline std::uint64_t weight_count(int n, int k) {
  std::uint64_t d = 0;
  for (int j = 1; j <= k; ++j) d += binomial_u64(n, j);
  return d;
}

// Gosper's hack: next mask with the same popcount, or 0 past the end.
inline std::uint64_t next_same_size_mask(std::uint64_t v, int n) {
  const std::uint64_t t = v | (v - 1);
  const std::uint64_t next =
      (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
  return (next >> n) ? 0 : next;
}

// All coalitions of |C| = size over n players, ascending mask order.
inline std::vector<Coalition> coalitions_of_size(int n, int size) {
  std::vector<Coalition> out;
  if (size < 0 || size > n) return out;
  if (size == 0) {
    out.emplace_back(0);
    return out;
  }
  std::uint64_t v = (std::uint64_t{1} << size) - 1;
  while (v != 0) {
    out.emplace_back(v);
    v = next_same_size_mask(v, n);
  }
  return out;
}

// All coalitions with 1 <= |S| <= k in size-then-mask order: the canonical
// column layout shared by models, design matrices, and serialized weights.
inline std::vector<Coalition> canonical_weight_order(int n, int k) {
  std::vector<Coalition> out;
  out.reserve(weight_count(n, k));
  for (int size = 1; size <= k; ++size) {
    auto level = coalitions_of_size(n, size);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

// Visits every subset of `mask` (including empty and mask itself).
template <typename Fn>
void for_each_subset(std::uint64_t mask, Fn&& fn) {
  std::uint64_t sub = mask;
  while (true) {
    fn(Coalition(sub));
    if (sub == 0) break;
    sub = (sub - 1) & mask;
  }
}

}  // namespace cga

#endif  // CGA_COALITION_HPP_

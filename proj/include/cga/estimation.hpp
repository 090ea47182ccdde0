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

#ifndef CGA_ESTIMATION_HPP_
#define CGA_ESTIMATION_HPP_

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cga/coalition.hpp"
#include "cga/design.hpp"
#include "cga/game.hpp"
#include "cga/rng.hpp"

namespace cga {

struct PerformanceRow {
  Coalition coalition;
  double value = 0.0;
};

// Observed (coalition, value) pairs over one universe.
class PerformanceDataset {
 public:
  PerformanceDataset(PlayerUniverse universe, std::vector<PerformanceRow> rows)
      : universe_(std::move(universe)), rows_(std::move(rows)) {
    for (const PerformanceRow& row : rows_) {
      universe_.check_coalition(row.coalition);
    }
  }

  const PlayerUniverse& universe() const { return universe_; }
  const std::vector<PerformanceRow>& rows() const { return rows_; }

  // A nonzero empty-coalition observation cannot be represented by a CGA
  // model; callers surface this instead of shifting the data.
  bool has_nonzero_empty_value() const {
    for (const PerformanceRow& row : rows_) {
      if (row.coalition.empty() && row.value != 0.0) return true;
    }
    return false;
  }

 private:
  PlayerUniverse universe_;
  std::vector<PerformanceRow> rows_;
};

struct MatchupRow {
  Coalition team_a;
  Coalition team_b;
  bool a_won = false;
};

// Matchup outcomes: disjoint non-empty teams plus a winner indicator.
class MatchupDataset {
 public:
  MatchupDataset(PlayerUniverse universe, std::vector<MatchupRow> rows)
      : universe_(std::move(universe)), rows_(std::move(rows)) {
    for (const MatchupRow& row : rows_) {
      universe_.check_coalition(row.team_a);
      universe_.check_coalition(row.team_b);
      if (row.team_a.empty() || row.team_b.empty()) {
        throw DomainError("matchup teams must be non-empty");
      }
      if (!row.team_a.disjoint(row.team_b)) {
        throw DomainError("matchup teams must be disjoint");
      }
    }
  }

  const PlayerUniverse& universe() const { return universe_; }
  const std::vector<MatchupRow>& rows() const { return rows_; }

 private:
  PlayerUniverse universe_;
  std::vector<MatchupRow> rows_;
};

struct FitConfig {
  double l2 = 0.0;
  int rank = 1;             // low-rank path only
  double learning_rate = 0.001;
  int epochs = 100;
  int batch_size = 0;       // 0 means full batch
  std::uint64_t seed = 0;

  void validate() const {
    if (learning_rate <= 0.0) throw DomainError("learning_rate must be > 0");
    if (epochs < 1) throw DomainError("epochs must be >= 1");
    if (l2 < 0.0) throw DomainError("l2 must be >= 0");
  }
};

struct LeastSquaresFit {
  CgaModel model;
  double training_mse = 0.0;
  bool identified = false;
  int rank = 0;
};

// Exact ERM for an order-k model by normal equations (ridge-augmented when
// l2 > 0). A rank-deficient system with l2 = 0 returns the minimum-norm
// solution and reports identified = false.
inline LeastSquaresFit fit_least_squares(const PerformanceDataset& data,
                                         int k, double l2 = 0.0) {
  const int n = data.universe().size();
  check_dense_capacity(n, kDesignMaxPlayers, "fit_least_squares");
  if (data.rows().empty()) throw DomainError("cannot fit an empty dataset");
  if (l2 < 0.0) throw DomainError("l2 must be >= 0");

  std::vector<Coalition> rows;
  rows.reserve(data.rows().size());
  Eigen::VectorXd y(static_cast<Eigen::Index>(data.rows().size()));
  for (std::size_t i = 0; i < data.rows().size(); ++i) {
    rows.push_back(data.rows()[i].coalition);
    y(static_cast<Eigen::Index>(i)) = data.rows()[i].value;
  }
  DesignMatrix dm = build_design_matrix(n, k, std::move(rows));
  const Eigen::Index d = dm.entries.cols();

  Eigen::VectorXd w;
  int rank;
  if (l2 > 0.0) {
    Eigen::MatrixXd normal = dm.entries.transpose() * dm.entries;
    normal.diagonal().array() += l2;
    w = normal.ldlt().solve(dm.entries.transpose() * y);
    rank = numerical_rank(dm.entries);
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(
        dm.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kRankThreshold);
    w = svd.solve(y);  // minimum-norm solution when rank deficient
    rank = static_cast<int>(svd.rank());
  }

  CgaModel model(data.universe(), k);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (w(j) != 0.0) model.set_weight(dm.cols[static_cast<std::size_t>(j)],
                                      w(j));
  }
  LeastSquaresFit fit{std::move(model), 0.0, rank == static_cast<int>(d),
                      rank};
  fit.training_mse =
      (dm.entries * w - y).squaredNorm() / static_cast<double>(y.size());
  return fit;
}

// v(C) = w . x_C + x_C^T (F G^T) x_C with one-hot team encodings. The
// effective pairwise matrix is the symmetric part of F G^T; the diagonal
// acts as a first-order correction because x_i^2 = x_i.
class LowRankPairwiseModel {
 public:
  LowRankPairwiseModel(PlayerUniverse universe, Eigen::VectorXd w,
                       Eigen::MatrixXd factors_left,
                       Eigen::MatrixXd factors_right)
      : universe_(std::move(universe)),
        w_(std::move(w)),
        left_(std::move(factors_left)),
        right_(std::move(factors_right)) {
    const Eigen::Index n = universe_.size();
    if (w_.size() != n || left_.rows() != n || right_.rows() != n ||
        left_.cols() != right_.cols()) {
      throw DomainError("inconsistent low-rank parameter shapes");
    }
    if (left_.cols() < 1 || left_.cols() > n) {
      throw DomainError("rank must be in [1, n]");
    }
  }

  const PlayerUniverse& universe() const { return universe_; }
  int rank() const { return static_cast<int>(left_.cols()); }
  const Eigen::VectorXd& w() const { return w_; }
  const Eigen::MatrixXd& factors_left() const { return left_; }
  const Eigen::MatrixXd& factors_right() const { return right_; }

  double pair_value(int i, int j) const {
    return left_.row(i).dot(right_.row(j));
  }

  double evaluate(Coalition c) const {
    universe_.check_coalition(c);
    double linear = 0.0;
    Eigen::RowVectorXd sum_left = Eigen::RowVectorXd::Zero(left_.cols());
    Eigen::RowVectorXd sum_right = Eigen::RowVectorXd::Zero(right_.cols());
    for (std::uint64_t m = c.mask; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m);
      linear += w_(i);
      sum_left += left_.row(i);
      sum_right += right_.row(i);
    }
    return linear + sum_left.dot(sum_right);
  }
  double operator()(Coalition c) const { return evaluate(c); }

 private:
  PlayerUniverse universe_;
  Eigen::VectorXd w_;
  Eigen::MatrixXd left_, right_;
};

struct LowRankFit {
  LowRankPairwiseModel model;
  double final_mse = 0.0;
};

namespace internal {

struct PairwiseParams {
  Eigen::VectorXd w;
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
};

inline double pairwise_predict(const PairwiseParams& p, Coalition c) {
  double linear = 0.0;
  Eigen::RowVectorXd sl = Eigen::RowVectorXd::Zero(p.left.cols());
  Eigen::RowVectorXd sr = Eigen::RowVectorXd::Zero(p.right.cols());
  for (std::uint64_t m = c.mask; m != 0; m &= m - 1) {
    const int i = std::countr_zero(m);
    linear += p.w(i);
    sl += p.left.row(i);
    sr += p.right.row(i);
  }
  return linear + sl.dot(sr);
}

// Mean squared error over the given rows plus l2 times the squared
// parameter norm.
inline double pairwise_loss(const PerformanceDataset& data,
                            const std::vector<std::size_t>& batch,
                            const PairwiseParams& p, double l2) {
  double loss = 0.0;
  for (std::size_t idx : batch) {
    const PerformanceRow& row = data.rows()[idx];
    const double err = pairwise_predict(p, row.coalition) - row.value;
    loss += err * err;
  }
  loss /= static_cast<double>(batch.size());
  loss += l2 * (p.w.squaredNorm() + p.left.squaredNorm() +
                p.right.squaredNorm());
  return loss;
}

inline PairwiseParams pairwise_gradient(const PerformanceDataset& data,
                                        const std::vector<std::size_t>& batch,
                                        const PairwiseParams& p, double l2) {
  PairwiseParams g{Eigen::VectorXd::Zero(p.w.size()),
                   Eigen::MatrixXd::Zero(p.left.rows(), p.left.cols()),
                   Eigen::MatrixXd::Zero(p.right.rows(), p.right.cols())};
  const double inv = 2.0 / static_cast<double>(batch.size());
  for (std::size_t idx : batch) {
    const PerformanceRow& row = data.rows()[idx];
    Eigen::RowVectorXd sl = Eigen::RowVectorXd::Zero(p.left.cols());
    Eigen::RowVectorXd sr = Eigen::RowVectorXd::Zero(p.right.cols());
    double linear = 0.0;
    for (std::uint64_t m = row.coalition.mask; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m);
      linear += p.w(i);
      sl += p.left.row(i);
      sr += p.right.row(i);
    }
    const double err = linear + sl.dot(sr) - row.value;
    for (std::uint64_t m = row.coalition.mask; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m);
      g.w(i) += inv * err;
      g.left.row(i) += inv * err * sr;
      g.right.row(i) += inv * err * sl;
    }
  }
  g.w += 2.0 * l2 * p.w;
  g.left += 2.0 * l2 * p.left;
  g.right += 2.0 * l2 * p.right;
  return g;
}

inline std::vector<std::vector<std::size_t>> make_batches(
    std::size_t count, int batch_size, Rng& rng) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  const std::size_t step =
      batch_size <= 0 ? count : static_cast<std::size_t>(batch_size);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < count; start += step) {
    const std::size_t stop = std::min(count, start + step);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

}  // namespace internal

// Mini-batch gradient descent on squared error with weight decay. Plain
// descent, no momentum; initialization and the per-epoch shuffle both come
// from the seeded stream, so the result is a pure function of (data, cfg).
inline LowRankFit fit_lowrank_pairwise(const PerformanceDataset& data,
                                       const FitConfig& cfg) {
  cfg.validate();
  if (data.rows().empty()) throw DomainError("cannot fit an empty dataset");
  const int n = data.universe().size();
  if (cfg.rank < 1 || cfg.rank > n) {
    throw DomainError("cfg.rank must be in [1, n]");
  }

  Rng rng(cfg.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  internal::PairwiseParams p{Eigen::VectorXd(n),
                             Eigen::MatrixXd(n, cfg.rank),
                             Eigen::MatrixXd(n, cfg.rank)};
  for (int i = 0; i < n; ++i) p.w(i) = rng.uniform_pm(scale);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cfg.rank; ++j) p.left(i, j) = rng.uniform_pm(scale);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cfg.rank; ++j) p.right(i, j) = rng.uniform_pm(scale);
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& batch :
         internal::make_batches(data.rows().size(), cfg.batch_size, rng)) {
      internal::PairwiseParams g =
          internal::pairwise_gradient(data, batch, p, cfg.l2);
      p.w -= cfg.learning_rate * g.w;
      p.left -= cfg.learning_rate * g.left;
      p.right -= cfg.learning_rate * g.right;
    }
    if (!p.w.allFinite() || !p.left.allFinite() || !p.right.allFinite()) {
      throw NumericError("fit_lowrank_pairwise diverged at epoch " +
                         std::to_string(epoch));
    }
  }

  std::vector<std::size_t> all(data.rows().size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const double mse = internal::pairwise_loss(data, all, p, 0.0);
  return LowRankFit{LowRankPairwiseModel(data.universe(), std::move(p.w),
                                         std::move(p.left),
                                         std::move(p.right)),
                    mse};
}

// Folds a low-rank pairwise model into order-2 interaction weights:
// omega_i = w_i + V_ii and omega_ij = V_ij + V_ji, V = F G^T. The diagonal
// joins the first-order weights because one-hot encodings square to
// themselves.
inline CgaModel pairwise_to_cga(const LowRankPairwiseModel& m) {
  const int n = m.universe().size();
  CgaModel out(m.universe(), 2);
  for (int i = 0; i < n; ++i) {
    const double wi = m.w()(i) + m.pair_value(i, i);
    if (wi != 0.0) out.set_weight(Coalition(std::uint64_t{1} << i), wi);
    for (int j = i + 1; j < n; ++j) {
      const double wij = m.pair_value(i, j) + m.pair_value(j, i);
      if (wij != 0.0) {
        out.set_weight(Coalition((std::uint64_t{1} << i) |
                                 (std::uint64_t{1} << j)),
                       wij);
      }
    }
  }
  return out;
}

struct BradleyTerryFit {
  CgaModel model;
  double final_nll = 0.0;
  // Post-hoc shift applied to every first-order weight so the mean
  // predicted score over distinct training teams is zero.
  double centering_shift = 0.0;
};

namespace internal {

// Column-index encoding of a team under an order-k weight layout.
struct TeamEncoding {
  std::vector<int> columns;
};

inline std::unordered_map<std::uint64_t, TeamEncoding> encode_teams(
    const MatchupDataset& data, int n, int k,
    const std::vector<Coalition>& cols) {
  std::unordered_map<std::uint64_t, int> col_index;
  col_index.reserve(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    col_index.emplace(cols[j].mask, static_cast<int>(j));
  }
  std::unordered_map<std::uint64_t, TeamEncoding> teams;
  for (const MatchupRow& row : data.rows()) {
    for (Coalition team : {row.team_a, row.team_b}) {
      if (teams.count(team.mask)) continue;
      TeamEncoding enc;
      const auto members = team.members();
      for (int i : members) {
        enc.columns.push_back(
            col_index.at(std::uint64_t{1} << i));
      }
      if (k >= 2) {
        for (std::size_t a = 0; a < members.size(); ++a) {
          for (std::size_t b = a + 1; b < members.size(); ++b) {
            enc.columns.push_back(col_index.at(
                (std::uint64_t{1} << members[a]) |
                (std::uint64_t{1} << members[b])));
          }
        }
      }
      teams.emplace(team.mask, std::move(enc));
    }
  }
  (void)n;
  return teams;
}

inline double team_score(const TeamEncoding& enc, const Eigen::VectorXd& w) {
  double s = 0.0;
  for (int c : enc.columns) s += w(c);
  return s;
}

// Numerically stable log(1 + exp(x)).
inline double log1pexp(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Mean negative log likelihood of the observed outcomes plus l2 penalty.
inline double bt_loss(const MatchupDataset& data,
                      const std::vector<std::size_t>& batch,
                      const std::unordered_map<std::uint64_t, TeamEncoding>&
                          teams,
                      const Eigen::VectorXd& w, double l2) {
  double loss = 0.0;
  for (std::size_t idx : batch) {
    const MatchupRow& row = data.rows()[idx];
    const double gap = team_score(teams.at(row.team_a.mask), w) -
                       team_score(teams.at(row.team_b.mask), w);
    // -log p with p the probability of the observed winner.
    loss += row.a_won ? log1pexp(-gap) : log1pexp(gap);
  }
  loss /= static_cast<double>(batch.size());
  loss += l2 * w.squaredNorm();
  return loss;
}

inline Eigen::VectorXd bt_gradient(
    const MatchupDataset& data, const std::vector<std::size_t>& batch,
    const std::unordered_map<std::uint64_t, TeamEncoding>& teams,
    const Eigen::VectorXd& w, double l2) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t idx : batch) {
    const MatchupRow& row = data.rows()[idx];
    const TeamEncoding& ea = teams.at(row.team_a.mask);
    const TeamEncoding& eb = teams.at(row.team_b.mask);
    const double gap = team_score(ea, w) - team_score(eb, w);
    const double p = 1.0 / (1.0 + std::exp(-gap));
    const double coeff = inv * (p - (row.a_won ? 1.0 : 0.0));
    for (int c : ea.columns) g(c) += coeff;
    for (int c : eb.columns) g(c) -= coeff;
  }
  g += 2.0 * l2 * w;
  return g;
}

}  // namespace internal

// Bradley-Terry fit of an order-k model: win probability is the logistic of
// the score gap, minimized by seeded mini-batch gradient descent. After
// fitting, first-order weights are shifted so the mean predicted score over
// the distinct training teams is exactly zero.
inline BradleyTerryFit fit_bradley_terry(const MatchupDataset& data, int k,
                                         const FitConfig& cfg) {
  cfg.validate();
  if (data.rows().empty()) throw DomainError("cannot fit an empty dataset");
  if (k != 1 && k != 2) {
    throw DomainError("bradley-terry fit supports k in {1, 2}");
  }
  const int n = data.universe().size();
  const std::vector<Coalition> cols = canonical_weight_order(n, k);
  const auto teams = internal::encode_teams(data, n, k, cols);

  Rng rng(cfg.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::VectorXd w(static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = rng.uniform_pm(scale);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& batch :
         internal::make_batches(data.rows().size(), cfg.batch_size, rng)) {
      w -= cfg.learning_rate *
           internal::bt_gradient(data, batch, teams, w, cfg.l2);
    }
    if (!w.allFinite()) {
      throw NumericError("fit_bradley_terry diverged at epoch " +
                         std::to_string(epoch));
    }
  }

  // Center scores over the distinct training teams (deterministic order).
  std::set<std::uint64_t> distinct;
  for (const MatchupRow& row : data.rows()) {
    distinct.insert(row.team_a.mask);
    distinct.insert(row.team_b.mask);
  }
  double mean_score = 0.0;
  double mean_size = 0.0;
  for (std::uint64_t mask : distinct) {
    mean_score += internal::team_score(teams.at(mask), w);
    mean_size += std::popcount(mask);
  }
  mean_score /= static_cast<double>(distinct.size());
  mean_size /= static_cast<double>(distinct.size());
  const double shift = mean_score / mean_size;
  for (int i = 0; i < n; ++i) w(i) -= shift;

  std::vector<std::size_t> all(data.rows().size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const double nll = internal::bt_loss(data, all, teams, w, 0.0);

  CgaModel model(data.universe(), k);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (w(static_cast<Eigen::Index>(j)) != 0.0) {
      model.set_weight(cols[j], w(static_cast<Eigen::Index>(j)));
    }
  }
  return BradleyTerryFit{std::move(model), nll, shift};
}

// Logistic of the score gap, computed in the overflow-safe form.
inline double predict_win_prob(const CgaModel& model, Coalition a,
                               Coalition b) {
  if (a.empty() || b.empty()) {
    throw DomainError("matchup teams must be non-empty");
  }
  if (!a.disjoint(b)) throw DomainError("matchup teams must be disjoint");
  const double gap = model.evaluate(a) - model.evaluate(b);
  if (gap >= 0.0) return 1.0 / (1.0 + std::exp(-gap));
  const double e = std::exp(gap);
  return e / (1.0 + e);
}

// Seeded index splitter: shuffles [0, count) and cuts it at the cumulative
// fraction boundaries. Fractions must be non-negative and sum to 1.
inline std::vector<std::vector<std::size_t>> seeded_split(
    std::size_t count, const std::vector<double>& fractions,
    std::uint64_t seed) {
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw DomainError("split fractions must be >= 0");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("split fractions must sum to 1");
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> parts;
  double cumulative = 0.0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    cumulative += fractions[i];
    std::size_t stop = i + 1 == fractions.size()
                           ? count
                           : static_cast<std::size_t>(
                                 std::llround(cumulative *
                                              static_cast<double>(count)));
    stop = std::clamp(stop, start, count);
    parts.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                       order.begin() + static_cast<std::ptrdiff_t>(stop));
    start = stop;
  }
  return parts;
}

}  // namespace cga

#endif  // CGA_ESTIMATION_HPP_

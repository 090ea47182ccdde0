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

#ifndef CGA_ANALYSIS_HPP_
#define CGA_ANALYSIS_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cga/coalition.hpp"
#include "cga/game.hpp"
#include "cga/rng.hpp"
#include "cga/shapley.hpp"

namespace cga {

inline constexpr int kShapleyMatrixMaxPlayers = 14;

// The linear map from the 2^n vector of coalition values to the n Shapley
// values. Entry (i, S) is (1/n) C(n-1,|S|-1)^-1 when i is in S and
// -(1/n) C(n-1,|S|)^-1 otherwise.
struct ShapleyMatrix {
  int n = 0;
  Eigen::MatrixXd entries;  // n x 2^n

  Eigen::VectorXd apply(const Eigen::VectorXd& game_vector) const {
    return entries * game_vector;
  }

  Allocation apply(const Game& g) const {
    if (g.players() != n) throw DomainError("game size does not match S_n");
    Eigen::Map<const Eigen::VectorXd> v(g.values().data(),
                                        static_cast<Eigen::Index>(
                                            g.values().size()));
    Eigen::VectorXd phi = entries * v;
    return Allocation(g.universe(),
                      std::vector<double>(phi.data(), phi.data() + phi.size()));
  }
};

inline ShapleyMatrix shapley_matrix(int n) {
  if (n < 1) throw DomainError("shapley_matrix needs n >= 1");
  check_dense_capacity(n, kShapleyMatrixMaxPlayers, "shapley_matrix");
  ShapleyMatrix m;
  m.n = n;
  const std::uint64_t table = std::uint64_t{1} << n;
  m.entries.resize(n, static_cast<Eigen::Index>(table));
  for (std::uint64_t mask = 0; mask < table; ++mask) {
    const int size = std::popcount(mask);
    const double in_value = 1.0 / (n * binomial(n - 1, size - 1));
    const double out_value = -1.0 / (n * binomial(n - 1, size));
    for (int i = 0; i < n; ++i) {
      m.entries(i, static_cast<Eigen::Index>(mask)) =
          (mask >> i & 1) ? in_value : out_value;
    }
  }
  return m;
}

struct SpectrumReport {
  int n = 0;
  double d1 = 0.0;         // diagonal of S_n S_n^T
  double d2 = 0.0;         // off-diagonal of S_n S_n^T
  double sigma_max_sq = 0.0;  // d1 + (n-1) d2, equal to 2/n
  double trace = 0.0;         // n d1
};

// Closed-form spectrum of S_n S_n^T: all diagonal entries equal d1, all
// off-diagonal entries equal d2, so the top eigenvalue is d1 + (n-1) d2 and
// the remaining n-1 eigenvalues are d1 - d2. Cross-checked against the
// materialized matrix before returning.
inline SpectrumReport spectrum(int n) {
  if (n < 2) throw DomainError("spectrum needs n >= 2");
  check_dense_capacity(n, kShapleyMatrixMaxPlayers, "spectrum");
  SpectrumReport r;
  r.n = n;
  const double inv_n2 = 1.0 / (static_cast<double>(n) * n);

  double d1 = 0.0;
  for (int s = 1; s <= n; ++s) d1 += 1.0 / binomial(n - 1, s - 1);
  for (int s = 0; s <= n - 1; ++s) d1 += 1.0 / binomial(n - 1, s);
  d1 *= inv_n2;

  double d2 = 0.0;
  for (int s = 2; s <= n; ++s) {
    d2 += binomial(n - 2, s - 2) / (binomial(n - 1, s - 1) *
                                    binomial(n - 1, s - 1));
  }
  for (int s = 1; s <= n - 1; ++s) {
    d2 -= 2.0 * binomial(n - 2, s - 1) /
          (binomial(n - 1, s - 1) * binomial(n - 1, s));
  }
  for (int s = 0; s <= n - 2; ++s) {
    d2 += binomial(n - 2, s) / (binomial(n - 1, s) * binomial(n - 1, s));
  }
  d2 *= inv_n2;

  r.d1 = d1;
  r.d2 = d2;
  r.sigma_max_sq = d1 + (n - 1) * d2;
  r.trace = n * d1;

  const ShapleyMatrix sm = shapley_matrix(n);
  const Eigen::MatrixXd gram = sm.entries * sm.entries.transpose();
  if (std::abs(gram(0, 0) - d1) > 1e-9 ||
      (n > 1 && std::abs(gram(0, 1) - d2) > 1e-9)) {
    throw NumericError("closed-form spectrum disagrees with S_n S_n^T");
  }
  return r;
}

// Unit-norm error direction achieving the worst-case L2 bound: the right
// singular vector of S_n for its top singular value.
inline Eigen::VectorXd top_singular_error_direction(int n) {
  const ShapleyMatrix sm = shapley_matrix(n);
  const Eigen::MatrixXd gram = sm.entries * sm.entries.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NumericError("eigensolve failed for S_n S_n^T");
  }
  // Eigenvalues ascend; the top pair is last.
  const Eigen::VectorXd left = eig.eigenvectors().col(n - 1);
  Eigen::VectorXd direction = sm.entries.transpose() * left;
  direction.normalize();
  return direction;
}

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  bool applicable = false;
};

// Worst-case L2 bound: ||phi(v) - phi(vhat)||_2^2 <= (2/n) ||v - vhat||_2^2.
inline BoundCheck l2_worst_bound(const Game& v, const Game& vhat) {
  check_same_universe(v.universe(), vhat.universe());
  const int n = v.players();
  check_dense_capacity(n, kShapleyMatrixMaxPlayers, "l2_worst_bound");
  const ShapleyMatrix sm = shapley_matrix(n);
  Eigen::VectorXd delta(static_cast<Eigen::Index>(v.table_size()));
  for (std::size_t i = 0; i < v.table_size(); ++i) {
    delta(static_cast<Eigen::Index>(i)) = v.values()[i] - vhat.values()[i];
  }
  BoundCheck check;
  check.applicable = true;
  check.lhs = (sm.entries * delta).squaredNorm();
  check.rhs = 2.0 / n * delta.squaredNorm();
  check.holds = check.lhs <= check.rhs + 1e-12;
  return check;
}

struct L1BoundsReport {
  BoundCheck eq3a;  // sum |dphi| <= ||dv||_1
  BoundCheck eq3b;  // <= (2/n) ||dv||_1 when the empty and grand values agree
  BoundCheck eq3c;  // per-team Shapley, <= (2m/n) ||dv||_1
};

// The three L1 propagation bounds. A bound whose hypothesis fails is marked
// not applicable and never evaluated.
inline L1BoundsReport l1_bounds(
    const Game& v, const Game& vhat,
    const std::optional<std::vector<Coalition>>& groups = std::nullopt) {
  check_same_universe(v.universe(), vhat.universe());
  const int n = v.players();
  check_dense_capacity(n, kShapleyMatrixMaxPlayers, "l1_bounds");

  double l1_error = 0.0;
  for (std::size_t i = 0; i < v.table_size(); ++i) {
    l1_error += std::abs(v.values()[i] - vhat.values()[i]);
  }

  const ShapleyMatrix sm = shapley_matrix(n);
  const Allocation phi_v = sm.apply(v);
  const Allocation phi_vhat = sm.apply(vhat);
  double phi_l1 = 0.0;
  for (int i = 0; i < n; ++i) {
    phi_l1 += std::abs(phi_v.payoffs[static_cast<std::size_t>(i)] -
                       phi_vhat.payoffs[static_cast<std::size_t>(i)]);
  }

  L1BoundsReport report;
  report.eq3a = {phi_l1, l1_error, phi_l1 <= l1_error + 1e-12, true};

  const std::uint64_t grand = v.universe().grand().mask;
  const bool ends_agree = v.values()[0] == vhat.values()[0] &&
                          v.values()[grand] == vhat.values()[grand];
  if (ends_agree && n >= 3) {
    const double rhs = 2.0 / n * l1_error;
    report.eq3b = {phi_l1, rhs, phi_l1 <= rhs + 1e-12, true};
  }

  if (groups.has_value()) {
    check_partition(v.universe(), *groups);
    bool equal_sizes = true;
    for (const Coalition& g : *groups) {
      equal_sizes = equal_sizes && g.size() == (*groups)[0].size();
    }
    // The grouped bound inherits eq (3b)'s hypothesis inside each group:
    // error support must be a proper non-empty subset of some group.
    bool support_ok = true;
    for (std::uint64_t mask = 0; mask < v.table_size() && support_ok; ++mask) {
      if (v.values()[mask] == vhat.values()[mask]) continue;
      bool inside = false;
      for (const Coalition& g : *groups) {
        if (mask != 0 && mask != g.mask &&
            Coalition(mask).subset_of(g)) {
          inside = true;
          break;
        }
      }
      support_ok = inside;
    }
    if (equal_sizes && support_ok) {
      const Allocation grp_v = group_shapley(v, *groups);
      const Allocation grp_vhat = group_shapley(vhat, *groups);
      double grp_l1 = 0.0;
      for (int i = 0; i < n; ++i) {
        grp_l1 += std::abs(grp_v.payoffs[static_cast<std::size_t>(i)] -
                           grp_vhat.payoffs[static_cast<std::size_t>(i)]);
      }
      const double m = static_cast<double>(groups->size());
      const double rhs = 2.0 * m / n * l1_error;
      report.eq3c = {grp_l1, rhs, grp_l1 <= rhs + 1e-12, true};
    }
  }
  return report;
}

enum class NormKind { kL1, kL2 };

struct NoiseExperiment {
  int n = 0;
  NormKind norm_kind = NormKind::kL2;
  double radius = 1.0;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  double kappa_ratio = 1.0;  // kappa_1 / kappa_0; 1 for the uniform samplers
  bool record_trials = false;
};

struct McReport {
  double empirical_mean = 0.0;
  double bound = 0.0;
  bool holds = false;
  double std_error = 0.0;
  // L2 mode only: the exact identity E ||S_n e||^2 = r^2 Tr(S_n S_n^T)/2^n,
  // checked within three standard errors.
  double identity_expected = 0.0;
  bool identity_holds = false;
  std::vector<double> per_trial;
};

// Average-case verification experiments. L2 mode draws errors uniformly on
// the radius-r sphere (normalized standard normals); L1 mode draws |e|/r
// uniformly on the simplex surface (normalized exponentials) with
// independent random signs. Trial t uses the stream keyed by (seed, t), so
// results do not depend on evaluation order.
inline McReport mc_average_case(const NoiseExperiment& cfg) {
  if (cfg.n < 2) throw DomainError("noise experiment needs n >= 2");
  check_dense_capacity(cfg.n, 12, "mc_average_case");
  if (cfg.trials < 1) throw DomainError("trials must be >= 1");
  if (cfg.radius < 0.0) throw DomainError("radius must be >= 0");

  const ShapleyMatrix sm = shapley_matrix(cfg.n);
  const std::uint64_t table = std::uint64_t{1} << cfg.n;
  Eigen::VectorXd noise(static_cast<Eigen::Index>(table));

  McReport report;
  if (cfg.record_trials) {
    report.per_trial.reserve(static_cast<std::size_t>(cfg.trials));
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t trial = 0; trial < cfg.trials; ++trial) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(trial));
    double value;
    if (cfg.norm_kind == NormKind::kL2) {
      for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = rng.normal();
      const double norm = noise.norm();
      noise *= norm > 0 ? cfg.radius / norm : 0.0;
      value = (sm.entries * noise).squaredNorm();
    } else {
      double total = 0.0;
      for (Eigen::Index i = 0; i < noise.size(); ++i) {
        noise(i) = rng.exponential();
        total += noise(i);
      }
      noise *= cfg.radius / total;
      for (Eigen::Index i = 0; i < noise.size(); ++i) {
        if (rng.coin()) noise(i) = -noise(i);
      }
      value = (sm.entries * noise).lpNorm<1>();
    }
    sum += value;
    sum_sq += value * value;
    if (cfg.record_trials) report.per_trial.push_back(value);
  }

  const double trials = static_cast<double>(cfg.trials);
  report.empirical_mean = sum / trials;
  const double variance =
      std::max(0.0, sum_sq / trials - report.empirical_mean *
                                          report.empirical_mean);
  report.std_error = std::sqrt(variance / trials);

  const double table_d = static_cast<double>(table);
  if (cfg.norm_kind == NormKind::kL2) {
    report.bound = 6.0 / cfg.n * cfg.kappa_ratio * cfg.radius * cfg.radius /
                   table_d;
    const SpectrumReport spec = spectrum(cfg.n);
    report.identity_expected =
        cfg.radius * cfg.radius * spec.trace / table_d;
    report.identity_holds =
        std::abs(report.empirical_mean - report.identity_expected) <=
        3.0 * report.std_error;
  } else {
    report.bound = 2.0 * cfg.kappa_ratio * cfg.radius / table_d;
  }
  report.holds = report.empirical_mean <= report.bound;
  return report;
}

// Fraction of non-empty coalitions whose true value lies inside the
// multiplicative band [(1-eps) vhat, (1+eps) vhat]; both-zero pairs count as
// covered. Exact enumeration over all 2^n - 1 coalitions.
inline double pmac_coverage(const CgaModel& model, const Game& g,
                            double epsilon) {
  check_same_universe(model.universe(), g.universe());
  if (epsilon <= 0.0) throw DomainError("epsilon must be > 0");
  const int n = g.players();
  check_dense_capacity(n, 20, "pmac_coverage");
  const std::uint64_t table = std::uint64_t{1} << n;
  std::uint64_t covered = 0;
  for (std::uint64_t mask = 1; mask < table; ++mask) {
    const double predicted = model.evaluate(Coalition(mask));
    const double actual = g.values()[mask];
    if (predicted == 0.0 && actual == 0.0) {
      ++covered;
    } else if ((1.0 - epsilon) * predicted <= actual &&
               actual <= (1.0 + epsilon) * predicted) {
      ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(table - 1);
}

}  // namespace cga

#endif  // CGA_ANALYSIS_HPP_

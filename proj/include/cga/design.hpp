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

#ifndef CGA_DESIGN_HPP_
#define CGA_DESIGN_HPP_

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "cga/coalition.hpp"
#include "cga/game.hpp"

namespace cga {

inline constexpr int kDesignMaxPlayers = 14;
inline constexpr double kRankThreshold = 1e-8;

// 0/1 matrix relating order-k interaction weights to coalition values:
// entry(row C, col S) = 1 iff S is a subset of C. Columns are all S with
// 1 <= |S| <= k in size-then-mask order.
struct DesignMatrix {
  int n = 0;
  int order = 0;
  std::vector<Coalition> rows;
  std::vector<Coalition> cols;
  Eigen::MatrixXd entries;

  std::uint64_t column_count() const { return cols.size(); }
};

inline DesignMatrix build_design_matrix(int n, int k,
                                        std::vector<Coalition> row_coalitions) {
  if (k < 1 || k > n) throw DomainError("design matrix needs 1 <= k <= n");
  check_dense_capacity(n, kDesignMaxPlayers, "build_design_matrix");
  DesignMatrix m;
  m.n = n;
  m.order = k;
  m.cols = canonical_weight_order(n, k);
  m.rows = std::move(row_coalitions);
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (Coalition c : m.rows) {
    if (c.mask >= limit) {
      throw DomainError("row coalition outside the n-player universe");
    }
  }
  m.entries.resize(static_cast<Eigen::Index>(m.rows.size()),
                   static_cast<Eigen::Index>(m.cols.size()));
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    for (std::size_t j = 0; j < m.cols.size(); ++j) {
      m.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m.cols[j].subset_of(m.rows[i]) ? 1.0 : 0.0;
    }
  }
  return m;
}

// All coalitions of the given sizes, sizes ascending, masks ascending.
inline std::vector<Coalition> coalitions_of_sizes(int n,
                                                  const std::set<int>& sizes) {
  std::vector<Coalition> rows;
  for (int s : sizes) {
    if (s < 0 || s > n) throw DomainError("team size outside [0, n]");
    auto level = coalitions_of_size(n, s);
    rows.insert(rows.end(), level.begin(), level.end());
  }
  return rows;
}

inline int numerical_rank(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = kRankThreshold * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) >= cutoff) ++rank;
  }
  return rank;
}

// Rank over GF(p) by Gaussian elimination in integer arithmetic. Since a
// nonzero minor mod p is nonzero over the integers, the result is an exact
// lower bound on the rational rank; equality with the column count is an
// exact full-column-rank certificate.
inline int gf_rank(const Eigen::MatrixXd& m,
                   std::uint64_t p = 2147483629ULL) {
  const std::size_t rows = static_cast<std::size_t>(m.rows());
  const std::size_t cols = static_cast<std::size_t>(m.cols());
  std::vector<std::vector<std::uint64_t>> a(rows,
                                            std::vector<std::uint64_t>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const long long v = static_cast<long long>(
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      a[i][j] = static_cast<std::uint64_t>(
          ((v % static_cast<long long>(p)) + static_cast<long long>(p)) %
          static_cast<long long>(p));
    }
  }
  auto mulmod = [p](std::uint64_t x, std::uint64_t y) {
    return static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(x) * y % p);
  };
  auto powmod = [&](std::uint64_t base, std::uint64_t e) {
    std::uint64_t r = 1;
    while (e) {
      if (e & 1) r = mulmod(r, base);
      base = mulmod(base, base);
      e >>= 1;
    }
    return r;
  };
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][col] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[rank], a[pivot]);
    const std::uint64_t inv = powmod(a[rank][col], p - 2);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      if (a[i][col] == 0) continue;
      const std::uint64_t factor = mulmod(a[i][col], inv);
      for (std::size_t j = col; j < cols; ++j) {
        a[i][j] = (a[i][j] + p - mulmod(factor, a[rank][j])) % p;
      }
    }
    ++rank;
  }
  return static_cast<int>(rank);
}

// Exact rational rank via fraction-free Bareiss elimination on big integers.
// Entry growth is bounded by minors of the input, so this is exact but only
// affordable for small matrices; the identifiability sweep uses gf_rank
// certificates instead.
inline int bareiss_rank(const Eigen::MatrixXd& m) {
  using Int = boost::multiprecision::cpp_int;
  const std::size_t rows = static_cast<std::size_t>(m.rows());
  const std::size_t cols = static_cast<std::size_t>(m.cols());
  std::vector<std::vector<Int>> a(rows, std::vector<Int>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      a[i][j] = Int(static_cast<long long>(
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
  }
  Int prev = 1;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][col] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[rank], a[pivot]);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = col + 1; j < cols; ++j) {
        a[i][j] = (a[rank][col] * a[i][j] - a[i][col] * a[rank][j]) / prev;
      }
      a[i][col] = 0;
    }
    prev = a[rank][col];
    ++rank;
  }
  return static_cast<int>(rank);
}

struct IdentifiabilityReport {
  int n = 0;
  int k = 0;
  std::set<int> sizes;
  int rank = 0;
  std::uint64_t column_count = 0;
  bool identified = false;
  // Exact cross-check: rank >= exact_rank_lower always holds over the
  // rationals; when exact_rank_lower == column_count the identification is
  // certified without floating point.
  int exact_rank_lower = 0;
  std::uint64_t row_count = 0;
};

// Builds the design matrix over all coalitions of the given sizes and tests
// full column rank numerically (singular values >= 1e-8 * sigma_max) plus
// the exact GF(p) certificate.
inline IdentifiabilityReport check_identifiability(int n, int k,
                                                   const std::set<int>& sizes) {
  for (int s : sizes) {
    if (s < 1 || s > n) throw DomainError("team sizes must lie in [1, n]");
  }
  DesignMatrix m = build_design_matrix(n, k, coalitions_of_sizes(n, sizes));
  IdentifiabilityReport report;
  report.n = n;
  report.k = k;
  report.sizes = sizes;
  report.column_count = m.column_count();
  report.row_count = m.rows.size();
  report.rank = numerical_rank(m.entries);
  report.exact_rank_lower = gf_rank(m.entries);
  report.identified =
      report.rank == static_cast<int>(report.column_count);
  return report;
}

struct MisspecReport {
  int n = 0;
  int k = 0;
  int r = 0;
  std::vector<double> error_vector;
  double max_eigenvalue = 0.0;
  double avg_trace = 0.0;
  bool ridge_fallback = false;
};

namespace internal {

// Least-squares coefficient solve for M_k over all 2^n rows. Falls back to a
// tiny ridge when the normal matrix is numerically singular and reports it.
inline Eigen::MatrixXd projection_coefficients(const Eigen::MatrixXd& basis,
                                               const Eigen::MatrixXd& target,
                                               bool* ridge_fallback) {
  const Eigen::MatrixXd normal = basis.transpose() * basis;
  const Eigen::MatrixXd rhs = basis.transpose() * target;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Eigen::MatrixXd coef = ldlt.solve(rhs);
    if (((normal * coef - rhs).cwiseAbs().maxCoeff() <=
         1e-6 * (1.0 + rhs.cwiseAbs().maxCoeff()))) {
      return coef;
    }
  }
  if (ridge_fallback != nullptr) *ridge_fallback = true;
  Eigen::MatrixXd ridged = normal;
  ridged.diagonal().array() += 1e-10;
  return Eigen::LDLT<Eigen::MatrixXd>(ridged).solve(rhs);
}

inline void check_misspec_args(int n, int k, int r) {
  if (!(1 <= k && k <= r && r <= n)) {
    throw DomainError("misspecification analysis needs 1 <= k <= r <= n");
  }
  check_dense_capacity(n, 12, "misspecification analysis");
}

}  // namespace internal

// Residual of projecting the order-r game induced by true_weights onto the
// column space of the order-k design matrix over all 2^n coalitions:
// (I - P_nk) M_nr omega*.
inline MisspecReport misspec_error(int n, int k, int r,
                                   const CgaModel& true_weights) {
  internal::check_misspec_args(n, k, r);
  if (true_weights.players() != n || true_weights.order() > r) {
    throw DomainError("true weights must be an order-r model on n players");
  }
  const std::uint64_t table = std::uint64_t{1} << n;
  std::vector<Coalition> all_rows;
  all_rows.reserve(table);
  for (std::uint64_t mask = 0; mask < table; ++mask) {
    all_rows.emplace_back(mask);
  }
  DesignMatrix basis = build_design_matrix(n, k, all_rows);
  const Game induced = to_game(true_weights);
  Eigen::VectorXd v(static_cast<Eigen::Index>(table));
  for (std::uint64_t mask = 0; mask < table; ++mask) {
    v(static_cast<Eigen::Index>(mask)) = induced.values()[mask];
  }

  MisspecReport report;
  report.n = n;
  report.k = k;
  report.r = r;
  const Eigen::VectorXd coef = internal::projection_coefficients(
      basis.entries, v, &report.ridge_fallback);
  const Eigen::VectorXd residual = v - basis.entries * coef;
  report.error_vector.assign(residual.data(), residual.data() + residual.size());
  return report;
}

// Spectral summary of E = (I - P_nk) M_nr: the top eigenvalue of E^T E and
// its trace averaged over the d_r columns.
inline MisspecReport misspec_spectrum(int n, int k, int r) {
  internal::check_misspec_args(n, k, r);
  const std::uint64_t table = std::uint64_t{1} << n;
  std::vector<Coalition> all_rows;
  all_rows.reserve(table);
  for (std::uint64_t mask = 0; mask < table; ++mask) {
    all_rows.emplace_back(mask);
  }
  DesignMatrix basis = build_design_matrix(n, k, all_rows);
  DesignMatrix full = build_design_matrix(n, r, all_rows);

  MisspecReport report;
  report.n = n;
  report.k = k;
  report.r = r;
  const Eigen::MatrixXd coef = internal::projection_coefficients(
      basis.entries, full.entries, &report.ridge_fallback);
  const Eigen::MatrixXd residual = full.entries - basis.entries * coef;
  const Eigen::MatrixXd gram = residual.transpose() * residual;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                     Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericError("eigensolve failed in misspec_spectrum");
  }
  report.max_eigenvalue = std::max(0.0, eig.eigenvalues().maxCoeff());
  report.avg_trace = gram.trace() / static_cast<double>(full.column_count());
  return report;
}

}  // namespace cga

#endif  // CGA_DESIGN_HPP_

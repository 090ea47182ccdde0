#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <vector>

#include "cga/design.hpp"
#include "cga/game.hpp"
#include "testutil.hpp"

using namespace cga;
using Catch::Approx;

TEST_CASE("design matrix indicator rule, n=2 k=1") {
  std::vector<Coalition> rows{Coalition(0), Coalition(1), Coalition(2),
                              Coalition(3)};
  DesignMatrix m = build_design_matrix(2, 1, rows);
  Eigen::MatrixXd expected(4, 2);
  expected << 0, 0, 1, 0, 0, 1, 1, 1;
  CHECK((m.entries - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("design matrix shapes and row sums") {
  DesignMatrix square =
      build_design_matrix(4, 2, coalitions_of_sizes(4, {2, 3}));
  CHECK(square.entries.rows() == 10);
  CHECK(square.entries.cols() == 10);

  DesignMatrix wide = build_design_matrix(4, 2, coalitions_of_sizes(4, {3}));
  CHECK(wide.entries.rows() == 4);
  CHECK(wide.entries.cols() == 10);
  for (Eigen::Index i = 0; i < wide.entries.rows(); ++i) {
    // A 3-set contains 3 singletons and C(3,2) = 3 pairs.
    CHECK(wide.entries.row(i).head(4).sum() == 3.0);
    CHECK(wide.entries.row(i).tail(6).sum() == 3.0);
  }
}

TEST_CASE("identifiability of the theorem examples") {
  IdentifiabilityReport yes = check_identifiability(6, 2, {2, 3});
  CHECK(yes.identified);
  CHECK(yes.rank == 21);
  CHECK(yes.column_count == 21);
  CHECK(yes.exact_rank_lower == 21);  // exact integer certificate

  IdentifiabilityReport no = check_identifiability(4, 2, {3});
  CHECK_FALSE(no.identified);
  CHECK(no.row_count == 4);
  CHECK(no.rank < 10);

  IdentifiabilityReport loo = check_identifiability(5, 1, {4});
  CHECK(loo.identified);
  CHECK(loo.rank == 5);
  CHECK(loo.exact_rank_lower == 5);
}

TEST_CASE("theorem 1 size sets identify, theorem 2 families do not") {
  // Exactly k sizes inside [k, n-1].
  CHECK(check_identifiability(8, 2, {2, 7}).identified);
  CHECK(check_identifiability(8, 3, {3, 5, 7}).identified);
  CHECK(check_identifiability(10, 3, {4, 5, 6}).identified);
  CHECK(check_identifiability(7, 1, {3}).identified);

  // Fewer than k sizes, or sizes leaking outside [k, n-1].
  CHECK_FALSE(check_identifiability(8, 2, {7}).identified);
  CHECK_FALSE(check_identifiability(8, 2, {1, 7}).identified);
  CHECK_FALSE(check_identifiability(8, 2, {7, 8}).identified);
}

TEST_CASE("rank routines agree on small matrices") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    Rng rng(seed);
    const int n = 5;
    const int k = 2;
    // Random subset of rows keeps the matrix away from guaranteed full rank.
    std::vector<Coalition> rows;
    for (std::uint64_t mask = 1; mask < (1u << n); ++mask) {
      if (rng.uniform01() < 0.4) rows.emplace_back(mask);
    }
    if (rows.empty()) rows.emplace_back(1);
    DesignMatrix m = build_design_matrix(n, k, rows);
    const int svd = numerical_rank(m.entries);
    const int gf = gf_rank(m.entries);
    const int exact = bareiss_rank(m.entries);
    CHECK(svd == exact);
    CHECK(gf == exact);
  }
}

TEST_CASE("misspec error vanishes for representable games") {
  CgaModel zero(PlayerUniverse::Synthetic(5), 2);
  MisspecReport z = misspec_error(5, 1, 2, zero);
  for (double e : z.error_vector) CHECK(e == 0.0);

  CgaModel m = random_cga(5, 2, 21);
  MisspecReport same = misspec_error(5, 2, 2, m);
  for (double e : same.error_vector) CHECK(e == Approx(0.0).margin(1e-9));
}

TEST_CASE("misspec error equals the residual of a direct additive fit") {
  const int n = 6;
  CgaModel m = random_cga(n, 2, 77);
  MisspecReport report = misspec_error(n, 1, 2, m);

  // Independent oracle: explicit normal-equations solve of the best additive
  // approximation over all 2^n coalitions.
  const std::uint64_t table = std::uint64_t{1} << n;
  Eigen::MatrixXd design(table, n);
  Eigen::VectorXd v(table);
  const Game induced = to_game(m);
  for (std::uint64_t mask = 0; mask < table; ++mask) {
    for (int i = 0; i < n; ++i) {
      design(static_cast<Eigen::Index>(mask), i) =
          (mask >> i & 1) ? 1.0 : 0.0;
    }
    v(static_cast<Eigen::Index>(mask)) = induced.values()[mask];
  }
  Eigen::VectorXd coef =
      (design.transpose() * design).ldlt().solve(design.transpose() * v);
  Eigen::VectorXd residual = v - design * coef;
  REQUIRE(report.error_vector.size() == table);
  for (std::uint64_t mask = 0; mask < table; ++mask) {
    CHECK(report.error_vector[mask] ==
          Approx(residual(static_cast<Eigen::Index>(mask))).margin(1e-9));
  }
}

TEST_CASE("misspec spectrum statistics") {
  MisspecReport same = misspec_spectrum(5, 2, 2);
  CHECK(same.max_eigenvalue == Approx(0.0).margin(1e-9));
  CHECK(same.avg_trace == Approx(0.0).margin(1e-9));

  // Monotone growth in n and r, checked rather than assumed.
  MisspecReport n5 = misspec_spectrum(5, 1, 2);
  MisspecReport n6 = misspec_spectrum(6, 1, 2);
  CHECK(n6.max_eigenvalue >= n5.max_eigenvalue - 1e-9);

  MisspecReport r2 = misspec_spectrum(6, 1, 2);
  MisspecReport r3 = misspec_spectrum(6, 1, 3);
  CHECK(r3.avg_trace >= r2.avg_trace - 1e-9);
}

TEST_CASE("projection is idempotent and annihilates its own columns") {
  const int n = 5;
  const int k = 2;
  const std::uint64_t table = std::uint64_t{1} << n;
  std::vector<Coalition> rows;
  for (std::uint64_t mask = 0; mask < table; ++mask) rows.emplace_back(mask);
  DesignMatrix m = build_design_matrix(n, k, rows);
  Eigen::MatrixXd normal = m.entries.transpose() * m.entries;
  Eigen::MatrixXd projector =
      m.entries * normal.ldlt().solve(m.entries.transpose());
  CHECK((projector * projector - projector).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((projector * m.entries - m.entries).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("design guards") {
  CHECK_THROWS_AS(build_design_matrix(15, 2, {}), CapacityError);
  CHECK_THROWS_AS(build_design_matrix(4, 0, {}), DomainError);
  CHECK_THROWS_AS(build_design_matrix(4, 2, {Coalition(1u << 5)}),
                  DomainError);
  CHECK_THROWS_AS(check_identifiability(6, 2, {0, 3}), DomainError);
  CHECK_THROWS_AS(misspec_error(6, 2, 1, random_cga(6, 1, 1)), DomainError);
}

#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cga/game.hpp"
#include "cga/least_core.hpp"
#include "cga/shapley.hpp"
#include "testutil.hpp"

using namespace cga;
using Catch::Approx;

namespace {

Game majority3() {
  std::vector<double> values(8, 0.0);
  for (std::uint64_t mask = 0; mask < 8; ++mask) {
    if (std::popcount(mask) >= 2) values[mask] = 1.0;
  }
  return Game(PlayerUniverse::Synthetic(3), values);
}

Game counting_game(int n) {
  std::vector<double> values(std::size_t{1} << n);
  for (std::uint64_t mask = 0; mask < values.size(); ++mask) {
    values[mask] = static_cast<double>(std::popcount(mask));
  }
  return Game(PlayerUniverse::Synthetic(n), values);
}

}  // namespace

TEST_CASE("sample budget from probabilities") {
  SampleBudget b = SampleBudget::from_probabilities(0.1, 0.1);
  CHECK(b.m == 1843);  // ceil(8 ln(10) / 0.01)
  CHECK_THROWS_AS(SampleBudget::from_probabilities(0.0, 0.1), DomainError);
}

TEST_CASE("counting game with unit payoffs has zero deficits") {
  Game g = counting_game(6);
  Allocation ones(g.universe(), std::vector<double>(6, 1.0));
  SampleBudget budget;
  budget.m = 40;
  LeastCoreEstimate est = sampled_least_core_value(g, ones, budget, 5);
  CHECK(est.e_hat == 0.0);
  DeficitReport exact = exact_max_deficit(g, ones);
  CHECK(exact.value == 0.0);
  CHECK_FALSE(exact.efficiency_warning);
}

TEST_CASE("majority game deficits at the symmetric allocation") {
  Game g = majority3();
  Allocation thirds(g.universe(), std::vector<double>(3, 1.0 / 3.0));
  DeficitReport exact = exact_max_deficit(g, thirds);
  CHECK(exact.value == Approx(1.0 / 3.0));
}

TEST_CASE("full enumeration budget equals the exact maximum") {
  Game g = to_game(random_cga(8, 2, 61));
  Allocation phi = shapley_bruteforce(g);
  SampleBudget full;
  full.m = 256;
  LeastCoreEstimate est = sampled_least_core_value(g, phi, full, 3);
  CHECK(est.exhaustive);
  DeficitReport exact = exact_max_deficit(g, phi);
  // The enumeration also sees the empty and grand coalitions, whose deficits
  // are ~0 here; the proper maximum dominates for this game.
  REQUIRE(exact.value > 0.0);
  CHECK(est.e_hat == Approx(exact.value).margin(1e-12));
}

TEST_CASE("e_hat is monotone in the sample budget and never exceeds exact") {
  const int n = 10;
  Game g = to_game(random_cga(n, 2, 62));
  Allocation phi = shapley_bruteforce(g);
  DeficitReport exact = exact_max_deficit(g, phi);
  REQUIRE(exact.value > 0.0);

  double previous = -1e300;
  for (std::int64_t m : {1, 4, 16, 64, 256, 1024}) {
    SampleBudget budget;
    budget.m = m;
    LeastCoreEstimate est = sampled_least_core_value(g, phi, budget, 99);
    CHECK(est.e_hat >= previous);
    CHECK(est.e_hat <= exact.value + 1e-12);
    previous = est.e_hat;
  }

  SampleBudget all;
  all.m = std::int64_t{1} << n;
  CHECK(sampled_least_core_value(g, phi, all, 99).e_hat ==
        Approx(exact.value).margin(1e-12));
}

TEST_CASE("model and game paths agree") {
  CgaModel model = random_cga(7, 2, 63);
  Game g = to_game(model);
  Allocation phi = shapley_from_weights(model);
  SampleBudget budget;
  budget.m = 50;
  LeastCoreEstimate via_model = sampled_least_core_value(model, phi, budget, 7);
  LeastCoreEstimate via_game = sampled_least_core_value(g, phi, budget, 7);
  CHECK(via_model.e_hat == Approx(via_game.e_hat).margin(1e-12));
  CHECK(via_model.value_kind == "model");
  CHECK(via_game.value_kind == "game");
}

TEST_CASE("efficiency warning fires for off-plane allocations") {
  Game g = counting_game(4);
  Allocation off(g.universe(), {2.0, 1.0, 1.0, 1.0});
  CHECK(exact_max_deficit(g, off).efficiency_warning);
}

TEST_CASE("improve_allocation cannot make things worse") {
  Game g = counting_game(5);
  Allocation exact_core(g.universe(), std::vector<double>(5, 1.0));
  Allocation improved = improve_allocation(g, exact_core, 500, 0.1, 11);
  const double before = exact_max_deficit(g, exact_core).value;
  const double after = exact_max_deficit(g, improved).value;
  CHECK(after <= before + 1e-9);
  CHECK(after == Approx(before).margin(1e-9));  // already optimal
}

TEST_CASE("improve_allocation converges on the majority game") {
  Game g = majority3();
  // Random inefficient start; the optimum max deficit is 1/3.
  Allocation start(g.universe(), {0.9, 0.05, 0.05});
  Allocation improved = improve_allocation(g, start, 5000, 0.2, 13);
  CHECK(exact_max_deficit(g, improved).value == Approx(1.0 / 3.0).margin(1e-3));
}

TEST_CASE("shapley of a second-order game is subgradient-optimal") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    CgaModel model = random_cga(6, 2, 700 + seed);
    Game g = to_game(model);
    Allocation phi = shapley_from_weights(model);
    const double at_shapley = exact_max_deficit(g, phi).value;
    Allocation improved = improve_allocation(g, phi, 2000, 0.1, seed);
    const double at_improved = exact_max_deficit(g, improved).value;
    REQUIRE(at_shapley - at_improved <= 1e-6);
  }
}

TEST_CASE("least core guards") {
  Game g = counting_game(4);
  Allocation x(g.universe(), std::vector<double>(4, 1.0));
  SampleBudget bad;
  bad.m = 0;
  CHECK_THROWS_AS(sampled_least_core_value(g, x, bad, 1), DomainError);
  CHECK_THROWS_AS(improve_allocation(g, x, -1, 0.1, 1), DomainError);
  CHECK_THROWS_AS(improve_allocation(g, x, 10, 0.0, 1), DomainError);
  Allocation wrong(PlayerUniverse::Synthetic(5),
                   std::vector<double>(5, 1.0));
  CHECK_THROWS_AS(exact_max_deficit(g, wrong), DomainError);
}

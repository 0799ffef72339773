#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "passtax/absorption.hpp"
#include "support.hpp"

using namespace passtax;
using Catch::Matchers::WithinAbs;

namespace {

// Independent oracle: settle the transient set by iterating distribution
// rounds withholding everything outside T.
IncomeVector iterate_to_absorption(const OwnershipNetwork& net, IncomeVector e,
                                   const std::vector<TaxpayerIndex>& transients, int steps) {
  std::vector<TaxpayerIndex> withheld;
  std::vector<char> is_transient(net.size(), 0);
  for (TaxpayerIndex t : transients) is_transient[t] = 1;
  for (TaxpayerIndex c : net.corporations())
    if (!is_transient[c]) withheld.push_back(c);
  auto view = restrict_shares(net, withheld);
  for (int k = 0; k < steps; ++k) e = distribute_step(e, view);
  for (TaxpayerIndex t : transients) e[t] = 0.0;  // drop the geometric tail
  return e;
}

}  // namespace

TEST_CASE("transient system assembly") {
  SECTION("single transient, mixed boundary") {
    NetworkBuilder b;
    b.add_taxpayer("c1", TaxpayerKind::Corporation);
    b.add_taxpayer("c2", TaxpayerKind::Corporation);
    b.add_taxpayer("p1", TaxpayerKind::Individual);
    b.add_share("c1", "c2", 0.6);
    b.add_share("c1", "p1", 0.4);
    b.add_share("c2", "p1", 1.0);
    auto net = b.finalize();
    std::vector<TaxpayerIndex> t{*net.find("c1")};
    auto sys = build_transient_system(net, t);
    REQUIRE(sys.q.rows() == 1);
    CHECK(sys.q(0, 0) == 0.0);
    REQUIRE(sys.boundary[0].size() == 2);
    double total = 0;
    for (const Share& s : sys.boundary[0]) total += s.fraction;
    CHECK_THAT(total, WithinAbs(1.0, 1e-15));
  }
  SECTION("mutual half shares") {
    auto net = support::mutual_half_network();
    auto sys = build_transient_system(net, net.corporations());
    REQUIRE(sys.q.rows() == 2);
    CHECK(sys.q(0, 1) == 0.5);
    CHECK(sys.q(1, 0) == 0.5);
    CHECK(sys.q(0, 0) == 0.0);
  }
  SECTION("self-share lands on the diagonal") {
    NetworkBuilder b;
    b.add_taxpayer("c1", TaxpayerKind::Corporation);
    b.add_taxpayer("p1", TaxpayerKind::Individual);
    b.add_share("c1", "c1", 0.3);
    b.add_share("c1", "p1", 0.7);
    auto net = b.finalize();
    auto sys = build_transient_system(net, net.corporations());
    CHECK(sys.q(0, 0) == 0.3);
  }
  SECTION("dense cap") {
    auto net = support::mutual_half_network();
    CHECK_THROWS_AS(build_transient_system(net, net.corporations(), 1), SolveError);
  }
}

TEST_CASE("absorb worked examples") {
  SECTION("single pass-through is an identity solve") {
    NetworkBuilder b;
    b.add_taxpayer("c1", TaxpayerKind::Corporation);
    b.add_taxpayer("p1", TaxpayerKind::Individual);
    b.add_share("c1", "p1", 1.0);
    auto net = b.finalize();
    IncomeVector e{100.0, 0.0};
    absorb(e, build_transient_system(net, net.corporations()));
    CHECK(e[*net.find("c1")] == 0.0);
    CHECK_THAT(e[*net.find("p1")], WithinAbs(100.0, 1e-12));
  }
  SECTION("mutual half shares split 2:1") {
    auto net = support::mutual_half_network();
    IncomeVector e{100.0, 0.0, 0.0, 0.0};
    absorb(e, build_transient_system(net, net.corporations()));
    CHECK_THAT(e[*net.find("p0")], WithinAbs(200.0 / 3.0, 1e-10));
    CHECK_THAT(e[*net.find("p1")], WithinAbs(100.0 / 3.0, 1e-10));
    CHECK(e[*net.find("c0")] == 0.0);
    CHECK(e[*net.find("c1")] == 0.0);

    IncomeVector oracle{100.0, 0.0, 0.0, 0.0};
    oracle = iterate_to_absorption(net, oracle, net.corporations(), 200);
    CHECK_THAT(e[*net.find("p0")], WithinAbs(oracle[*net.find("p0")], 1e-8));
    CHECK_THAT(e[*net.find("p1")], WithinAbs(oracle[*net.find("p1")], 1e-8));
  }
  SECTION("self-share geometric series") {
    NetworkBuilder b;
    b.add_taxpayer("c1", TaxpayerKind::Corporation);
    b.add_taxpayer("p1", TaxpayerKind::Individual);
    b.add_share("c1", "c1", 0.3);
    b.add_share("c1", "p1", 0.7);
    auto net = b.finalize();
    IncomeVector e{70.0, 0.0};
    absorb(e, build_transient_system(net, net.corporations()));
    CHECK_THAT(e[*net.find("p1")], WithinAbs(70.0, 1e-10));  // 70 * 0.7 / (1 - 0.3)
    CHECK(e[*net.find("c1")] == 0.0);
  }
  SECTION("closed set raises ABSORBING_SUBSET") {
    NetworkBuilder b;
    b.add_taxpayer("c1", TaxpayerKind::Corporation);
    b.add_taxpayer("c2", TaxpayerKind::Corporation);
    b.add_share("c1", "c2", 1.0);
    b.add_share("c2", "c1", 1.0);
    auto net = b.finalize();
    IncomeVector e{1.0, 0.0};
    auto sys = build_transient_system(net, net.corporations());
    CHECK_THROWS_AS(absorb(e, sys), SolveError);
  }
}

TEST_CASE("absorption matrix") {
  SECTION("single transient, single owner") {
    NetworkBuilder b;
    b.add_taxpayer("c1", TaxpayerKind::Corporation);
    b.add_taxpayer("p1", TaxpayerKind::Individual);
    b.add_share("c1", "p1", 1.0);
    auto net = b.finalize();
    std::vector<TaxpayerIndex> targets;
    auto m = absorption_matrix(build_transient_system(net, net.corporations()), targets);
    REQUIRE(targets.size() == 1);
    CHECK_THAT(m(0, 0), WithinAbs(1.0, 1e-15));
  }
  SECTION("mutual half shares give the closed-form fundamental split") {
    auto net = support::mutual_half_network();
    std::vector<TaxpayerIndex> targets;
    auto m = absorption_matrix(build_transient_system(net, net.corporations()), targets);
    REQUIRE(targets.size() == 2);  // p0, p1 ascending
    CHECK_THAT(m(0, 0), WithinAbs(2.0 / 3.0, 1e-12));
    CHECK_THAT(m(0, 1), WithinAbs(1.0 / 3.0, 1e-12));
    CHECK_THAT(m(1, 0), WithinAbs(1.0 / 3.0, 1e-12));
    CHECK_THAT(m(1, 1), WithinAbs(2.0 / 3.0, 1e-12));
  }
  SECTION("rows are stochastic on random systems") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 100; ++trial) {
      auto net = support::random_network(rng, 2 + rng() % 19, 3);
      std::vector<TaxpayerIndex> targets;
      auto m = absorption_matrix(build_transient_system(net, net.corporations()), targets);
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        REQUIRE_THAT(m.row(i).sum(), WithinAbs(1.0, 1e-9));
    }
  }
}

TEST_CASE("absorb properties on random systems") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 60; ++trial) {
    auto net = support::random_network(rng, 2 + rng() % 9, 3);
    auto e0 = support::random_incomes(rng, net, 0.3);
    // random transient subset of the corporations
    std::vector<TaxpayerIndex> transients;
    for (TaxpayerIndex c : net.corporations())
      if (rng() % 4 != 0) transients.push_back(c);
    if (transients.empty()) continue;

    IncomeVector e = e0;
    absorb(e, build_transient_system(net, transients));

    for (TaxpayerIndex t : transients) CHECK(e[t] == 0.0);
    CHECK_THAT(support::sum(e), WithinAbs(support::sum(e0), 1e-9 * support::sum_abs(e0)));

    auto oracle = iterate_to_absorption(net, e0, transients, 10'000);
    for (std::size_t i = 0; i < e.size(); ++i)
      CHECK_THAT(e[i], WithinAbs(oracle[i], 1e-8 * std::max(1.0, support::sum_abs(e0))));
  }
}

TEST_CASE("one restricted step then absorption equals absorption alone") {
  // P_S * P_inf = P_inf, exercised through the income vectors
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 100; ++trial) {
    auto net = support::random_network(rng, 2 + rng() % 9, 3);
    auto e0 = support::random_incomes(rng, net, 0.4);
    std::vector<TaxpayerIndex> s;
    for (TaxpayerIndex c : net.corporations())
      if (rng() % 2) s.push_back(c);

    IncomeVector direct = e0;
    absorb(direct, build_transient_system(net, net.corporations()));

    IncomeVector stepped = distribute_step(e0, restrict_shares(net, s));
    absorb(stepped, build_transient_system(net, net.corporations()));

    for (std::size_t i = 0; i < e0.size(); ++i)
      REQUIRE_THAT(stepped[i], WithinAbs(direct[i], 1e-9 * std::max(1.0, support::sum_abs(e0))));
  }
}

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "svrp/exact.hpp"
#include "svrp/graph.hpp"
#include "svrp/instance.hpp"
#include "svrp/schedule.hpp"

using namespace svrp;

#include "oracle_helpers.hpp"

using namespace oracle;

TEST_CASE("single customer two support vehicles solved by hand") {
  // d=30, b=2 at distance 5: mode 1 costs 5+60, mode 2 costs 5+30
  Instance inst = make_instance({spec_of(1, {3.0, 4.0}, 30.0, 2)}, 1, 2);
  for (VariantPolicy policy : kIntegerPolicies) {
    SolveResult exact = solve_exact(inst, policy);
    CAPTURE(policy.name());
    CHECK(exact.status == SolveStatus::Optimal);
    CHECK_THAT(exact.makespan, Catch::Matchers::WithinAbs(35.0, 1e-9));
    CHECK_THAT(exact.lower_bound, Catch::Matchers::WithinAbs(exact.makespan, 1e-6));

    SolveResult brute = brute_force(inst, policy);
    CHECK(brute.status == SolveStatus::Optimal);
    CHECK_THAT(brute.makespan, Catch::Matchers::WithinAbs(35.0, 1e-9));
  }
}

TEST_CASE("empty instance has makespan zero") {
  Instance inst = make_instance({}, 2, 2);
  for (VariantPolicy policy : kIntegerPolicies) {
    CHECK(solve_exact(inst, policy).makespan == 0.0);
    CHECK(brute_force(inst, policy).makespan == 0.0);
  }
}

TEST_CASE("single-mode customer forces the only structure") {
  // b=1 leaves exactly one feasible mode; optimum is travel + full service
  Instance inst = make_instance({spec_of(1, {6.0, 8.0}, 25.0, 1)}, 1, 1);
  double expect = 10.0 + 25.0;
  for (VariantPolicy policy : kIntegerPolicies) {
    SolveResult res = solve_exact(inst, policy);
    CHECK_THAT(res.makespan, Catch::Matchers::WithinAbs(expect, 1e-9));
    CHECK_THAT(brute_force(inst, policy).makespan, Catch::Matchers::WithinAbs(expect, 1e-9));
  }
}

TEST_CASE("construction heuristic is feasible and matches hand shares") {
  SECTION("one customer gets min(|O|, b) support vehicles") {
    Instance inst = make_instance({spec_of(1, {3.0, 4.0}, 30.0, 2)}, 2, 3);
    BuiltSolution built = construction_heuristic(inst, VariantPolicy::parse("I|N|N"));
    ExpandedGraph g = build_graph(inst, built.solution.policy, 0.0);
    int copy = 0;
    for (int j = 1; j <= g.num_copies(); ++j)
      if (built.solution.services.mode[j] > 0) copy = j;
    REQUIRE(copy > 0);
    CHECK(built.solution.services.mode[copy] == 2);
    CHECK_THAT(built.schedule.makespan, Catch::Matchers::WithinAbs(35.0, 1e-9));
  }
  SECTION("two vehicles split four support vehicles evenly") {
    Instance inst = make_instance({spec_of(1, {10.0, 0.0}, 30.0, 3), spec_of(2, {0.0, 10.0}, 30.0, 3)},
                                  2, 4);
    BuiltSolution built = construction_heuristic(inst, VariantPolicy::parse("I|N|N"));
    ExpandedGraph g = build_graph(inst, built.solution.policy, 0.0);
    REQUIRE(built.solution.plan.routes.size() == 2);
    CHECK(built.solution.plan.routes[0].size() == 1);
    CHECK(built.solution.plan.routes[1].size() == 1);
    for (const auto& route : built.solution.plan.routes)
      for (int j : route) CHECK(built.solution.services.mode[j] == 2);
    FeasibilityReport rep = check_feasibility(inst, g, built.solution);
    CHECK(rep.feasible());
  }
  SECTION("feasible under every policy on random instances") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
      Instance inst = random_tiny(seed, 4, 3, 4);
      for (VariantPolicy policy : kIntegerPolicies) {
        BuiltSolution built = construction_heuristic(inst, policy);
        ExpandedGraph g = build_graph(inst, policy, 0.0);
        FeasibilityReport rep = check_feasibility(inst, g, built.solution);
        CAPTURE(inst.name, policy.name());
        CHECK(rep.feasible());
      }
    }
  }
}

TEST_CASE("exact search agrees with brute force on random tiny instances") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Instance inst = random_tiny(seed, 3, 2, 3);
    for (VariantPolicy policy : kIntegerPolicies) {
      SolveResult exact = solve_exact(inst, policy);
      SolveResult brute = brute_force(inst, policy);
      CAPTURE(inst.name, policy.name(), seed);
      REQUIRE(exact.status == SolveStatus::Optimal);
      REQUIRE(brute.status == SolveStatus::Optimal);
      CHECK_THAT(exact.makespan, Catch::Matchers::WithinAbs(brute.makespan, 1e-6));

      // heuristic upper bound sits above the optimum
      BuiltSolution built = construction_heuristic(inst, policy);
      CHECK(built.schedule.makespan >= brute.makespan - 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 200);
}

TEST_CASE("policy relaxations never increase the optimum") {
  for (std::uint64_t seed = 3; seed <= 20; ++seed) {
    Instance inst = random_tiny(seed, 3, 2, 3);
    double inn = solve_exact(inst, VariantPolicy::parse("I|N|N")).makespan;
    double isn = solve_exact(inst, VariantPolicy::parse("I|S|N")).makespan;
    double ins = solve_exact(inst, VariantPolicy::parse("I|N|S")).makespan;
    double iss = solve_exact(inst, VariantPolicy::parse("I|S|S")).makespan;
    CAPTURE(inst.name, seed);
    CHECK(iss <= isn + 1e-6);
    CHECK(isn <= inn + 1e-6);
    CHECK(iss <= ins + 1e-6);
    CHECK(ins <= inn + 1e-6);
  }
}

TEST_CASE("extra vehicles never hurt") {
  for (std::uint64_t seed = 2; seed <= 10; ++seed) {
    Instance base = random_tiny(seed, 3, 2, 2);
    VariantPolicy policy = VariantPolicy::parse("I|S|N");
    double here = solve_exact(base, policy).makespan;
    double more_support =
        solve_exact(with_fleet(base, base.fleet.primary_count, base.fleet.support_count + 1),
                    policy)
            .makespan;
    double more_primary =
        solve_exact(with_fleet(base, base.fleet.primary_count + 1, base.fleet.support_count),
                    policy)
            .makespan;
    CAPTURE(base.name, seed);
    CHECK(more_support <= here + 1e-9);
    CHECK(more_primary <= here + 1e-9);
  }
}

TEST_CASE("disabling pruning explores more but finds the same optimum") {
  for (std::uint64_t seed = 5; seed <= 16; ++seed) {
    Instance inst = random_tiny(seed, 3, 2, 3);
    for (VariantPolicy policy : {VariantPolicy::parse("I|N|N"), VariantPolicy::parse("I|S|S")}) {
      SolveResult pruned = solve_exact(inst, policy);
      SolveResult full = solve_exact(inst, policy, {}, false);
      CAPTURE(inst.name, policy.name());
      CHECK(full.stats.nodes >= pruned.stats.nodes);
      CHECK_THAT(full.makespan, Catch::Matchers::WithinAbs(pruned.makespan, 1e-12));
      CHECK(full.solution.flow.counts == pruned.solution.flow.counts);
      CHECK(full.solution.plan.routes == pruned.solution.plan.routes);
    }
  }
}

TEST_CASE("node limit yields a feasible result with a valid lower bound") {
  Instance inst = random_tiny(14, 3, 2, 3);
  VariantPolicy policy = VariantPolicy::parse("I|S|N");
  double optimum = solve_exact(inst, policy).makespan;

  SearchLimits limits;
  limits.max_nodes = 3;
  SolveResult res = solve_exact(inst, policy, limits);
  CHECK(res.status == SolveStatus::FeasibleLimit);
  CHECK(res.makespan >= optimum - 1e-9);
  CHECK(res.lower_bound <= optimum + 1e-9);
  ExpandedGraph g = build_graph(inst, policy, 0.0);
  CHECK(check_feasibility(inst, g, res.solution).feasible());
}

TEST_CASE("incumbent seeds are honored and validated") {
  Instance inst = random_tiny(4, 3, 2, 3);
  VariantPolicy policy = VariantPolicy::parse("I|N|N");
  SolveResult plain = solve_exact(inst, policy);

  SearchLimits limits;
  limits.seed = construction_heuristic(inst, policy).solution;
  SolveResult seeded = solve_exact(inst, policy, limits);
  CHECK_THAT(seeded.makespan, Catch::Matchers::WithinAbs(plain.makespan, 1e-9));

  Solution bad = *limits.seed;
  ExpandedGraph g = build_graph(inst, policy, 0.0);
  bad.flow.counts.assign(g.arcs.size(), 0);  // support fleet vanishes
  SearchLimits bad_limits;
  bad_limits.seed = bad;
  CHECK_THROWS_AS(solve_exact(inst, policy, bad_limits), std::invalid_argument);
}

TEST_CASE("brute force refuses oversized instances") {
  GenConfig cfg;
  cfg.num_customers = 5;
  cfg.primary_count = 2;
  cfg.support_count = 2;
  cfg.seed = 1;
  Instance big = generate_instance(cfg);
  CHECK_THROWS_WITH(brute_force(big, VariantPolicy::parse("I|N|N")),
                    Catch::Matchers::ContainsSubstring("caps"));

  cfg.num_customers = 2;
  cfg.support_count = 4;
  Instance wide = generate_instance(cfg);
  CHECK_THROWS_WITH(brute_force(wide, VariantPolicy::parse("I|N|N")),
                    Catch::Matchers::ContainsSubstring("caps"));
}

TEST_CASE("solver output is deterministic") {
  Instance inst = random_tiny(11, 3, 2, 3);
  VariantPolicy policy = VariantPolicy::parse("I|S|S");
  SolveResult a = solve_exact(inst, policy);
  SolveResult b = solve_exact(inst, policy);
  CHECK(a.makespan == b.makespan);
  CHECK(a.solution.flow.counts == b.solution.flow.counts);
  CHECK(a.solution.plan.routes == b.solution.plan.routes);
  CHECK(a.stats.nodes == b.stats.nodes);
}

TEST_CASE("empty-state bound equals the single-customer relaxation") {
  Instance inst = make_instance(
      {spec_of(1, {3.0, 4.0}, 30.0, 2), spec_of(2, {8.0, 6.0}, 40.0, 4)}, 2, 2);
  VariantPolicy policy = VariantPolicy::parse("I|N|N");
  ExpandedGraph g = build_graph(inst, policy, 0.0);
  double bound = partial_lower_bound(inst, g, SearchState{});
  // customer 2: distance 10, fastest service 40; customer 1: 5 + 30
  CHECK(bound >= 10.0 + 40.0 - 1e-9);

  // support workload can dominate: with one support vehicle the attendance
  // m*s is d*b regardless of mode
  Instance heavy = make_instance({spec_of(1, {1.0, 0.0}, 50.0, 4)}, 1, 1);
  ExpandedGraph gh = build_graph(heavy, policy, 0.0);
  double heavy_bound = partial_lower_bound(heavy, gh, SearchState{});
  CHECK(heavy_bound >= 200.0);
}

TEST_CASE("fully fixed states are bounded by their own makespan") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Instance inst = random_tiny(seed, 3, 2, 3);
    for (VariantPolicy policy : kIntegerPolicies) {
      SolveResult res = solve_exact(inst, policy);
      ExpandedGraph g = build_graph(inst, policy, 0.0);
      SearchState state;
      for (int v = 1; v <= inst.num_customers(); ++v) {
        unsigned mask = 0;
        for (std::size_t k = 0; k < res.solution.plan.routes.size(); ++k)
          for (int j : res.solution.plan.routes[k])
            if (g.original_of(j) == v) mask |= 1u << k;
        state.assign.push_back(mask);
      }
      state.routes = res.solution.plan.routes;
      state.support_paths = decompose_flow(g, res.solution.flow).paths;
      double bound = partial_lower_bound(inst, g, state);
      CAPTURE(inst.name, policy.name());
      CHECK(bound <= res.makespan + 1e-9);
    }
  }
}

TEST_CASE("partial bounds never exceed the best completion") {
  std::mt19937_64 rng(20260819);
  int states_checked = 0;
  int nonvacuous = 0;
  while (states_checked < 1000) {
    std::uint64_t seed = rng();
    Instance inst = random_tiny(seed, 2, 2, 2);
    VariantPolicy policy = kIntegerPolicies[rng() % 4];
    ExpandedGraph g = build_graph(inst, policy, 0.0);
    SearchState state = sample_partial_state(rng, inst, g, policy);

    double bound = partial_lower_bound(inst, g, state);
    double best = best_completion(inst, g, policy, state);
    ++states_checked;
    if (best == std::numeric_limits<double>::infinity()) continue;
    ++nonvacuous;
    CAPTURE(inst.name, policy.name(), state.assign.size(), state.routes.size(),
            state.support_paths.size());
    REQUIRE(bound <= best + 1e-9);
  }
  CHECK(nonvacuous > 500);
}

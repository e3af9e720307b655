#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "svrp/bench.hpp"
#include "svrp/exact.hpp"
#include "svrp/graph.hpp"
#include "svrp/instance.hpp"
#include "svrp/schedule.hpp"

using namespace svrp;
using Catch::Matchers::WithinAbs;

namespace {

Instance random_tiny(std::uint64_t seed, int max_v, int max_k, int max_o) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.num_customers = 1 + static_cast<int>(seed % max_v);
  cfg.primary_count = 1 + static_cast<int>((seed / 3) % max_k);
  cfg.support_count = 1 + static_cast<int>((seed / 7) % max_o);
  cfg.plane_size = 60.0;
  return generate_instance(cfg);
}

RunRecord fake_record(const std::string& instance, const std::string& policy,
                      double makespan, double lower, const std::string& status,
                      double time_s) {
  RunRecord r;
  r.instance = instance;
  r.policy = policy;
  r.makespan = makespan;
  r.lower_bound = lower;
  r.status = status;
  r.nodes = 1;
  r.time_s = time_s;
  return r;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

TEST_CASE("gap clamps to the unit interval") {
  CHECK(record_gap(fake_record("a", "I|S|N", 100.0, 75.0, "feasible", 0)) ==
        Catch::Approx(0.25));
  CHECK(record_gap(fake_record("a", "I|S|N", 40.0, 40.0, "optimal", 0)) == 0.0);
  // Degenerate bounds never produce a negative or undefined gap.
  CHECK(record_gap(fake_record("a", "I|S|N", 40.0, 41.0, "optimal", 0)) == 0.0);
  CHECK(record_gap(fake_record("a", "I|S|N",
                               std::numeric_limits<double>::infinity(), 0.0,
                               "infeasible", 0)) == 0.0);
  CHECK(record_gap(fake_record("a", "I|S|N", 0.0, 0.0, "optimal", 0)) == 0.0);
}

TEST_CASE("solved runs produce closed records") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Instance inst = random_tiny(seed, 3, 2, 3);
    for (const std::string& name : benchmark_policies()) {
      RunRecord rec = run_one(inst, VariantPolicy::parse(name));
      INFO(inst.name << " " << name);
      CHECK(rec.instance == inst.name);
      CHECK(rec.policy == name);
      CHECK(rec.status == "optimal");
      CHECK(std::isfinite(rec.makespan));
      CHECK(rec.makespan >= rec.lower_bound - 1e-6);
      CHECK(record_gap(rec) == 0.0);
      CHECK(rec.nodes > 0);
      CHECK(rec.time_s >= 0.0);
    }
  }
}

TEST_CASE("limited runs keep the incumbent and a valid bound") {
  Instance inst = random_tiny(5, 3, 2, 3);
  SearchLimits limits;
  limits.max_nodes = 1;
  RunRecord rec = run_one(inst, VariantPolicy::parse("I|S|N"), limits);
  CHECK(rec.status == "feasible");
  CHECK(std::isfinite(rec.makespan));
  CHECK(rec.makespan >= rec.lower_bound - 1e-6);
  CHECK(record_gap(rec) >= 0.0);

  RunRecord closed = run_one(inst, VariantPolicy::parse("I|S|N"));
  CHECK(rec.makespan >= closed.makespan - 1e-6);
  CHECK(rec.lower_bound <= closed.makespan + 1e-6);
}

TEST_CASE("the grid covers every documented cell") {
  BenchConfig bc;
  bc.customers = {3};
  bc.per_config = 2;
  bc.seed = 1;
  std::vector<Instance> instances = bench_instances(bc);
  REQUIRE(instances.size() == 24);  // 12 fleet cells, two seeds each

  std::vector<std::pair<int, int>> fleets;
  for (const Instance& inst : instances)
    fleets.emplace_back(inst.fleet.primary_count, inst.fleet.support_count);
  for (const auto& [k, supports] : fleet_grid())
    for (int o : supports) {
      CHECK(std::count(fleets.begin(), fleets.end(), std::make_pair(k, o)) == 2);
    }

  // Names carry the cell label and the replicate seed.
  CHECK(instances[0].name.rfind("03-02-04_s1", 0) == 0);
  CHECK(instances[1].name.rfind("03-02-04_s2", 0) == 0);

  std::vector<Instance> again = bench_instances(bc);
  REQUIRE(again.size() == instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    CHECK(again[i].name == instances[i].name);
    CHECK(again[i].customers.size() == instances[i].customers.size());
  }
}

TEST_CASE("worker count never changes the results") {
  BenchConfig serial;
  serial.customers = {2};
  serial.per_config = 1;
  serial.policies = {"I|N|N", "I|S|S"};
  serial.jobs = 1;
  // Splitting with a large support fleet does not close at this budget; the
  // node cap aborts those cells deterministically, unlike a wall clock.
  serial.limits.max_nodes = 30000;
  BenchConfig parallel = serial;
  parallel.jobs = 4;

  std::vector<RunRecord> a = run_bench(serial);
  std::vector<RunRecord> b = run_bench(parallel);
  REQUIRE(a.size() == 24);  // 12 cells, one seed, two policies
  REQUIRE(b.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    INFO(a[i].instance << " " << a[i].policy);
    CHECK(a[i].instance == b[i].instance);
    CHECK(a[i].policy == b[i].policy);
    CHECK(a[i].status == b[i].status);
    CHECK(a[i].nodes == b[i].nodes);
    CHECK_THAT(a[i].makespan, WithinAbs(b[i].makespan, 1e-12));
    CHECK_THAT(a[i].lower_bound, WithinAbs(b[i].lower_bound, 1e-12));
  }
  for (std::size_t i = 1; i < a.size(); ++i) {
    bool ordered = a[i - 1].instance < a[i].instance ||
                   (a[i - 1].instance == a[i].instance &&
                    a[i - 1].policy < a[i].policy);
    CHECK(ordered);
  }
}

TEST_CASE("the records table is canonical csv") {
  std::vector<RunRecord> records = {
      fake_record("03-02-04_s2_g", "I|S|N", 50.0, 50.0, "optimal", 1.25),
      fake_record("03-02-04_s1_g", "I|S|S", 40.0, 30.0, "feasible", 2.5),
      fake_record("03-02-04_s1_g", "I|N|N", 60.0, 60.0, "optimal", 0.125),
  };
  std::string csv = records_csv(records);

  std::vector<std::string> lines = split_lines(csv);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "instance,policy,makespan,lower_bound,gap,status,nodes,time_s");
  CHECK(lines[1] == "03-02-04_s1_g,I|N|N,60.000000,60.000000,0.000000,optimal,1,0.125");
  CHECK(lines[2] == "03-02-04_s1_g,I|S|S,40.000000,30.000000,0.250000,feasible,1,2.500");
  CHECK(lines[3] == "03-02-04_s2_g,I|S|N,50.000000,50.000000,0.000000,optimal,1,1.250");

  // Input order is irrelevant, the writer sorts.
  std::vector<RunRecord> shuffled = {records[1], records[0], records[2]};
  CHECK(records_csv(shuffled) == csv);
}

TEST_CASE("summaries aggregate per cell and count ties") {
  std::vector<RunRecord> records = {
      fake_record("03-02-04_s1_g", "A", 10.0, 10.0, "optimal", 2.0),
      fake_record("03-02-04_s1_g", "B", 10.0 + 5e-7, 8.0, "feasible", 4.0),
      fake_record("03-02-04_s2_g", "A", 12.0, 12.0, "optimal", 6.0),
      fake_record("03-02-04_s2_g", "B", 15.0, 12.0, "feasible", 8.0),
      fake_record("05-02-04_s1_g", "A", 20.0, 20.0, "optimal", 1.0),
  };
  std::vector<SummaryRow> rows = summarize(records);
  REQUIRE(rows.size() == 3);

  CHECK(rows[0].customers == 3);
  CHECK(rows[0].policy == "A");
  CHECK(rows[0].runs == 2);
  CHECK_THAT(rows[0].mean_time_s, WithinAbs(4.0, 1e-12));
  CHECK(rows[0].mean_gap == 0.0);
  CHECK(rows[0].optimal == 2);
  CHECK(rows[0].best == 2);

  CHECK(rows[1].customers == 3);
  CHECK(rows[1].policy == "B");
  CHECK(rows[1].runs == 2);
  CHECK_THAT(rows[1].mean_time_s, WithinAbs(6.0, 1e-12));
  double gap_s1 = (10.0 + 5e-7 - 8.0) / (10.0 + 5e-7);
  double gap_s2 = (15.0 - 12.0) / 15.0;
  CHECK_THAT(rows[1].mean_gap, WithinAbs((gap_s1 + gap_s2) / 2.0, 1e-12));
  CHECK(rows[1].optimal == 0);
  CHECK(rows[1].best == 1);  // ties the winner on s1, loses s2

  CHECK(rows[2].customers == 5);
  CHECK(rows[2].policy == "A");
  CHECK(rows[2].runs == 1);
  CHECK(rows[2].best == 1);

  CHECK_THROWS_AS(summarize({}), std::invalid_argument);

  std::string csv = summary_csv(rows);
  std::vector<std::string> lines = split_lines(csv);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "customers,policy,runs,mean_time_s,mean_gap,optimal,best");
  CHECK(lines[1] == "3,A,2,4.000,0.000000,2,2");
  CHECK(lines[3] == "5,A,1,1.000,0.000000,1,1");
}

TEST_CASE("the checker accepts everything the solver writes") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Instance inst = random_tiny(seed, 3, 2, 4);
    const std::string& name =
        benchmark_policies()[static_cast<std::size_t>(seed) % 4];
    VariantPolicy policy = VariantPolicy::parse(name);
    SolveResult res = solve_exact(inst, policy);
    REQUIRE(res.status == SolveStatus::Optimal);

    ExpandedGraph g = build_graph(inst, policy, 0.0);
    std::string text = write_solution(g, res.solution, &res.schedule);
    LoadedSolution loaded = read_solution(g, text);

    INFO(inst.name << " " << name);
    FeasibilityReport report = check_feasibility(inst, g, loaded.solution);
    for (const CheckEntry& e : report.entries) {
      INFO(e.family << ": " << e.detail);
      CHECK(e.pass);
    }

    ScheduleOutcome sched = compute_schedule(g, loaded.solution);
    REQUIRE(sched.feasible);
    REQUIRE(loaded.schedule.has_value());
    CHECK_THAT(sched.schedule.makespan, WithinAbs(res.makespan, 1e-6));
    CHECK_THAT(loaded.schedule->makespan, WithinAbs(res.makespan, 1e-6));

    // Serialization is a fixed point.
    CHECK(write_solution(g, loaded.solution, &*loaded.schedule) == text);
  }
}

TEST_CASE("comparison rows track the baseline") {
  Instance inst = random_tiny(9, 3, 2, 4);
  std::vector<CompareRow> rows = compare_policies(inst);
  REQUIRE(rows.size() == 4);

  double base = std::numeric_limits<double>::quiet_NaN();
  for (const CompareRow& r : rows)
    if (r.policy == "I|S|N") base = r.makespan;
  REQUIRE(std::isfinite(base));

  std::map<std::string, double> makespan;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].instance == inst.name);
    CHECK(rows[i].policy == benchmark_policies()[i]);
    CHECK(rows[i].status == "optimal");
    CHECK_THAT(rows[i].change,
               WithinAbs((rows[i].makespan - base) / base, 1e-12));
    makespan[rows[i].policy] = rows[i].makespan;
  }
  CHECK(makespan.at("I|S|N") == Catch::Approx(base));

  // Relaxing a restriction never hurts.
  CHECK(makespan.at("I|S|S") <= makespan.at("I|S|N") + 1e-6);
  CHECK(makespan.at("I|S|S") <= makespan.at("I|N|S") + 1e-6);
  CHECK(makespan.at("I|N|S") <= makespan.at("I|N|N") + 1e-6);
  CHECK(makespan.at("I|S|N") <= makespan.at("I|N|N") + 1e-6);

  std::string csv = compare_csv(rows);
  std::vector<std::string> lines = split_lines(csv);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "instance,policy,makespan,change,status");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields = split_csv(lines[i]);
    REQUIRE(fields.size() == 5);
    CHECK(fields[0] == inst.name);
    CHECK(fields[1] == benchmark_policies()[i - 1]);
    CHECK(fields[4] == "optimal");
  }
}

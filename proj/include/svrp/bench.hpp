#pragma once

// Experiment harness: timed runs over instance grids, solution files, CSV
// tables. Everything here is string-in/string-out; file handling stays in
// the callers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "svrp/exact.hpp"
#include "svrp/graph.hpp"
#include "svrp/instance.hpp"
#include "svrp/schedule.hpp"

namespace svrp {

// The four variants benchmarked against each other. I|S|N is the baseline
// the others are compared to.
inline const std::vector<std::string>& benchmark_policies() {
  static const std::vector<std::string> kPolicies = {"I|N|N", "I|N|S", "I|S|N",
                                                     "I|S|S"};
  return kPolicies;
}

inline constexpr std::string_view kBaselinePolicy = "I|S|N";

// ---------------------------------------------------------------------------
// Run records

struct RunRecord {
  std::string instance;
  std::string policy;
  double makespan = std::numeric_limits<double>::infinity();
  double lower_bound = 0.0;
  std::string status;  // "optimal", "feasible" or "infeasible"
  std::uint64_t nodes = 0;
  double time_s = 0.0;
};

// Relative optimality gap, the usual (upper - lower) / upper. Zero whenever
// the upper bound is missing or degenerate; never negative.
inline double record_gap(const RunRecord& r) {
  if (!std::isfinite(r.makespan) || r.makespan <= 0.0) return 0.0;
  double gap = (r.makespan - r.lower_bound) / r.makespan;
  return gap < 0.0 ? 0.0 : gap;
}

inline const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::FeasibleLimit: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "infeasible";
}

inline RunRecord run_one(const Instance& inst, VariantPolicy policy,
                         const SearchLimits& limits = {}) {
  SolveResult res = solve_exact(inst, policy, limits);
  RunRecord rec;
  rec.instance = inst.name;
  rec.policy = policy.name();
  rec.makespan = res.makespan;
  rec.lower_bound = res.lower_bound;
  rec.status = status_name(res.status);
  rec.nodes = res.stats.nodes;
  rec.time_s = res.stats.time_s;
  return rec;
}

// ---------------------------------------------------------------------------
// Benchmark grid

// Support-fleet sizes scale with the primary fleet so that every primary
// vehicle can be escorted without starving the rest.
inline const std::vector<std::pair<int, std::vector<int>>>& fleet_grid() {
  static const std::vector<std::pair<int, std::vector<int>>> kGrid = {
      {2, {4, 5, 6, 7}},
      {3, {6, 7, 8, 9}},
      {4, {8, 9, 10, 11}},
  };
  return kGrid;
}

struct BenchConfig {
  std::vector<int> customers = {3};
  int per_config = 2;
  std::uint64_t seed = 1;
  std::vector<std::string> policies = benchmark_policies();
  SearchLimits limits;
  int jobs = 1;
};

inline std::vector<Instance> bench_instances(const BenchConfig& bc) {
  std::vector<Instance> out;
  for (int v : bc.customers) {
    if (v < 1) throw std::invalid_argument("bench: customers must be >= 1");
    for (const auto& [k, supports] : fleet_grid()) {
      for (int o : supports) {
        for (int r = 0; r < bc.per_config; ++r) {
          GenConfig cfg;
          cfg.num_customers = v;
          cfg.primary_count = k;
          cfg.support_count = o;
          cfg.seed = bc.seed + static_cast<std::uint64_t>(r);
          out.push_back(generate_instance(cfg));
        }
      }
    }
  }
  return out;
}

// Runs the whole grid. Worker threads pull (instance, policy) tasks from a
// shared counter; the result order is fixed afterwards, so --jobs never
// changes the output.
inline std::vector<RunRecord> run_bench(const BenchConfig& bc) {
  std::vector<Instance> instances = bench_instances(bc);
  std::vector<VariantPolicy> policies;
  policies.reserve(bc.policies.size());
  for (const std::string& p : bc.policies)
    policies.push_back(VariantPolicy::parse(p));

  struct Task {
    const Instance* inst;
    VariantPolicy policy;
  };
  std::vector<Task> tasks;
  tasks.reserve(instances.size() * policies.size());
  for (const Instance& inst : instances)
    for (VariantPolicy policy : policies) tasks.push_back({&inst, policy});

  std::vector<RunRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) break;
      records[t] = run_one(*tasks[t].inst, tasks[t].policy, bc.limits);
    }
  };
  int jobs = std::max(1, bc.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  std::sort(records.begin(), records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              if (a.instance != b.instance) return a.instance < b.instance;
              return a.policy < b.policy;
            });
  return records;
}

// ---------------------------------------------------------------------------
// CSV tables

namespace detail {

inline void append_csv_number(std::string& out, double x, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, x);
  out += buf;
}

}  // namespace detail

inline std::string records_csv(std::vector<RunRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              if (a.instance != b.instance) return a.instance < b.instance;
              return a.policy < b.policy;
            });
  std::string out = "instance,policy,makespan,lower_bound,gap,status,nodes,time_s\n";
  for (const RunRecord& r : records) {
    out += r.instance;
    out += ',';
    out += r.policy;
    out += ',';
    detail::append_csv_number(out, r.makespan, "%.6f");
    out += ',';
    detail::append_csv_number(out, r.lower_bound, "%.6f");
    out += ',';
    detail::append_csv_number(out, record_gap(r), "%.6f");
    out += ',';
    out += r.status;
    out += ',';
    out += std::to_string(r.nodes);
    out += ',';
    detail::append_csv_number(out, r.time_s, "%.3f");
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

struct SummaryRow {
  int customers = 0;
  std::string policy;
  int runs = 0;
  double mean_time_s = 0.0;
  double mean_gap = 0.0;
  int optimal = 0;  // runs closed with proof
  int best = 0;     // runs matching the best makespan on their instance
};

// Aggregates per (customer count, policy). "best" counts a run when its
// makespan ties the instance-wide minimum within 1e-6, so several policies
// can share the credit.
inline std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");

  std::map<std::string, double> best_makespan;
  for (const RunRecord& r : records) {
    auto [it, fresh] = best_makespan.try_emplace(r.instance, r.makespan);
    if (!fresh && r.makespan < it->second) it->second = r.makespan;
  }

  std::map<std::pair<int, std::string>, SummaryRow> groups;
  for (const RunRecord& r : records) {
    int customers = std::atoi(r.instance.c_str());
    SummaryRow& row = groups[{customers, r.policy}];
    row.customers = customers;
    row.policy = r.policy;
    row.runs += 1;
    row.mean_time_s += r.time_s;
    row.mean_gap += record_gap(r);
    if (r.status == "optimal") row.optimal += 1;
    if (std::isfinite(r.makespan) &&
        r.makespan <= best_makespan.at(r.instance) + 1e-6)
      row.best += 1;
  }

  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, row] : groups) {
    row.mean_time_s /= row.runs;
    row.mean_gap /= row.runs;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "customers,policy,runs,mean_time_s,mean_gap,optimal,best\n";
  char buf[160];
  for (const SummaryRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%d,%.3f,%.6f,%d,%d\n", r.customers,
                  r.policy.c_str(), r.runs, r.mean_time_s, r.mean_gap,
                  r.optimal, r.best);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Policy comparison on one instance

struct CompareRow {
  std::string instance;
  std::string policy;
  std::string status;
  double makespan = std::numeric_limits<double>::infinity();
  double change = 0.0;  // relative to the baseline makespan
};

inline std::vector<CompareRow> compare_policies(const Instance& inst,
                                                const SearchLimits& limits = {}) {
  std::vector<RunRecord> runs;
  for (const std::string& p : benchmark_policies())
    runs.push_back(run_one(inst, VariantPolicy::parse(p), limits));

  const RunRecord* base = nullptr;
  for (const RunRecord& r : runs)
    if (r.policy == kBaselinePolicy) base = &r;

  std::vector<CompareRow> rows;
  for (const RunRecord& r : runs) {
    CompareRow row;
    row.instance = r.instance;
    row.policy = r.policy;
    row.status = r.status;
    row.makespan = r.makespan;
    if (base != nullptr && std::isfinite(base->makespan) &&
        base->makespan > 0.0 && std::isfinite(r.makespan))
      row.change = (r.makespan - base->makespan) / base->makespan;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::string out = "instance,policy,makespan,change,status\n";
  for (const CompareRow& r : rows) {
    out += r.instance;
    out += ',';
    out += r.policy;
    out += ',';
    detail::append_csv_number(out, r.makespan, "%.6f");
    out += ',';
    detail::append_csv_number(out, r.change, "%.6f");
    out += ',';
    out += r.status;
    out += '\n';
  }
  return out;
}

}  // namespace svrp

// Command line front end. Exit codes: 0 success, 1 infeasible input or
// failed validation, 2 usage error, 3 stopped at a search limit (the best
// incumbent is still written).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "svrp/bench.hpp"
#include "svrp/exact.hpp"
#include "svrp/graph.hpp"
#include "svrp/instance.hpp"
#include "svrp/milp.hpp"
#include "svrp/schedule.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kLimit = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// foo/bar.json -> foo/bar<suffix>, anything else just gets the suffix.
std::string derive_path(const std::string& input, const std::string& suffix) {
  const std::string ext = ".json";
  if (input.size() > ext.size() &&
      input.compare(input.size() - ext.size(), ext.size(), ext) == 0)
    return input.substr(0, input.size() - ext.size()) + suffix;
  return input + suffix;
}

svrp::SearchLimits make_limits(double time_limit, std::uint64_t node_limit) {
  svrp::SearchLimits limits;
  if (time_limit > 0) limits.max_time_s = time_limit;
  if (node_limit > 0) limits.max_nodes = node_limit;
  return limits;
}

const CLI::Validator kPolicyName(
    [](std::string& s) -> std::string {
      try {
        svrp::VariantPolicy::parse(s);
        return {};
      } catch (const std::exception& e) {
        return std::string(e.what());
      }
    },
    "POLICY");

struct GenArgs {
  svrp::GenConfig cfg;
  std::string out;
};

int run_gen(const GenArgs& args) {
  svrp::Instance inst = svrp::generate_instance(args.cfg);
  std::string path = args.out;
  if (path.empty())
    path = svrp::config_label(args.cfg.num_customers, args.cfg.primary_count,
                              args.cfg.support_count) +
           "_s" + std::to_string(args.cfg.seed) + ".json";
  write_file(path, svrp::write_instance(inst));
  std::printf("%s: %d customers, %d primary, %d support\n", path.c_str(),
              inst.num_customers(), inst.fleet.primary_count,
              inst.fleet.support_count);
  return kOk;
}

struct SolveArgs {
  std::string instance;
  std::string policy = "I|S|N";
  double time_limit = 60.0;
  std::uint64_t node_limit = 0;
  std::string out;
};

int run_solve(const SolveArgs& args) {
  svrp::Instance inst = svrp::read_instance(read_file(args.instance));
  svrp::VariantPolicy policy = svrp::VariantPolicy::parse(args.policy);
  svrp::SolveResult res =
      svrp::solve_exact(inst, policy, make_limits(args.time_limit, args.node_limit));

  std::printf("%s %s %s", inst.name.c_str(), policy.name().c_str(),
              svrp::status_name(res.status));
  if (res.status == svrp::SolveStatus::Infeasible) {
    std::printf("\n");
    return kFailed;
  }
  std::printf(" makespan=%.6f lower_bound=%.6f nodes=%llu time=%.3fs\n",
              res.makespan, res.lower_bound,
              static_cast<unsigned long long>(res.stats.nodes),
              res.stats.time_s);

  svrp::ExpandedGraph g = svrp::build_graph(inst, policy, 0.0);
  std::string path =
      args.out.empty() ? derive_path(args.instance, ".sol.json") : args.out;
  write_file(path, svrp::write_solution(g, res.solution, &res.schedule));
  std::printf("wrote %s\n", path.c_str());
  return res.status == svrp::SolveStatus::Optimal ? kOk : kLimit;
}

struct CheckArgs {
  std::string instance;
  std::string solution;
  std::string policy;  // overrides the file when set
};

int run_check(const CheckArgs& args) {
  svrp::Instance inst = svrp::read_instance(read_file(args.instance));
  std::string text = read_file(args.solution);

  std::string policy_name = args.policy;
  if (policy_name.empty()) {
    try {
      policy_name = nlohmann::json::parse(text).at("policy").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw svrp::ParseError(std::string("solution: ") + e.what());
    }
  }
  svrp::VariantPolicy policy = svrp::VariantPolicy::parse(policy_name);
  svrp::ExpandedGraph g = svrp::build_graph(inst, policy, 0.0);
  svrp::LoadedSolution loaded = svrp::read_solution(g, text);
  loaded.solution.policy = policy;

  svrp::FeasibilityReport report = svrp::check_feasibility(inst, g, loaded.solution);
  bool ok = report.feasible();
  for (const svrp::CheckEntry& e : report.entries) {
    if (e.pass)
      std::printf("ok   %s\n", e.family.c_str());
    else
      std::printf("FAIL %s: %s\n", e.family.c_str(), e.detail.c_str());
  }
  for (const std::string& w : report.warnings)
    std::printf("warn %s\n", w.c_str());

  if (ok) {
    svrp::ScheduleOutcome sched = svrp::compute_schedule(g, loaded.solution);
    if (loaded.schedule &&
        std::fabs(loaded.schedule->makespan - sched.schedule.makespan) > 1e-6) {
      std::printf("FAIL makespan: file says %.6f, recomputed %.6f\n",
                  loaded.schedule->makespan, sched.schedule.makespan);
      ok = false;
    } else {
      std::printf("makespan %.6f\n", sched.schedule.makespan);
    }
  }
  std::printf("%s\n", ok ? "feasible" : "infeasible");
  return ok ? kOk : kFailed;
}

struct ExportArgs {
  std::string instance;
  std::string flow = "I";
  bool allow_switch = false;
  bool allow_split = false;
  bool cuts = false;
  std::string out;
};

int run_export(const ExportArgs& args) {
  svrp::Instance inst = svrp::read_instance(read_file(args.instance));
  std::string name = args.flow + "|" + (args.allow_switch ? "S" : "N") + "|" +
                     (args.allow_split ? "S" : "N");
  svrp::VariantPolicy policy = svrp::VariantPolicy::parse(name);
  double big_m = svrp::estimate_big_m(inst, policy);
  svrp::ExpandedGraph g = svrp::build_graph(inst, policy, big_m);
  svrp::MilpModel model = svrp::build_model(inst, g, args.cuts);
  std::string path =
      args.out.empty() ? derive_path(args.instance, ".lp") : args.out;
  write_file(path, svrp::export_lp_file(model));
  std::printf("%s: %s%s, %zu variables, %zu rows\n", path.c_str(),
              policy.name().c_str(), args.cuts ? " with cuts" : "",
              model.vars.size(), model.rows.size());
  return kOk;
}

struct BenchArgs {
  svrp::BenchConfig cfg;
  double time_limit = 60.0;
  std::uint64_t node_limit = 0;
  std::string out = "bench.csv";
  std::string summary;
};

int run_bench_cmd(BenchArgs& args) {
  args.cfg.limits = make_limits(args.time_limit, args.node_limit);
  std::vector<svrp::RunRecord> records = svrp::run_bench(args.cfg);
  write_file(args.out, svrp::records_csv(records));
  std::string summary = svrp::summary_csv(svrp::summarize(records));
  if (!args.summary.empty()) write_file(args.summary, summary);
  std::printf("%zu runs -> %s\n%s", records.size(), args.out.c_str(),
              summary.c_str());
  return kOk;
}

struct CompareArgs {
  std::string instance;
  double time_limit = 60.0;
  std::uint64_t node_limit = 0;
  std::string out;
};

int run_compare(const CompareArgs& args) {
  svrp::Instance inst = svrp::read_instance(read_file(args.instance));
  std::vector<svrp::CompareRow> rows =
      svrp::compare_policies(inst, make_limits(args.time_limit, args.node_limit));
  std::string csv = svrp::compare_csv(rows);
  if (args.out.empty())
    std::printf("%s", csv.c_str());
  else
    write_file(args.out, csv);

  for (const svrp::CompareRow& r : rows)
    if (r.status != "optimal") {
      std::fprintf(stderr, "note: %s %s stopped at a limit, ordering not verified\n",
                   r.instance.c_str(), r.policy.c_str());
      return kLimit;
    }

  auto makespan_of = [&](const char* policy) {
    for (const svrp::CompareRow& r : rows)
      if (r.policy == policy) return r.makespan;
    throw std::logic_error("compare: missing policy row");
  };
  double inn = makespan_of("I|N|N");
  double ins = makespan_of("I|N|S");
  double isn = makespan_of("I|S|N");
  double iss = makespan_of("I|S|S");
  bool ordered = iss <= ins + 1e-6 && ins <= inn + 1e-6 && iss <= isn + 1e-6 &&
                 isn <= inn + 1e-6;
  if (!ordered) {
    std::fprintf(stderr, "error: optimal makespans violate the relaxation order\n");
    return kFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"routing with synchronized support vehicles"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a random instance");
  gen_cmd->add_option("--customers", gen.cfg.num_customers, "customer count")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--primary", gen.cfg.primary_count, "primary vehicles")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--support", gen.cfg.support_count, "support vehicles")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.cfg.seed, "rng seed")->capture_default_str();
  gen_cmd->add_option("--plane", gen.cfg.plane_size, "square side length")
      ->capture_default_str();
  gen_cmd->add_option("--demand-min", gen.cfg.demand_min)->capture_default_str();
  gen_cmd->add_option("--demand-max", gen.cfg.demand_max)->capture_default_str();
  gen_cmd->add_option("--modes-min", gen.cfg.max_modes_min)->capture_default_str();
  gen_cmd->add_option("--modes-max", gen.cfg.max_modes_max)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output path (default <label>_s<seed>.json)");

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve an instance to optimality");
  solve_cmd->add_option("--instance", solve.instance, "instance file")
      ->required()
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--policy", solve.policy, "variant, e.g. I|S|N")
      ->capture_default_str()
      ->check(kPolicyName);
  solve_cmd->add_option("--time-limit", solve.time_limit, "seconds, 0 = none")
      ->capture_default_str();
  solve_cmd->add_option("--node-limit", solve.node_limit, "search nodes, 0 = none");
  solve_cmd->add_option("--out", solve.out, "solution path (default <instance>.sol.json)");

  CheckArgs check;
  CLI::App* check_cmd = app.add_subcommand("check", "validate a solution file");
  check_cmd->add_option("--instance", check.instance, "instance file")
      ->required()
      ->check(CLI::ExistingFile);
  check_cmd->add_option("--solution", check.solution, "solution file")
      ->required()
      ->check(CLI::ExistingFile);
  check_cmd->add_option("--policy", check.policy, "override the recorded variant")
      ->check(kPolicyName);

  ExportArgs exp;
  CLI::App* export_cmd = app.add_subcommand("export-lp", "write the model in LP format");
  export_cmd->add_option("--instance", exp.instance, "instance file")
      ->required()
      ->check(CLI::ExistingFile);
  export_cmd->add_option("--flow", exp.flow, "support flow encoding")
      ->capture_default_str()
      ->check(CLI::IsMember({"I", "B"}));
  export_cmd->add_flag("--switch", exp.allow_switch, "allow support switching");
  export_cmd->add_flag("--split", exp.allow_split, "allow split service");
  export_cmd->add_flag("--cuts", exp.cuts, "add the strengthening rows");
  export_cmd->add_option("--out", exp.out, "output path (default <instance>.lp)");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "run the benchmark grid");
  bench_cmd->add_option("--customers", bench.cfg.customers, "customer counts")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--per-config", bench.cfg.per_config, "instances per cell")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.cfg.seed, "first rng seed")
      ->capture_default_str();
  bench_cmd->add_option("--policy", bench.cfg.policies, "variants to run")
      ->delimiter(',')
      ->check(kPolicyName);
  bench_cmd->add_option("--time-limit", bench.time_limit, "seconds per run, 0 = none")
      ->capture_default_str();
  bench_cmd->add_option("--node-limit", bench.node_limit, "nodes per run, 0 = none");
  bench_cmd->add_option("--jobs", bench.cfg.jobs, "parallel workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "records csv")->capture_default_str();
  bench_cmd->add_option("--summary", bench.summary, "also write the summary csv here");

  CompareArgs cmp;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "solve all four variants and compare");
  compare_cmd->add_option("--instance", cmp.instance, "instance file")
      ->required()
      ->check(CLI::ExistingFile);
  compare_cmd->add_option("--time-limit", cmp.time_limit, "seconds per run, 0 = none")
      ->capture_default_str();
  compare_cmd->add_option("--node-limit", cmp.node_limit, "nodes per run, 0 = none");
  compare_cmd->add_option("--out", cmp.out, "csv path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(gen_cmd)) return run_gen(gen);
    if (app.got_subcommand(solve_cmd)) return run_solve(solve);
    if (app.got_subcommand(check_cmd)) return run_check(check);
    if (app.got_subcommand(export_cmd)) return run_export(exp);
    if (app.got_subcommand(bench_cmd)) return run_bench_cmd(bench);
    if (app.got_subcommand(compare_cmd)) return run_compare(cmp);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailed;
  }
  return 2;
}

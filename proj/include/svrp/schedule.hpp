#pragma once

// Solution representation and evaluation: feasibility checking, longest-path
// scheduling, conversion between per-vehicle paths and per-arc flow counts,
// and the split-service timing LP.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svrp/graph.hpp"
#include "svrp/instance.hpp"
#include "svrp/lp.hpp"

namespace svrp {

// Ordered customer copies per primary vehicle, route k listed at index k-1.
// Depot endpoints are implicit.
struct PrimaryPlan {
  std::vector<std::vector<int>> routes;
};

// Per-arc support-vehicle counts, aligned with ExpandedGraph::arcs.
struct SupportFlow {
  std::vector<int> counts;

  bool used(std::size_t arc) const { return counts[arc] > 0; }
};

inline SupportFlow zero_flow(const ExpandedGraph& g) {
  SupportFlow f;
  f.counts.assign(g.arcs.size(), 0);
  return f;
}

// One node sequence per support vehicle, each from node 0 to node n.
struct SupportPaths {
  std::vector<std::vector<int>> paths;
};

// mode[j] = 0 marks an unvisited copy; visited copies carry mode >= 1 and a
// service duration.
struct ServicePlan {
  std::vector<int> mode;
  std::vector<double> duration;
};

inline ServicePlan empty_services(const ExpandedGraph& g) {
  ServicePlan s;
  s.mode.assign(g.num_nodes(), 0);
  s.duration.assign(g.num_nodes(), 0.0);
  return s;
}

struct Solution {
  PrimaryPlan plan;
  SupportFlow flow;
  ServicePlan services;
  VariantPolicy policy;
};

struct Schedule {
  std::vector<double> start;
  double makespan = 0.0;
};

struct CheckEntry {
  std::string family;
  bool pass = true;
  std::string detail;
};

struct FeasibilityReport {
  std::vector<CheckEntry> entries;
  std::vector<std::string> warnings;

  bool feasible() const {
    for (const CheckEntry& e : entries)
      if (!e.pass) return false;
    return true;
  }

  const CheckEntry* find(const std::string& family) const {
    for (const CheckEntry& e : entries)
      if (e.family == family) return &e;
    return nullptr;
  }
};

struct ScheduleOutcome {
  bool feasible = false;
  Schedule schedule;
  std::vector<int> cycle;
};

inline constexpr double kScheduleTol = 1e-6;

inline std::vector<char> visited_nodes(const ExpandedGraph& g, const PrimaryPlan& plan) {
  std::vector<char> visited(g.num_nodes(), 0);
  for (const auto& route : plan.routes)
    for (int j : route)
      if (j >= 1 && j <= g.num_copies()) visited[j] = 1;
  return visited;
}

inline int flow_into(const ExpandedGraph& g, const SupportFlow& f, int node) {
  int total = 0;
  for (std::size_t a = 0; a < g.arcs.size(); ++a)
    if (g.arcs[a].to == node) total += f.counts[a];
  return total;
}

inline int flow_out_of(const ExpandedGraph& g, const SupportFlow& f, int node) {
  int total = 0;
  for (std::size_t a = 0; a < g.arcs.size(); ++a)
    if (g.arcs[a].from == node) total += f.counts[a];
  return total;
}

namespace detail {

inline void check_solution_shape(const ExpandedGraph& g, const Solution& sol) {
  if (sol.plan.routes.size() != static_cast<std::size_t>(g.num_primary))
    throw std::invalid_argument("solution: route count does not match fleet");
  if (sol.flow.counts.size() != g.arcs.size())
    throw std::invalid_argument("solution: flow counts do not match arcs");
  if (sol.services.mode.size() != static_cast<std::size_t>(g.num_nodes()) ||
      sol.services.duration.size() != static_cast<std::size_t>(g.num_nodes()))
    throw std::invalid_argument("solution: service plan does not match nodes");
}

// Arcs that impose a time precedence: consecutive route legs (with depot
// endpoints) plus every arc carrying support flow.
inline std::vector<char> active_arcs(const ExpandedGraph& g, const Solution& sol) {
  std::vector<char> active(g.arcs.size(), 0);
  auto mark = [&](int i, int j) {
    int a = g.arc_index(i, j);
    if (a < 0) throw std::invalid_argument("solution: route uses a missing arc");
    active[a] = 1;
  };
  for (const auto& route : sol.plan.routes) {
    if (route.empty()) continue;
    mark(0, route.front());
    for (std::size_t r = 0; r + 1 < route.size(); ++r) mark(route[r], route[r + 1]);
    mark(route.back(), g.end_depot());
  }
  for (std::size_t a = 0; a < g.arcs.size(); ++a)
    if (sol.flow.counts[a] > 0) active[a] = 1;
  return active;
}

// Service time bundled with node i in the time propagation: the summed
// durations of its related copies (the copy itself when splitting).
inline double aggregate_service(const ExpandedGraph& g, const Solution& sol, int i) {
  if (!g.is_copy(i)) return 0.0;
  double total = 0.0;
  for (int h : g.related(i)) total += sol.services.duration[h];
  return total;
}

// Topological order of nodes over the given active arcs; nodes blocked by a
// cycle are returned separately as one directed cycle.
struct TopoResult {
  std::vector<int> order;
  std::vector<int> cycle;
};

inline TopoResult topo_sort(const ExpandedGraph& g, const std::vector<char>& active) {
  int nodes = g.num_nodes();
  std::vector<int> indeg(nodes, 0);
  for (std::size_t a = 0; a < active.size(); ++a)
    if (active[a]) ++indeg[g.arcs[a].to];

  TopoResult res;
  std::vector<char> done(nodes, 0);
  for (;;) {
    int next = -1;
    for (int v = 0; v < nodes; ++v)
      if (!done[v] && indeg[v] == 0) {
        next = v;
        break;
      }
    if (next < 0) break;
    done[next] = 1;
    res.order.push_back(next);
    for (std::size_t a = 0; a < active.size(); ++a)
      if (active[a] && g.arcs[a].from == next) --indeg[g.arcs[a].to];
  }
  if (res.order.size() == static_cast<std::size_t>(nodes)) return res;

  // Walk successors among blocked nodes until one repeats.
  std::vector<int> seen_at(nodes, -1);
  std::vector<int> walk;
  int v = 0;
  while (done[v]) ++v;
  for (;;) {
    if (seen_at[v] >= 0) {
      res.cycle.assign(walk.begin() + seen_at[v], walk.end());
      return res;
    }
    seen_at[v] = static_cast<int>(walk.size());
    walk.push_back(v);
    for (std::size_t a = 0; a < active.size(); ++a)
      if (active[a] && g.arcs[a].from == v && !done[g.arcs[a].to]) {
        v = g.arcs[a].to;
        break;
      }
  }
}

}  // namespace detail

// Longest-path start times over the active arcs; componentwise-minimal
// schedule attaining the solution's makespan.
inline ScheduleOutcome compute_schedule(const ExpandedGraph& g, const Solution& sol) {
  detail::check_solution_shape(g, sol);
  std::vector<char> active = detail::active_arcs(g, sol);

  ScheduleOutcome out;
  detail::TopoResult topo = detail::topo_sort(g, active);
  if (!topo.cycle.empty()) {
    out.cycle = topo.cycle;
    return out;
  }

  std::vector<double> t(g.num_nodes(), 0.0);
  for (int i : topo.order) {
    double leave = t[i] + detail::aggregate_service(g, sol, i);
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (!active[a] || g.arcs[a].from != i) continue;
      t[g.arcs[a].to] = std::max(t[g.arcs[a].to], leave + g.arcs[a].tau);
    }
  }

  out.feasible = true;
  out.schedule.start = std::move(t);
  out.schedule.makespan = out.schedule.start[g.end_depot()];
  return out;
}

inline FeasibilityReport check_feasibility(const Instance& inst, const ExpandedGraph& g,
                                           const Solution& sol) {
  detail::check_solution_shape(g, sol);
  FeasibilityReport report;
  char buf[160];
  auto fail = [&](CheckEntry& e, const char* detail) {
    if (!e.pass) return;
    e.pass = false;
    e.detail = detail;
  };

  // route-degree: entries are own copies, visited at most once overall
  CheckEntry route_deg{"route-degree", true, ""};
  std::vector<char> seen(g.num_nodes(), 0);
  for (std::size_t k = 1; k <= sol.plan.routes.size(); ++k) {
    for (int j : sol.plan.routes[k - 1]) {
      if (!g.is_copy(j) || g.owner(j) != static_cast<int>(k)) {
        std::snprintf(buf, sizeof buf, "vehicle %zu lists node %d outside its copy set", k, j);
        fail(route_deg, buf);
        continue;
      }
      if (seen[j]) {
        std::snprintf(buf, sizeof buf, "copy %d visited twice", j);
        fail(route_deg, buf);
      }
      seen[j] = 1;
    }
  }
  report.entries.push_back(route_deg);

  std::vector<char> visited = visited_nodes(g, sol.plan);

  // visit-count: per original, exactly one copy without splitting, at least
  // one with it
  CheckEntry visit_count{"visit-count", true, ""};
  for (int v = 1; v <= g.num_originals; ++v) {
    int count = 0;
    for (int k = 1; k <= g.num_primary; ++k) count += visited[g.copy_of(k, v)];
    bool ok = sol.policy.split_allowed ? count >= 1 : count == 1;
    if (!ok) {
      std::snprintf(buf, sizeof buf, "customer %d visited by %d copies", v, count);
      fail(visit_count, buf);
    }
  }
  report.entries.push_back(visit_count);

  // single-mode: visited copies carry one valid mode, unvisited none
  CheckEntry single_mode{"single-mode", true, ""};
  for (int j = 1; j <= g.num_copies(); ++j) {
    int b = inst.customer(g.original_of(j)).max_modes;
    int m = sol.services.mode[j];
    if (visited[j] && (m < 1 || m > b)) {
      std::snprintf(buf, sizeof buf, "copy %d has mode %d outside 1..%d", j, m, b);
      fail(single_mode, buf);
    }
    if (!visited[j] && m != 0) {
      std::snprintf(buf, sizeof buf, "unvisited copy %d has mode %d", j, m);
      fail(single_mode, buf);
    }
  }
  report.entries.push_back(single_mode);

  // demand: per original, sum of p * s over visited copies equals d
  CheckEntry demand{"demand", true, ""};
  for (int v = 1; v <= g.num_originals; ++v) {
    const CustomerSpec& spec = inst.customer(v);
    double served = 0.0;
    bool modes_ok = true;
    for (int k = 1; k <= g.num_primary; ++k) {
      int j = g.copy_of(k, v);
      if (!visited[j]) continue;
      int m = sol.services.mode[j];
      if (m < 1 || m > spec.max_modes) {
        modes_ok = false;
        break;
      }
      served += spec.productivity_at(m) * sol.services.duration[j];
    }
    if (!modes_ok) continue;  // reported by single-mode
    if (std::abs(served - spec.demand) > kScheduleTol) {
      std::snprintf(buf, sizeof buf, "customer %d served %.9g of demand %.9g", v, served,
                    spec.demand);
      fail(demand, buf);
    }
  }
  report.entries.push_back(demand);

  // mode-inflow: support inflow sets the mode at visited copies and must
  // avoid unvisited ones
  CheckEntry mode_inflow{"mode-inflow", true, ""};
  for (int j = 1; j <= g.num_copies(); ++j) {
    int inflow = flow_into(g, sol.flow, j);
    if (visited[j] && inflow != sol.services.mode[j]) {
      std::snprintf(buf, sizeof buf, "copy %d has mode %d but support inflow %d", j,
                    sol.services.mode[j], inflow);
      fail(mode_inflow, buf);
    }
    if (!visited[j] && inflow != 0) {
      std::snprintf(buf, sizeof buf, "unvisited copy %d has support inflow %d", j, inflow);
      fail(mode_inflow, buf);
    }
  }
  report.entries.push_back(mode_inflow);

  // service-bound: durations within [0, d/p], zero at unvisited copies
  CheckEntry service_bound{"service-bound", true, ""};
  for (int j = 1; j <= g.num_copies(); ++j) {
    double s = sol.services.duration[j];
    if (!visited[j]) {
      if (s != 0.0) {
        std::snprintf(buf, sizeof buf, "unvisited copy %d has duration %.9g", j, s);
        fail(service_bound, buf);
      }
      continue;
    }
    if (s < -kScheduleTol) {
      std::snprintf(buf, sizeof buf, "copy %d has negative duration %.9g", j, s);
      fail(service_bound, buf);
      continue;
    }
    const CustomerSpec& spec = inst.customer(g.original_of(j));
    int m = sol.services.mode[j];
    if (m < 1 || m > spec.max_modes) continue;  // reported by single-mode
    double cap = mode_service_time(spec, m);
    if (s > cap + kScheduleTol) {
      std::snprintf(buf, sizeof buf, "copy %d duration %.9g exceeds bound %.9g", j, s, cap);
      fail(service_bound, buf);
    }
    if (sol.policy.split_allowed && s <= 1e-9) {
      std::snprintf(buf, sizeof buf, "zero-duration split visit at copy %d", j);
      report.warnings.push_back(buf);
    }
  }
  report.entries.push_back(service_bound);

  // flow-conservation: nonnegative counts, balance at copies, |O| out of the
  // depot and into n
  CheckEntry conservation{"flow-conservation", true, ""};
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    if (sol.flow.counts[a] < 0) {
      std::snprintf(buf, sizeof buf, "negative flow on arc (%d,%d)", g.arcs[a].from,
                    g.arcs[a].to);
      fail(conservation, buf);
    }
  }
  for (int j = 1; j <= g.num_copies(); ++j) {
    int in = flow_into(g, sol.flow, j);
    int out = flow_out_of(g, sol.flow, j);
    if (in != out) {
      std::snprintf(buf, sizeof buf, "copy %d has inflow %d, outflow %d", j, in, out);
      fail(conservation, buf);
    }
  }
  if (flow_out_of(g, sol.flow, 0) != g.num_support) {
    std::snprintf(buf, sizeof buf, "depot outflow %d, fleet %d",
                  flow_out_of(g, sol.flow, 0), g.num_support);
    fail(conservation, buf);
  }
  if (flow_into(g, sol.flow, g.end_depot()) != g.num_support) {
    std::snprintf(buf, sizeof buf, "end-depot inflow %d, fleet %d",
                  flow_into(g, sol.flow, g.end_depot()), g.num_support);
    fail(conservation, buf);
  }
  report.entries.push_back(conservation);

  // capacity: w <= gamma per arc (zero gamma encodes disabled switching)
  CheckEntry capacity{"capacity", true, ""};
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    if (sol.flow.counts[a] > g.arcs[a].gamma) {
      std::snprintf(buf, sizeof buf, "arc (%d,%d) carries %d over capacity %d",
                    g.arcs[a].from, g.arcs[a].to, sol.flow.counts[a], g.arcs[a].gamma);
      fail(capacity, buf);
    }
  }
  report.entries.push_back(capacity);

  // schedule: the active precedence relation must be acyclic
  CheckEntry schedule_entry{"schedule", true, ""};
  bool structure_ok = true;
  for (const CheckEntry& e : report.entries)
    if (!e.pass) structure_ok = false;
  if (!structure_ok) {
    schedule_entry.pass = false;
    schedule_entry.detail = "not evaluated, structural checks failed";
  } else {
    ScheduleOutcome sched = compute_schedule(g, sol);
    if (!sched.feasible) {
      std::string nodes;
      for (int v : sched.cycle) nodes += std::to_string(v) + " ";
      schedule_entry.pass = false;
      schedule_entry.detail = "active arcs contain the cycle: " + nodes;
    }
  }
  report.entries.push_back(schedule_entry);

  return report;
}

// Peels |O| simple 0->n paths off an integral acyclic flow, lowest arc index
// first. The arc-usage multiset of the result equals the input counts.
inline SupportPaths decompose_flow(const ExpandedGraph& g, const SupportFlow& flow) {
  if (flow.counts.size() != g.arcs.size())
    throw std::invalid_argument("flow counts do not match arcs");
  for (int j = 1; j <= g.num_copies(); ++j)
    if (flow_into(g, flow, j) != flow_out_of(g, flow, j))
      throw std::invalid_argument("flow is not conserved");

  std::vector<char> used(g.arcs.size(), 0);
  for (std::size_t a = 0; a < g.arcs.size(); ++a) used[a] = flow.counts[a] > 0;
  detail::TopoResult topo = detail::topo_sort(g, used);
  if (!topo.cycle.empty()) throw std::runtime_error("flow contains a cycle");

  std::vector<int> left = flow.counts;
  SupportPaths out;
  int vehicles = flow_out_of(g, flow, 0);
  for (int o = 0; o < vehicles; ++o) {
    std::vector<int> path{0};
    int at = 0;
    while (at != g.end_depot()) {
      int pick = -1;
      for (std::size_t a = 0; a < g.arcs.size(); ++a)
        if (left[a] > 0 && g.arcs[a].from == at) {
          pick = static_cast<int>(a);
          break;
        }
      if (pick < 0) throw std::runtime_error("flow decomposition stalled");
      --left[pick];
      at = g.arcs[pick].to;
      path.push_back(at);
    }
    out.paths.push_back(std::move(path));
  }
  for (int c : left)
    if (c != 0) throw std::runtime_error("flow decomposition left residual arcs");
  return out;
}

inline SupportFlow compose_flow(const ExpandedGraph& g, const SupportPaths& paths) {
  SupportFlow flow = zero_flow(g);
  for (const auto& path : paths.paths) {
    for (std::size_t r = 0; r + 1 < path.size(); ++r) {
      int a = g.arc_index(path[r], path[r + 1]);
      if (a < 0) throw std::invalid_argument("path uses an arc outside the graph");
      ++flow.counts[a];
    }
  }
  return flow;
}

struct SplitTimes {
  ServicePlan services;
  Schedule schedule;
  double objective = 0.0;
};

// LP over durations and start times for a fixed discrete structure under the
// split policy: minimize the makespan subject to precedence and demand rows.
inline std::optional<SplitTimes> optimize_split_times(const Instance& inst,
                                                      const ExpandedGraph& g,
                                                      const Solution& sol) {
  if (!sol.policy.split_allowed)
    throw std::invalid_argument("optimize_split_times requires the split policy");
  detail::check_solution_shape(g, sol);

  std::vector<char> visited = visited_nodes(g, sol.plan);
  std::vector<char> active = detail::active_arcs(g, sol);

  LpProblem lp;
  // t per node, then s per visited copy
  std::vector<int> svar(g.num_nodes(), -1);
  for (int v = 0; v < g.num_nodes(); ++v) {
    double cost = v == g.end_depot() ? 1.0 : 0.0;
    double hi = v == 0 ? 0.0 : kLpInfinity;
    lp.add_var(cost, 0.0, hi);
  }
  for (int j = 1; j <= g.num_copies(); ++j) {
    if (!visited[j]) continue;
    const CustomerSpec& spec = inst.customer(g.original_of(j));
    int m = sol.services.mode[j];
    if (m < 1 || m > spec.max_modes) return std::nullopt;
    svar[j] = lp.add_var(0.0, 0.0, mode_service_time(spec, m));
  }

  // t_j - t_i - s_i >= tau_ij per active arc (related set is {i} here)
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    if (!active[a]) continue;
    const Arc& arc = g.arcs[a];
    std::vector<double> row(lp.num_vars(), 0.0);
    row[arc.to] = 1.0;
    row[arc.from] -= 1.0;
    if (g.is_copy(arc.from) && svar[arc.from] >= 0) row[svar[arc.from]] = -1.0;
    lp.add_row(std::move(row), Rel::GreaterEqual, arc.tau);
  }

  // demand equality per original with visited copies
  for (int v = 1; v <= g.num_originals; ++v) {
    const CustomerSpec& spec = inst.customer(v);
    std::vector<double> row(lp.num_vars(), 0.0);
    bool any = false;
    for (int k = 1; k <= g.num_primary; ++k) {
      int j = g.copy_of(k, v);
      if (svar[j] < 0) continue;
      row[svar[j]] = spec.productivity_at(sol.services.mode[j]);
      any = true;
    }
    if (any) lp.add_row(std::move(row), Rel::Equal, spec.demand);
  }

  LpOutcome lpout = solve_lp(lp);
  if (lpout.status != LpStatus::Optimal) return std::nullopt;

  SplitTimes result;
  result.services = sol.services;
  for (int j = 1; j <= g.num_copies(); ++j)
    if (svar[j] >= 0) result.services.duration[j] = std::max(0.0, lpout.values[svar[j]]);
  result.objective = lpout.objective;

  Solution timed = sol;
  timed.services = result.services;
  ScheduleOutcome sched = compute_schedule(g, timed);
  if (!sched.feasible) return std::nullopt;
  result.schedule = sched.schedule;
  return result;
}

// ---- solution files ----

inline std::string write_solution(const ExpandedGraph& g, const Solution& sol,
                                  const Schedule* schedule = nullptr) {
  nlohmann::ordered_json j;
  j["policy"] = sol.policy.name();
  j["routes"] = sol.plan.routes;
  nlohmann::ordered_json flow = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < g.arcs.size(); ++a)
    if (sol.flow.counts[a] > 0)
      flow.push_back({g.arcs[a].from, g.arcs[a].to, sol.flow.counts[a]});
  j["flow"] = std::move(flow);
  nlohmann::ordered_json modes = nlohmann::ordered_json::object();
  nlohmann::ordered_json durations = nlohmann::ordered_json::object();
  for (int node = 1; node <= g.num_copies(); ++node) {
    if (sol.services.mode[node] == 0) continue;
    std::string key = std::to_string(node);
    modes[key] = sol.services.mode[node];
    durations[key] = sol.services.duration[node];
  }
  j["modes"] = std::move(modes);
  j["durations"] = std::move(durations);
  if (schedule) {
    nlohmann::ordered_json start = nlohmann::ordered_json::object();
    for (int node = 0; node < g.num_nodes(); ++node)
      start[std::to_string(node)] = schedule->start[node];
    j["schedule"] = {{"start", std::move(start)}, {"makespan", schedule->makespan}};
  }
  return j.dump(2) + "\n";
}

struct LoadedSolution {
  Solution solution;
  std::optional<Schedule> schedule;
};

inline LoadedSolution read_solution(const ExpandedGraph& g, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("solution: ") + e.what());
  }
  try {
    LoadedSolution out;
    out.solution.policy = VariantPolicy::parse(j.at("policy").get<std::string>());
    out.solution.plan.routes = j.at("routes").get<std::vector<std::vector<int>>>();
    out.solution.flow = zero_flow(g);
    for (const auto& triple : j.at("flow")) {
      int from = triple.at(0).get<int>();
      int to = triple.at(1).get<int>();
      int count = triple.at(2).get<int>();
      int a = g.arc_index(from, to);
      if (a < 0) throw ParseError("solution: flow arc not in the graph");
      out.solution.flow.counts[a] = count;
    }
    out.solution.services = empty_services(g);
    for (const auto& [key, value] : j.at("modes").items())
      out.solution.services.mode.at(std::stoul(key)) = value.get<int>();
    for (const auto& [key, value] : j.at("durations").items())
      out.solution.services.duration.at(std::stoul(key)) = value.get<double>();
    if (j.contains("schedule")) {
      Schedule s;
      s.start.assign(g.num_nodes(), 0.0);
      for (const auto& [key, value] : j["schedule"].at("start").items())
        s.start.at(std::stoul(key)) = value.get<double>();
      s.makespan = j["schedule"].at("makespan").get<double>();
      out.schedule = s;
    }
    return out;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("solution: ") + e.what());
  }
}

}  // namespace svrp

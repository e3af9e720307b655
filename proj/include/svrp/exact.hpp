#pragma once

// Native exact optimization. The search branches over customer-to-vehicle
// assignments, route orders, and support-vehicle paths; modes fall out of the
// support inflows and durations come from the timing LP when services split.
// Solutions are carried in the per-arc integer flow encoding throughout.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "svrp/graph.hpp"
#include "svrp/instance.hpp"
#include "svrp/schedule.hpp"

namespace svrp {

struct SearchLimits {
  std::uint64_t max_nodes = std::numeric_limits<std::uint64_t>::max();
  double max_time_s = std::numeric_limits<double>::infinity();
  std::optional<Solution> seed;
};

enum class SolveStatus { Optimal, FeasibleLimit, Infeasible };

struct SolveStats {
  std::uint64_t nodes = 0;
  std::uint64_t pruned = 0;
  double time_s = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  Solution solution;
  Schedule schedule;
  double makespan = std::numeric_limits<double>::infinity();
  double lower_bound = 0.0;
  SolveStats stats;
};

struct BuiltSolution {
  Solution solution;
  Schedule schedule;
};

// Partial search state, exposed so bounds can be audited externally.
// assign[v-1] is the vehicle bitmask of original v (bit k-1 for vehicle k)
// for the first assign.size() originals; routes carry the committed copy
// sequences of vehicles 1..routes.size() (complete for those vehicles);
// support_paths are the node paths already fixed for the first support
// vehicles.
struct SearchState {
  std::vector<unsigned> assign;
  std::vector<std::vector<int>> routes;
  std::vector<std::vector<int>> support_paths;
};

namespace detail {

inline double min_service_time(const CustomerSpec& c) {
  double best = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= c.max_modes; ++m) best = std::min(best, mode_service_time(c, m));
  return best;
}

// Cheapest support attendance m * s over modes; with proportional rates this
// is d * b for every mode.
inline double min_support_workload(const CustomerSpec& c) {
  double best = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= c.max_modes; ++m)
    best = std::min(best, m * mode_service_time(c, m));
  return best;
}

inline double route_travel(const Instance& inst, const ExpandedGraph& g,
                           const std::vector<int>& route) {
  if (route.empty()) return 0.0;
  double total = travel_time(inst.depot, inst.customer(g.original_of(route[0])).location);
  for (std::size_t r = 0; r + 1 < route.size(); ++r)
    total += travel_time(inst.customer(g.original_of(route[r])).location,
                         inst.customer(g.original_of(route[r + 1])).location);
  return total;
}

inline double path_travel(const ExpandedGraph& g, const std::vector<int>& path) {
  double total = 0.0;
  for (std::size_t r = 0; r + 1 < path.size(); ++r) {
    int a = g.arc_index(path[r], path[r + 1]);
    if (a < 0) throw std::invalid_argument("support path uses a missing arc");
    total += g.arcs[a].tau;
  }
  return total;
}

}  // namespace detail

// Admissible lower bound on the makespan of any completion of `state`:
// the worst single-customer relaxation, the committed work per primary
// vehicle, and the aggregate support workload spread over the fleet.
inline double partial_lower_bound(const Instance& inst, const ExpandedGraph& g,
                                  const SearchState& state) {
  bool split = g.policy.split_allowed;
  double bound = 0.0;

  // every customer needs a depot leg plus its fastest service; split work
  // can be shared by at most |K| copies
  for (const CustomerSpec& c : inst.customers) {
    double direct = travel_time(inst.depot, c.location);
    double fastest = detail::min_service_time(c);
    if (split) fastest /= g.num_primary;
    bound = std::max(bound, direct + fastest);
  }

  // committed travel and solely-assigned service per primary vehicle
  for (int k = 1; k <= g.num_primary; ++k) {
    double service = 0.0;
    for (std::size_t v = 0; v < state.assign.size(); ++v)
      if (state.assign[v] == (1u << (k - 1)))
        service += detail::min_service_time(inst.customer(static_cast<int>(v) + 1));
    double travel = 0.0;
    if (k <= static_cast<int>(state.routes.size())) {
      travel = detail::route_travel(inst, g, state.routes[k - 1]);
    } else {
      for (std::size_t v = 0; v < state.assign.size(); ++v)
        if (state.assign[v] & (1u << (k - 1)))
          travel = std::max(
              travel, travel_time(inst.depot, inst.customer(static_cast<int>(v) + 1).location));
    }
    bound = std::max(bound, travel + service);
  }

  // all support travel committed so far plus unavoidable attendance, spread
  // over the support fleet
  double support_total = 0.0;
  for (const auto& path : state.support_paths) support_total += detail::path_travel(g, path);
  for (const CustomerSpec& c : inst.customers) support_total += detail::min_support_workload(c);
  bound = std::max(bound, support_total / g.num_support);

  return bound;
}

// Nearest-neighbor routes over at most min(|K|, |O|) vehicles, support fleet
// divided into equal per-route escorts, no switching or splitting. Feasible
// under every policy, so its makespan serves as a Big-M upper bound.
inline BuiltSolution construction_heuristic(const Instance& inst, VariantPolicy policy) {
  if (inst.fleet.support_count < 1)
    throw std::invalid_argument("construction heuristic needs a support vehicle");
  ExpandedGraph g = build_graph(inst, policy, 0.0);

  int usable = std::min(inst.fleet.primary_count, inst.fleet.support_count);
  std::vector<std::vector<int>> routes(inst.fleet.primary_count);
  std::vector<char> taken(inst.num_customers() + 1, 0);
  std::vector<Point> at(usable, inst.depot);
  int remaining = inst.num_customers();
  while (remaining > 0) {
    for (int k = 1; k <= usable && remaining > 0; ++k) {
      int pick = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int v = 1; v <= inst.num_customers(); ++v) {
        if (taken[v]) continue;
        double d = travel_time(at[k - 1], inst.customer(v).location);
        if (d < best) {
          best = d;
          pick = v;
        }
      }
      taken[pick] = 1;
      at[k - 1] = inst.customer(pick).location;
      routes[k - 1].push_back(g.copy_of(k, pick));
      --remaining;
    }
  }

  int active = 0;
  for (const auto& r : routes)
    if (!r.empty()) ++active;

  Solution sol;
  sol.policy = policy;
  sol.plan.routes = routes;
  sol.flow = zero_flow(g);
  sol.services = empty_services(g);

  // share out the support fleet; member i of a route's escort group visits
  // exactly the copies whose mode reaches i
  int given = 0;
  for (int k = 1; k <= inst.fleet.primary_count; ++k) {
    if (routes[k - 1].empty()) continue;
    int share = g.num_support / active + (given < g.num_support % active ? 1 : 0);
    ++given;
    for (int j : routes[k - 1]) {
      const CustomerSpec& spec = inst.customer(g.original_of(j));
      int mode = std::min(share, spec.max_modes);
      sol.services.mode[j] = mode;
      sol.services.duration[j] = mode_service_time(spec, mode);
    }
    for (int member = 1; member <= share; ++member) {
      int prev = 0;
      for (int j : routes[k - 1]) {
        if (sol.services.mode[j] < member) continue;
        ++sol.flow.counts[g.arc_index(prev, j)];
        prev = j;
      }
      ++sol.flow.counts[g.arc_index(prev, g.end_depot())];
    }
  }
  // leftover support vehicles idle
  int out = flow_out_of(g, sol.flow, 0);
  if (out < g.num_support)
    sol.flow.counts[g.arc_index(0, g.end_depot())] += g.num_support - out;

  ScheduleOutcome sched = compute_schedule(g, sol);
  if (!sched.feasible) throw std::logic_error("construction heuristic built a cyclic plan");
  return {std::move(sol), std::move(sched.schedule)};
}

namespace detail {

// Valid continuations for support vehicles: node-simple paths over visited
// copies whose same-vehicle stops follow the route order (anything else
// closes a directed cycle with the route arcs).
inline std::vector<std::vector<int>> enumerate_support_paths(
    const ExpandedGraph& g, const std::vector<std::vector<int>>& routes) {
  std::vector<int> position(g.num_nodes(), -1);
  std::vector<int> visited;
  for (const auto& route : routes)
    for (std::size_t r = 0; r < route.size(); ++r) {
      position[route[r]] = static_cast<int>(r);
      visited.push_back(route[r]);
    }
  std::sort(visited.begin(), visited.end());

  std::vector<std::vector<int>> paths;
  std::vector<int> current{0};
  std::vector<char> in_path(g.num_nodes(), 0);
  // last route position used per primary vehicle, -1 when untouched
  std::vector<int> last_pos(g.num_primary + 1, -1);

  auto extend = [&](auto&& self) -> void {
    paths.push_back(current);
    paths.back().push_back(g.end_depot());
    for (int j : visited) {
      if (in_path[j]) continue;
      int a = g.arc_index(current.back(), j);
      if (a < 0 || g.arcs[a].gamma <= 0) continue;
      int owner = g.owner(j);
      if (position[j] <= last_pos[owner]) continue;
      int saved = last_pos[owner];
      last_pos[owner] = position[j];
      in_path[j] = 1;
      current.push_back(j);
      self(self);
      current.pop_back();
      in_path[j] = 0;
      last_pos[owner] = saved;
    }
  };
  extend(extend);
  return paths;
}

struct LeafEval {
  bool feasible = false;
  double makespan = 0.0;
  ServicePlan services;
  Schedule schedule;
};

// Evaluates a complete discrete structure: modes from inflows, durations
// direct (no split) or via the timing LP (split).
inline LeafEval evaluate_leaf(const Instance& inst, const ExpandedGraph& g,
                              const PrimaryPlan& plan, const SupportFlow& flow,
                              VariantPolicy policy) {
  LeafEval out;
  Solution sol;
  sol.policy = policy;
  sol.plan = plan;
  sol.flow = flow;
  sol.services = empty_services(g);

  std::vector<char> visited = visited_nodes(g, plan);
  for (int j = 1; j <= g.num_copies(); ++j) {
    int inflow = flow_into(g, flow, j);
    if (!visited[j]) {
      if (inflow != 0) return out;
      continue;
    }
    const CustomerSpec& spec = inst.customer(g.original_of(j));
    if (inflow < 1 || inflow > spec.max_modes) return out;
    sol.services.mode[j] = inflow;
  }

  if (policy.split_allowed) {
    auto timed = optimize_split_times(inst, g, sol);
    if (!timed) return out;
    out.feasible = true;
    out.makespan = timed->objective;
    out.services = std::move(timed->services);
    out.schedule = std::move(timed->schedule);
    return out;
  }

  for (int j = 1; j <= g.num_copies(); ++j)
    if (sol.services.mode[j] > 0)
      sol.services.duration[j] =
          mode_service_time(inst.customer(g.original_of(j)), sol.services.mode[j]);
  ScheduleOutcome sched = compute_schedule(g, sol);
  if (!sched.feasible) return out;
  out.feasible = true;
  out.makespan = sched.schedule.makespan;
  out.services = std::move(sol.services);
  out.schedule = std::move(sched.schedule);
  return out;
}

class Searcher {
 public:
  Searcher(const Instance& inst, VariantPolicy policy, const SearchLimits& limits, bool prune)
      : inst_(inst),
        policy_(policy),
        limits_(limits),
        prune_(prune),
        g_(build_graph(inst, policy, 0.0)),
        start_(std::chrono::steady_clock::now()) {}

  SolveResult run() {
    BuiltSolution warm = construction_heuristic(inst_, policy_);
    if (limits_.seed) {
      FeasibilityReport rep = check_feasibility(inst_, g_, *limits_.seed);
      if (!rep.feasible()) throw std::invalid_argument("seed solution is infeasible");
      ScheduleOutcome sched = compute_schedule(g_, *limits_.seed);
      best_ = {*limits_.seed, sched.schedule};
      best_makespan_ = sched.schedule.makespan;
    } else {
      best_makespan_ = warm.schedule.makespan;
      best_ = warm;
    }

    state_ = SearchState{};
    branch_assign();

    SolveResult res;
    res.status = aborted_ ? SolveStatus::FeasibleLimit : SolveStatus::Optimal;
    res.solution = best_.solution;
    res.schedule = best_.schedule;
    res.makespan = best_makespan_;
    res.lower_bound = aborted_ ? std::min(open_lb_, best_makespan_) : best_makespan_;
    res.stats.nodes = nodes_;
    res.stats.pruned = pruned_;
    res.stats.time_s = elapsed();
    return res;
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  // Returns false when the subtree must not be expanded. Bound pruning keeps
  // the search exact; node or time exhaustion flips the abort flag and
  // remembers the subtree bound so the final lower bound stays valid.
  bool enter(double bound) {
    if (aborted_) {
      open_lb_ = std::min(open_lb_, bound);
      return false;
    }
    if (nodes_ >= limits_.max_nodes || elapsed() >= limits_.max_time_s) {
      aborted_ = true;
      open_lb_ = std::min(open_lb_, bound);
      return false;
    }
    ++nodes_;
    if (prune_ && bound >= best_makespan_ - 1e-9) {
      ++pruned_;
      return false;
    }
    return true;
  }

  void branch_assign() {
    int v = static_cast<int>(state_.assign.size()) + 1;
    if (v > inst_.num_customers()) {
      branch_routes();
      return;
    }
    unsigned used = 0;
    for (unsigned m : state_.assign) used |= m;
    int first_free = 0;
    while (first_free < g_.num_primary && (used >> first_free) & 1u) ++first_free;

    unsigned all = (1u << g_.num_primary) - 1;
    for (unsigned mask = 1; mask <= all; ++mask) {
      if (!policy_.split_allowed && (mask & (mask - 1)) != 0) continue;
      // fresh vehicles may only join as the next unused block, vehicles
      // being interchangeable
      unsigned fresh = mask & ~used;
      if (fresh != 0) {
        unsigned block = fresh >> first_free;
        if ((fresh & ((1u << first_free) - 1)) != 0 || (block & (block + 1)) != 0) continue;
      }
      state_.assign.push_back(mask);
      if (enter(partial_lower_bound(inst_, g_, state_))) branch_assign();
      state_.assign.pop_back();
    }
  }

  void branch_routes() {
    int k = static_cast<int>(state_.routes.size()) + 1;
    if (k > g_.num_primary) {
      route_visited_ = visited_nodes(g_, PrimaryPlan{state_.routes});
      paths_ = enumerate_support_paths(g_, state_.routes);
      path_travels_.clear();
      for (const auto& p : paths_) path_travels_.push_back(path_travel(g_, p));
      // copies each suffix of the path list can still cover
      suffix_cover_.assign(paths_.size() + 1, 0);
      for (std::size_t i = paths_.size(); i > 0; --i) {
        std::uint64_t mask = 0;
        for (int node : paths_[i - 1])
          if (g_.is_copy(node)) mask |= 1ull << node;
        suffix_cover_[i - 1] = suffix_cover_[i] | mask;
      }
      inflow_.assign(g_.num_nodes(), 0);
      arc_load_.assign(g_.arcs.size(), 0);
      branch_support(0, 0);
      return;
    }
    std::vector<int> mine;
    for (std::size_t v = 0; v < state_.assign.size(); ++v)
      if (state_.assign[v] & (1u << (k - 1)))
        mine.push_back(g_.copy_of(k, static_cast<int>(v) + 1));
    std::sort(mine.begin(), mine.end());
    std::vector<int> perm = mine;
    do {
      state_.routes.push_back(perm);
      if (enter(partial_lower_bound(inst_, g_, state_))) branch_routes();
      state_.routes.pop_back();
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  void branch_support(int vehicle, std::size_t min_idx) {
    if (vehicle == g_.num_support) {
      leaf();
      return;
    }
    std::uint64_t uncovered = 0;
    for (int j = 1; j <= g_.num_copies(); ++j)
      if (route_visited_[j] && inflow_[j] == 0) uncovered |= 1ull << j;
    for (std::size_t idx = min_idx; idx < paths_.size(); ++idx) {
      if ((uncovered & ~suffix_cover_[idx]) != 0) break;  // lost coverage for good
      if (!apply_path(idx)) continue;
      state_.support_paths.push_back(paths_[idx]);
      if (enter(partial_lower_bound(inst_, g_, state_))) branch_support(vehicle + 1, idx);
      state_.support_paths.pop_back();
      undo_path(idx);
    }
  }

  bool apply_path(std::size_t idx) {
    const std::vector<int>& path = paths_[idx];
    for (std::size_t r = 0; r + 1 < path.size(); ++r) {
      int a = g_.arc_index(path[r], path[r + 1]);
      if (arc_load_[a] + 1 > g_.arcs[a].gamma) {
        while (r > 0) {
          --r;
          --arc_load_[g_.arc_index(path[r], path[r + 1])];
          if (g_.is_copy(path[r + 1])) --inflow_[path[r + 1]];
        }
        return false;
      }
      ++arc_load_[a];
      if (g_.is_copy(path[r + 1])) {
        ++inflow_[path[r + 1]];
        if (inflow_[path[r + 1]] > inst_.customer(g_.original_of(path[r + 1])).max_modes) {
          for (std::size_t q = 0; q <= r; ++q) {
            --arc_load_[g_.arc_index(path[q], path[q + 1])];
            if (g_.is_copy(path[q + 1])) --inflow_[path[q + 1]];
          }
          return false;
        }
      }
    }
    return true;
  }

  void undo_path(std::size_t idx) {
    const std::vector<int>& path = paths_[idx];
    for (std::size_t r = 0; r + 1 < path.size(); ++r) {
      --arc_load_[g_.arc_index(path[r], path[r + 1])];
      if (g_.is_copy(path[r + 1])) --inflow_[path[r + 1]];
    }
  }

  void leaf() {
    for (int j = 1; j <= g_.num_copies(); ++j)
      if (route_visited_[j] && inflow_[j] == 0) return;

    PrimaryPlan plan;
    plan.routes = state_.routes;
    SupportPaths paths;
    paths.paths = state_.support_paths;
    SupportFlow flow = compose_flow(g_, paths);
    LeafEval eval = evaluate_leaf(inst_, g_, plan, flow, policy_);
    if (!eval.feasible) return;
    if (eval.makespan < best_makespan_ - 1e-9) {
      best_makespan_ = eval.makespan;
      best_.solution.policy = policy_;
      best_.solution.plan = plan;
      best_.solution.flow = flow;
      best_.solution.services = eval.services;
      best_.schedule = eval.schedule;
    }
  }

  const Instance& inst_;
  VariantPolicy policy_;
  SearchLimits limits_;
  bool prune_;
  ExpandedGraph g_;
  std::chrono::steady_clock::time_point start_;

  SearchState state_;
  std::vector<char> route_visited_;
  std::vector<std::vector<int>> paths_;
  std::vector<double> path_travels_;
  std::vector<std::uint64_t> suffix_cover_;
  std::vector<int> inflow_;
  std::vector<int> arc_load_;

  BuiltSolution best_;
  double best_makespan_ = std::numeric_limits<double>::infinity();
  double open_lb_ = std::numeric_limits<double>::infinity();
  std::uint64_t nodes_ = 0;
  std::uint64_t pruned_ = 0;
  bool aborted_ = false;
};

}  // namespace detail

inline SolveResult solve_exact(const Instance& inst, VariantPolicy policy,
                               const SearchLimits& limits = {}, bool prune = true) {
  detail::Searcher s(inst, policy, limits, prune);
  return s.run();
}

// Exhaustive enumeration without bound pruning, used as a verification
// oracle. Refuses instances beyond a small size cap.
inline SolveResult brute_force(const Instance& inst, VariantPolicy policy) {
  if (inst.num_customers() > 4 || inst.fleet.primary_count > 2 ||
      inst.fleet.support_count > 3)
    throw std::invalid_argument(
        "brute_force caps: up to 4 customers, 2 primary, 3 support vehicles");

  ExpandedGraph g = build_graph(inst, policy, 0.0);
  if (g.arcs.size() > 128)
    throw std::logic_error("arc-set masks assume at most 128 arcs under the size caps");
  auto start = std::chrono::steady_clock::now();

  SolveResult res;
  res.status = SolveStatus::Optimal;

  int num_v = inst.num_customers();
  unsigned all_masks = (1u << inst.fleet.primary_count) - 1;

  std::vector<unsigned> assign(num_v, 0);
  std::vector<std::vector<int>> routes(inst.fleet.primary_count);

  // all node-simple paths over the visited copies that honor route order
  auto all_paths = [&]() {
    std::vector<int> visited;
    for (const auto& r : routes) visited.insert(visited.end(), r.begin(), r.end());
    std::sort(visited.begin(), visited.end());
    std::vector<std::vector<int>> result;
    std::vector<int> cur{0};
    auto ok_next = [&](int j) {
      if (std::find(cur.begin(), cur.end(), j) != cur.end()) return false;
      int a = g.arc_index(cur.back(), j);
      if (a < 0 || g.arcs[a].gamma <= 0) return false;
      // same-vehicle stops must keep route order relative to every earlier one
      const auto& route = routes[g.owner(j) - 1];
      auto pos = [&](int node) {
        return std::find(route.begin(), route.end(), node) - route.begin();
      };
      for (int prev : cur)
        if (prev != 0 && g.owner(prev) == g.owner(j) && pos(prev) >= pos(j)) return false;
      return true;
    };
    auto grow = [&](auto&& self) -> void {
      result.push_back(cur);
      result.back().push_back(g.end_depot());
      for (int j : visited) {
        if (!ok_next(j)) continue;
        cur.push_back(j);
        self(self);
        cur.pop_back();
      }
    };
    grow(grow);
    return result;
  };

  std::vector<std::vector<int>> paths;
  std::vector<std::uint64_t> suffix_cover;
  std::vector<int> inflow, arc_load;
  std::vector<char> visited_mark;

  struct FlowHash {
    std::size_t operator()(const std::vector<int>& v) const {
      std::size_t h = 1469598103934665603ull;
      for (int x : v) {
        h ^= static_cast<std::size_t>(x) + 0x9e3779b9;
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  // distinct multisets often compose to the same flow, and the makespan
  // depends on the flow alone once routes are fixed
  std::unordered_map<std::vector<int>, double, FlowHash> seen;

  // Split leaves need an LP each, so prune them by exact dominance: with
  // equal modes, growing the active-arc set only adds precedence rows and
  // can never lower the LP value. Arc sets are tracked as two-word masks.
  struct ArcSet {
    std::uint64_t lo = 0, hi = 0;
    bool subset_of(const ArcSet& o) const {
      return (lo & o.lo) == lo && (hi & o.hi) == hi;
    }
  };
  ArcSet active;
  std::unordered_map<std::uint64_t, std::vector<ArcSet>> evaluated_sets;
  auto flip_active = [&](std::size_t a) {
    if (a < 64)
      active.lo ^= 1ull << a;
    else
      active.hi ^= 1ull << (a - 64);
  };

#ifdef SVRP_BRUTE_PROBE
  static std::uint64_t probe_leaves = 0, probe_distinct = 0, probe_structs = 0;
  static std::set<std::pair<std::uint64_t, std::uint64_t>> probe_keys;
#endif
  // per-combo context for the cheap leaf bound
  std::vector<std::array<int, 3>> route_edge_arcs;  // (from, to, arc)
  std::vector<char> shared_original;                // original with 2+ visited copies

  // Longest path over route legs and loaded support arcs with split services
  // relaxed to zero: a valid lower bound on the leaf's LP value. Infinity
  // signals a precedence cycle, which dooms the leaf outright.
  auto leaf_bound = [&]() {
    int n = g.num_nodes();
    std::vector<double> t(n, 0.0), w(n, 0.0);
    for (int j = 1; j <= g.num_copies(); ++j) {
      if (!visited_mark[j] || shared_original[g.original_of(j)]) continue;
      w[j] = mode_service_time(inst.customer(g.original_of(j)), inflow[j]);
    }
    for (int pass = 0;; ++pass) {
      bool moved = false;
      auto relax = [&](int from, int to, double tau) {
        double cand = t[from] + w[from] + tau;
        if (cand > t[to] + 1e-12) {
          t[to] = cand;
          moved = true;
        }
      };
      for (const auto& e : route_edge_arcs) relax(e[0], e[1], g.arcs[e[2]].tau);
      for (std::size_t a = 0; a < arc_load.size(); ++a)
        if (arc_load[a] > 0) relax(g.arcs[a].from, g.arcs[a].to, g.arcs[a].tau);
      if (!moved) return t[g.end_depot()];
      if (pass >= n) return std::numeric_limits<double>::infinity();
    }
  };

  auto leaf = [&]() {
    for (int j = 1; j <= g.num_copies(); ++j)
      if (visited_mark[j] && inflow[j] == 0) return;
    ++res.stats.nodes;
    if (policy.split_allowed) {
      std::uint64_t modes_key = 0;
      for (int j = 1; j <= g.num_copies(); ++j)
        modes_key = (modes_key << 4) | static_cast<unsigned>(inflow[j]);
      std::vector<ArcSet>& sets = evaluated_sets[modes_key];
      for (const ArcSet& s : sets)
        if (s.subset_of(active)) return;  // can't beat the smaller arc set
      sets.push_back(active);
      if (leaf_bound() >= res.makespan - 1e-9) return;  // LP could only confirm
    } else if (seen.find(arc_load) != seen.end()) {
      return;  // first occurrence already competed
    }

    PrimaryPlan plan;
    plan.routes = routes;
    SupportFlow flow;
    flow.counts = arc_load;
    detail::LeafEval eval = detail::evaluate_leaf(inst, g, plan, flow, policy);
    if (!policy.split_allowed)
      seen.emplace(arc_load,
                   eval.feasible ? eval.makespan : std::numeric_limits<double>::infinity());
    if (!eval.feasible) return;
    if (eval.makespan < res.makespan - 1e-9) {
      res.makespan = eval.makespan;
      res.solution.policy = policy;
      res.solution.plan = plan;
      res.solution.flow = std::move(flow);
      res.solution.services = eval.services;
      res.schedule = eval.schedule;
    }
  };

  auto pick_paths = [&](auto&& self, int vehicle, std::size_t min_idx) -> void {
    if (vehicle == inst.fleet.support_count) {
      leaf();
      return;
    }
    std::uint64_t uncovered = 0;
    for (int j = 1; j <= g.num_copies(); ++j)
      if (visited_mark[j] && inflow[j] == 0) uncovered |= 1ull << j;
    for (std::size_t idx = min_idx; idx < paths.size(); ++idx) {
      if ((uncovered & ~suffix_cover[idx]) != 0) break;  // remaining paths cannot cover
      const auto& path = paths[idx];
      bool fits = true;
      for (std::size_t r = 0; fits && r + 1 < path.size(); ++r) {
        int a = g.arc_index(path[r], path[r + 1]);
        if (arc_load[a] + 1 > g.arcs[a].gamma) fits = false;
        if (g.is_copy(path[r + 1]) &&
            inflow[path[r + 1]] + 1 > inst.customer(g.original_of(path[r + 1])).max_modes)
          fits = false;
      }
      if (!fits) continue;
      for (std::size_t r = 0; r + 1 < path.size(); ++r) {
        std::size_t a = static_cast<std::size_t>(g.arc_index(path[r], path[r + 1]));
        if (++arc_load[a] == 1) flip_active(a);
        if (g.is_copy(path[r + 1])) ++inflow[path[r + 1]];
      }
      self(self, vehicle + 1, idx);
      for (std::size_t r = 0; r + 1 < path.size(); ++r) {
        std::size_t a = static_cast<std::size_t>(g.arc_index(path[r], path[r + 1]));
        if (--arc_load[a] == 0) flip_active(a);
        if (g.is_copy(path[r + 1])) --inflow[path[r + 1]];
      }
    }
  };

  auto route_stage = [&](auto&& self, int k) -> void {
    if (k > inst.fleet.primary_count) {
      paths = all_paths();
      suffix_cover.assign(paths.size() + 1, 0);
      for (std::size_t i = paths.size(); i > 0; --i) {
        std::uint64_t mask = 0;
        for (int node : paths[i - 1])
          if (g.is_copy(node)) mask |= 1ull << node;
        suffix_cover[i - 1] = suffix_cover[i] | mask;
      }
      seen.clear();
      evaluated_sets.clear();
      active = ArcSet{};
      inflow.assign(g.num_nodes(), 0);
      arc_load.assign(g.arcs.size(), 0);
      visited_mark = visited_nodes(g, PrimaryPlan{routes});
      route_edge_arcs.clear();
      for (const auto& route : routes) {
        int prev = 0;
        for (int j : route) {
          route_edge_arcs.push_back({prev, j, g.arc_index(prev, j)});
          prev = j;
        }
        if (!route.empty())
          route_edge_arcs.push_back({prev, g.end_depot(), g.arc_index(prev, g.end_depot())});
      }
      shared_original.assign(num_v + 1, 0);
      for (int v = 1; v <= num_v; ++v) {
        int copies = 0;
        for (int k = 1; k <= inst.fleet.primary_count; ++k)
          if (assign[v - 1] & (1u << (k - 1))) ++copies;
        shared_original[v] = copies >= 2;
      }
      pick_paths(pick_paths, 0, 0);
      return;
    }
    std::vector<int> mine;
    for (int v = 1; v <= num_v; ++v)
      if (assign[v - 1] & (1u << (k - 1))) mine.push_back(g.copy_of(k, v));
    std::sort(mine.begin(), mine.end());
    std::vector<int> perm = mine;
    do {
      routes[k - 1] = perm;
      self(self, k + 1);
    } while (std::next_permutation(perm.begin(), perm.end()));
    routes[k - 1].clear();
  };

  auto assign_stage = [&](auto&& self, int v) -> void {
    if (v > num_v) {
      route_stage(route_stage, 1);
      return;
    }
    for (unsigned mask = 1; mask <= all_masks; ++mask) {
      if (!policy.split_allowed && (mask & (mask - 1)) != 0) continue;
      assign[v - 1] = mask;
      self(self, v + 1);
    }
    assign[v - 1] = 0;
  };

  assign_stage(assign_stage, 1);

  if (res.makespan == std::numeric_limits<double>::infinity()) {
    res.status = SolveStatus::Infeasible;
    res.lower_bound = 0.0;
  } else {
    res.lower_bound = res.makespan;
  }
  res.stats.time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace svrp

#pragma once

// Expanded directed graph: every original customer is duplicated once per
// primary vehicle, plus start depot 0 and end depot n. Arc capacities encode
// the switching policy; the related-node sets encode the splitting policy.

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "svrp/instance.hpp"

namespace svrp {

enum class FlowModel { Binary, Integer };

/// Policy triple Flow|Switch|Split, e.g. "I|S|N" = integer flow, switching
/// allowed, splitting not allowed.
struct VariantPolicy {
  FlowModel flow = FlowModel::Integer;
  bool switch_allowed = true;
  bool split_allowed = false;

  std::string name() const {
    std::string s;
    s += (flow == FlowModel::Binary) ? 'B' : 'I';
    s += '|';
    s += switch_allowed ? 'S' : 'N';
    s += '|';
    s += split_allowed ? 'S' : 'N';
    return s;
  }

  static VariantPolicy parse(std::string_view text) {
    std::string compact;
    for (char ch : text) {
      if (ch != '|' && ch != ' ') compact += static_cast<char>(std::toupper(ch));
    }
    if (compact.size() != 3 || (compact[0] != 'B' && compact[0] != 'I') ||
        (compact[1] != 'S' && compact[1] != 'N') ||
        (compact[2] != 'S' && compact[2] != 'N')) {
      throw std::invalid_argument("policy must look like I|S|N, got '" +
                                  std::string(text) + "'");
    }
    return {compact[0] == 'B' ? FlowModel::Binary : FlowModel::Integer,
            compact[1] == 'S', compact[2] == 'S'};
  }

  friend bool operator==(const VariantPolicy& a, const VariantPolicy& b) {
    return a.flow == b.flow && a.switch_allowed == b.switch_allowed &&
           a.split_allowed == b.split_allowed;
  }
};

struct Arc {
  int from = 0;
  int to = 0;
  double tau = 0.0;  // zero into the end depot
  int gamma = 0;     // support-vehicle capacity; zero disables the arc for them

  friend bool operator==(const Arc& a, const Arc& b) {
    return a.from == b.from && a.to == b.to && a.tau == b.tau && a.gamma == b.gamma;
  }
};

/// Node indexing: 0 = start depot, n = |V|*|K| + 1 = end depot, and the copy
/// of original customer v for vehicle k (both 1-based) is (k-1)*|V| + v.
class ExpandedGraph {
 public:
  VariantPolicy policy;
  int num_originals = 0;   // |V|
  int num_primary = 0;     // |K|
  int num_support = 0;     // |O|
  double big_m = 0.0;
  std::vector<Arc> arcs;

  int end_depot() const { return num_originals * num_primary + 1; }
  int num_nodes() const { return end_depot() + 1; }
  int num_copies() const { return num_originals * num_primary; }

  bool is_copy(int node) const { return node >= 1 && node <= num_copies(); }

  /// Owner vehicle of a copy, 1-based.
  int owner(int copy) const { return (copy - 1) / num_originals + 1; }

  /// Original customer id of a copy.
  int original_of(int copy) const { return (copy - 1) % num_originals + 1; }

  int copy_of(int vehicle, int original) const {
    return (vehicle - 1) * num_originals + original;
  }

  /// C_k, in ascending order.
  std::vector<int> copies_of(int vehicle) const {
    std::vector<int> out;
    out.reserve(static_cast<size_t>(num_originals));
    for (int v = 1; v <= num_originals; ++v) out.push_back(copy_of(vehicle, v));
    return out;
  }

  /// Identical nodes of a copy: all copies of the same original, including j.
  std::vector<int> identical(int copy) const {
    std::vector<int> out;
    out.reserve(static_cast<size_t>(num_primary));
    int v = original_of(copy);
    for (int k = 1; k <= num_primary; ++k) out.push_back(copy_of(k, v));
    return out;
  }

  /// Related nodes: the identical set when splitting is disallowed, just
  /// {copy} when allowed.
  std::vector<int> related(int copy) const {
    if (policy.split_allowed) return {copy};
    return identical(copy);
  }

  int arc_index(int from, int to) const {
    int idx = arc_lookup_[static_cast<size_t>(from) * static_cast<size_t>(num_nodes()) +
                          static_cast<size_t>(to)];
    return idx;
  }

  bool has_arc(int from, int to) const { return arc_index(from, to) >= 0; }

  double tau(int from, int to) const {
    int idx = arc_index(from, to);
    if (idx < 0) throw std::out_of_range("no arc " + std::to_string(from) + "->" + std::to_string(to));
    return arcs[static_cast<size_t>(idx)].tau;
  }

  int gamma(int from, int to) const {
    int idx = arc_index(from, to);
    if (idx < 0) throw std::out_of_range("no arc " + std::to_string(from) + "->" + std::to_string(to));
    return arcs[static_cast<size_t>(idx)].gamma;
  }

  void rebuild_lookup() {
    arc_lookup_.assign(static_cast<size_t>(num_nodes()) * static_cast<size_t>(num_nodes()), -1);
    for (size_t a = 0; a < arcs.size(); ++a) {
      arc_lookup_[static_cast<size_t>(arcs[a].from) * static_cast<size_t>(num_nodes()) +
                  static_cast<size_t>(arcs[a].to)] = static_cast<int>(a);
    }
  }

 private:
  std::vector<int> arc_lookup_;
};

/// Whether arc (i, j) leaves one vehicle's copy set without heading to the
/// end depot. These are the arcs a support vehicle needs for switching.
inline bool is_cross_fleet(const ExpandedGraph& g, int from, int to) {
  return g.is_copy(from) && to != g.end_depot() &&
         (!g.is_copy(to) || g.owner(to) != g.owner(from));
}

/// Builds the expanded graph for `policy`. `big_m` must be an upper bound on
/// the feasible makespan (see estimate_big_m). Capacities on enabled arcs are
/// min(|O|, b) of the head customer; cross-fleet arcs get zero when switching
/// is disallowed.
inline ExpandedGraph build_graph(const Instance& inst, const VariantPolicy& policy,
                                 double big_m) {
  ExpandedGraph g;
  g.policy = policy;
  g.num_originals = inst.num_customers();
  g.num_primary = inst.fleet.primary_count;
  g.num_support = inst.fleet.support_count;
  g.big_m = big_m;

  const int n = g.end_depot();
  auto location = [&](int node) -> const Point& {
    if (node == 0 || node == n) return inst.depot;
    return inst.customer(g.original_of(node)).location;
  };

  for (int i = 0; i < n; ++i) {          // N+ excludes the end depot
    for (int j = 1; j <= n; ++j) {       // N- excludes the start depot
      if (i == j) continue;
      if (g.is_copy(i) && g.is_copy(j) &&
          g.original_of(i) == g.original_of(j)) {
        continue;  // j in the identical set of i
      }
      Arc arc;
      arc.from = i;
      arc.to = j;
      arc.tau = (j == n) ? 0.0 : travel_time(location(i), location(j));
      if (!policy.switch_allowed && is_cross_fleet(g, i, j)) {
        arc.gamma = 0;
      } else if (g.is_copy(j)) {
        arc.gamma = std::min(g.num_support, inst.customer(g.original_of(j)).max_modes);
      } else {
        arc.gamma = g.num_support;
      }
      g.arcs.push_back(arc);
    }
  }
  g.rebuild_lookup();
  return g;
}

/// All arcs that leave a vehicle's copy set other than into the end depot.
/// Empty for a single primary vehicle.
inline std::vector<Arc> cross_fleet_arcs(const ExpandedGraph& g) {
  std::vector<Arc> out;
  for (const Arc& a : g.arcs) {
    if (is_cross_fleet(g, a.from, a.to)) out.push_back(a);
  }
  return out;
}

}  // namespace svrp

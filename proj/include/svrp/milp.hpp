#pragma once

// Mixed-integer formulations over the expanded graph. Both support-flow
// encodings (per-vehicle binary arcs z, aggregated integer arcs w with
// indicators v) share the primary routing, service, and timing rows; the
// optional strengthening rows never cut a feasible integer point.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "svrp/exact.hpp"
#include "svrp/graph.hpp"
#include "svrp/instance.hpp"
#include "svrp/lp.hpp"
#include "svrp/schedule.hpp"

namespace svrp {

enum class VarKind { X, Q, Y, T, S, Z, V, W };

enum class VarDomain { Binary, IntegerNonneg, ContinuousNonneg };

struct VarRef {
  VarKind kind;
  int i = 0;  // tail node (x, z, v, w)
  int j = 0;  // head node, or the node itself (q, y, t, s)
  int m = 0;  // mode (y, s)
  int o = 0;  // support vehicle (z)

  static VarRef x(int i, int j) { return {VarKind::X, i, j, 0, 0}; }
  static VarRef q(int j) { return {VarKind::Q, 0, j, 0, 0}; }
  static VarRef y(int j, int m) { return {VarKind::Y, 0, j, m, 0}; }
  static VarRef t(int j) { return {VarKind::T, 0, j, 0, 0}; }
  static VarRef s(int j, int m) { return {VarKind::S, 0, j, m, 0}; }
  static VarRef z(int i, int j, int o) { return {VarKind::Z, i, j, 0, o}; }
  static VarRef v(int i, int j) { return {VarKind::V, i, j, 0, 0}; }
  static VarRef w(int i, int j) { return {VarKind::W, i, j, 0, 0}; }
};

struct MilpVar {
  VarRef ref;
  VarDomain domain = VarDomain::ContinuousNonneg;
  std::string name;
  double lo = 0.0;
  double hi = kLpInfinity;
};

struct LinTerm {
  int var = -1;
  double coef = 0.0;
};

struct MilpRow {
  std::string name;
  std::vector<LinTerm> terms;
  Rel rel = Rel::Equal;
  double rhs = 0.0;
};

struct MilpModel {
  VariantPolicy policy;
  double big_m = 0.0;
  bool with_cuts = false;
  ExpandedGraph graph;
  std::vector<MilpVar> vars;
  std::vector<MilpRow> rows;
  int objective_var = -1;  // t at the end depot

  std::map<std::tuple<int, int, int, int, int>, int> lookup;

  int var_id(const VarRef& r) const {
    auto it = lookup.find({static_cast<int>(r.kind), r.i, r.j, r.m, r.o});
    return it == lookup.end() ? -1 : it->second;
  }
  const MilpVar& var(const VarRef& r) const {
    int id = var_id(r);
    if (id < 0) throw std::invalid_argument("model has no such variable");
    return vars[static_cast<std::size_t>(id)];
  }
};

using Assignment = std::map<std::string, double>;

struct RowViolation {
  std::string row;
  double amount = 0.0;  // positive slack shortfall
};

namespace detail {

inline std::string fmt_int(int v) { return std::to_string(v); }

inline std::string var_name(const VarRef& r, int end_depot) {
  switch (r.kind) {
    case VarKind::X:
      return "x_" + fmt_int(r.i) + "_" + fmt_int(r.j);
    case VarKind::Q:
      return "q_" + fmt_int(r.j);
    case VarKind::Y:
      return "y_" + fmt_int(r.j) + "_" + fmt_int(r.m);
    case VarKind::T:
      return r.j == end_depot ? "t_n" : "t_" + fmt_int(r.j);
    case VarKind::S:
      return "s_" + fmt_int(r.j) + "_" + fmt_int(r.m);
    case VarKind::Z:
      return "z_" + fmt_int(r.i) + "_" + fmt_int(r.j) + "_" + fmt_int(r.o);
    case VarKind::V:
      return "v_" + fmt_int(r.i) + "_" + fmt_int(r.j);
    case VarKind::W:
      return "w_" + fmt_int(r.i) + "_" + fmt_int(r.j);
  }
  return "?";
}

class ModelBuilder {
 public:
  ModelBuilder(const Instance& inst, const ExpandedGraph& g, bool with_cuts)
      : inst_(inst), g_(g) {
    model_.policy = g.policy;
    model_.big_m = g.big_m;
    model_.with_cuts = with_cuts;
    model_.graph = g;
  }

  MilpModel build() {
    declare_variables();
    primary_rows();
    service_rows();
    if (g_.policy.flow == FlowModel::Binary)
      binary_flow_rows();
    else
      integer_flow_rows();
    if (model_.with_cuts) cut_rows();
    return std::move(model_);
  }

 private:
  int add_var(const VarRef& r, VarDomain dom, double lo, double hi) {
    MilpVar v;
    v.ref = r;
    v.domain = dom;
    v.name = var_name(r, g_.end_depot());
    v.lo = lo;
    v.hi = hi;
    int id = static_cast<int>(model_.vars.size());
    model_.vars.push_back(std::move(v));
    model_.lookup[{static_cast<int>(r.kind), r.i, r.j, r.m, r.o}] = id;
    return id;
  }

  void add_row(std::string name, std::vector<LinTerm> terms, Rel rel, double rhs) {
    if (terms.empty()) return;  // vacuous index set
    MilpRow row;
    row.name = std::move(name);
    row.terms = std::move(terms);
    row.rel = rel;
    row.rhs = rhs;
    model_.rows.push_back(std::move(row));
  }

  // x lives on within-fleet arcs except (0, n); q, y, s on copies; t on all
  // nodes; the support variables on the full arc set
  void declare_variables() {
    for (int k = 1; k <= g_.num_primary; ++k)
      for (int i : fleet_tails(k))
        for (int j : fleet_heads(k)) {
          if (i == j || (i == 0 && j == g_.end_depot())) continue;
          add_var(VarRef::x(i, j), VarDomain::Binary, 0.0, 1.0);
        }
    for (int j = 1; j <= g_.num_copies(); ++j)
      add_var(VarRef::q(j), VarDomain::Binary, 0.0, 1.0);
    for (int j = 1; j <= g_.num_copies(); ++j)
      for (int m = 1; m <= modes_of(j); ++m)
        add_var(VarRef::y(j, m), VarDomain::Binary, 0.0, 1.0);
    for (int j = 0; j < g_.num_nodes(); ++j) {
      int id = add_var(VarRef::t(j), VarDomain::ContinuousNonneg, 0.0,
                       j == 0 ? 0.0 : model_.big_m);
      if (j == g_.end_depot()) model_.objective_var = id;
    }
    for (int j = 1; j <= g_.num_copies(); ++j)
      for (int m = 1; m <= modes_of(j); ++m)
        add_var(VarRef::s(j, m), VarDomain::ContinuousNonneg, 0.0, kLpInfinity);
    if (g_.policy.flow == FlowModel::Binary) {
      for (const Arc& a : g_.arcs)
        for (int o = 1; o <= g_.num_support; ++o)
          add_var(VarRef::z(a.from, a.to, o), VarDomain::Binary, 0.0, 1.0);
    } else {
      for (const Arc& a : g_.arcs)
        add_var(VarRef::w(a.from, a.to), VarDomain::IntegerNonneg, 0.0, kLpInfinity);
      for (const Arc& a : g_.arcs)
        add_var(VarRef::v(a.from, a.to), VarDomain::Binary, 0.0, 1.0);
    }
  }

  std::vector<int> fleet_tails(int k) const {
    std::vector<int> out{0};
    for (int v = 1; v <= inst_.num_customers(); ++v) out.push_back(g_.copy_of(k, v));
    return out;
  }
  std::vector<int> fleet_heads(int k) const {
    std::vector<int> out;
    for (int v = 1; v <= inst_.num_customers(); ++v) out.push_back(g_.copy_of(k, v));
    out.push_back(g_.end_depot());
    return out;
  }
  int modes_of(int j) const { return inst_.customer(g_.original_of(j)).max_modes; }

  std::vector<LinTerm> service_terms(int i, double coef) const {
    std::vector<LinTerm> terms;
    if (i >= 1 && i <= g_.num_copies())
      for (int h : g_.related(i))
        for (int m = 1; m <= modes_of(h); ++m)
          terms.push_back({model_.var_id(VarRef::s(h, m)), coef});
    return terms;
  }

  std::string tag(std::initializer_list<int> idx, const char* family) const {
    std::string out(family);
    out += '[';
    bool first = true;
    for (int v : idx) {
      if (!first) out += ',';
      out += fmt_int(v);
      first = false;
    }
    out += ']';
    return out;
  }

  void primary_rows() {
    // each primary vehicle leaves the depot at most once
    for (int k = 1; k <= g_.num_primary; ++k) {
      std::vector<LinTerm> terms;
      for (int v = 1; v <= inst_.num_customers(); ++v)
        terms.push_back({model_.var_id(VarRef::x(0, g_.copy_of(k, v))), 1.0});
      add_row(tag({k}, "outflow_primary_depot"), std::move(terms), Rel::LessEqual, 1.0);
    }
    // visited copies are entered and left exactly once
    for (int k = 1; k <= g_.num_primary; ++k)
      for (int v = 1; v <= inst_.num_customers(); ++v) {
        int j = g_.copy_of(k, v);
        std::vector<LinTerm> in;
        for (int i : fleet_tails(k))
          if (i != j) in.push_back({model_.var_id(VarRef::x(i, j)), 1.0});
        in.push_back({model_.var_id(VarRef::q(j)), -1.0});
        add_row(tag({k, j}, "inflow_primary"), std::move(in), Rel::Equal, 0.0);

        std::vector<LinTerm> out;
        for (int i : fleet_heads(k))
          if (i != j) out.push_back({model_.var_id(VarRef::x(j, i)), 1.0});
        out.push_back({model_.var_id(VarRef::q(j)), -1.0});
        add_row(tag({k, j}, "outflow_primary"), std::move(out), Rel::Equal, 0.0);
      }
    // service completion propagates along every used arc
    for (int k = 1; k <= g_.num_primary; ++k)
      for (int i : fleet_tails(k))
        for (int j : fleet_heads(k)) {
          if (i == j) continue;
          std::vector<LinTerm> terms{{model_.var_id(VarRef::t(j)), 1.0},
                                     {model_.var_id(VarRef::t(i)), -1.0}};
          for (LinTerm st : service_terms(i, -1.0)) terms.push_back(st);
          int xid = model_.var_id(VarRef::x(i, j));
          if (xid >= 0) {
            double tau = g_.tau(i, j);
            terms.push_back({xid, -(tau + model_.big_m)});
          }
          add_row(tag({k, i, j}, "time_primary"), std::move(terms), Rel::GreaterEqual,
                  -model_.big_m);
        }
  }

  void service_rows() {
    // demands are met by the copies of each customer jointly
    for (int v = 1; v <= inst_.num_customers(); ++v) {
      const CustomerSpec& c = inst_.customer(v);
      std::vector<LinTerm> terms;
      for (int i : g_.identical(g_.copy_of(1, v)))
        for (int m = 1; m <= c.max_modes; ++m)
          terms.push_back({model_.var_id(VarRef::s(i, m)), c.productivity_at(m)});
      add_row(tag({v}, "complete_demand_satisfaction"), std::move(terms), Rel::Equal, c.demand);
    }
    // one mode per visited copy
    for (int j = 1; j <= g_.num_copies(); ++j) {
      std::vector<LinTerm> terms;
      for (int m = 1; m <= modes_of(j); ++m)
        terms.push_back({model_.var_id(VarRef::y(j, m)), 1.0});
      terms.push_back({model_.var_id(VarRef::q(j)), -1.0});
      add_row(tag({j}, "single_mode_node"), std::move(terms), Rel::Equal, 0.0);
    }
    // service time bounded by the selected mode's full-demand time
    for (int j = 1; j <= g_.num_copies(); ++j) {
      const CustomerSpec& c = inst_.customer(g_.original_of(j));
      for (int m = 1; m <= c.max_modes; ++m) {
        std::vector<LinTerm> terms{{model_.var_id(VarRef::s(j, m)), 1.0},
                                   {model_.var_id(VarRef::y(j, m)), -mode_service_time(c, m)}};
        add_row(tag({j, m}, "upper_bound_service"), std::move(terms), Rel::LessEqual, 0.0);
      }
    }
    // exactly one copy without splitting, at least one with it
    for (int v = 1; v <= inst_.num_customers(); ++v) {
      std::vector<LinTerm> terms;
      for (int i : g_.identical(g_.copy_of(1, v)))
        terms.push_back({model_.var_id(VarRef::q(i)), 1.0});
      add_row(tag({v}, "visit_count"), std::move(terms),
              g_.policy.split_allowed ? Rel::GreaterEqual : Rel::Equal, 1.0);
    }
  }

  void binary_flow_rows() {
    // mode equals the number of support vehicles entering the copy
    for (int j = 1; j <= g_.num_copies(); ++j) {
      std::vector<LinTerm> terms;
      for (int m = 1; m <= modes_of(j); ++m)
        terms.push_back({model_.var_id(VarRef::y(j, m)), static_cast<double>(m)});
      for (const Arc& a : g_.arcs)
        if (a.to == j)
          for (int o = 1; o <= g_.num_support; ++o)
            terms.push_back({model_.var_id(VarRef::z(a.from, a.to, o)), -1.0});
      add_row(tag({j}, "set_mode_binary"), std::move(terms), Rel::Equal, 0.0);
    }
    // every support vehicle leaves the depot once
    for (int o = 1; o <= g_.num_support; ++o) {
      std::vector<LinTerm> terms;
      for (const Arc& a : g_.arcs)
        if (a.from == 0) terms.push_back({model_.var_id(VarRef::z(0, a.to, o)), 1.0});
      add_row(tag({o}, "outflow_secondary_depot_binary"), std::move(terms), Rel::Equal, 1.0);
    }
    // per-vehicle conservation at copies
    for (int j = 1; j <= g_.num_copies(); ++j)
      for (int o = 1; o <= g_.num_support; ++o) {
        std::vector<LinTerm> terms;
        for (const Arc& a : g_.arcs) {
          if (a.to == j) terms.push_back({model_.var_id(VarRef::z(a.from, a.to, o)), 1.0});
          if (a.from == j) terms.push_back({model_.var_id(VarRef::z(a.from, a.to, o)), -1.0});
        }
        add_row(tag({j, o}, "flow_conservation_binary"), std::move(terms), Rel::Equal, 0.0);
      }
    // timing along support movements, one row per vehicle and arc
    for (int o = 1; o <= g_.num_support; ++o)
      for (const Arc& a : g_.arcs) {
        std::vector<LinTerm> terms{{model_.var_id(VarRef::t(a.to)), 1.0},
                                   {model_.var_id(VarRef::t(a.from)), -1.0}};
        for (LinTerm st : service_terms(a.from, -1.0)) terms.push_back(st);
        terms.push_back({model_.var_id(VarRef::z(a.from, a.to, o)), -(a.tau + model_.big_m)});
        add_row(tag({o, a.from, a.to}, "time_support_binary"), std::move(terms),
                Rel::GreaterEqual, -model_.big_m);
      }
    // switching off: no cross-fleet movement for any support vehicle
    if (!g_.policy.switch_allowed)
      for (int o = 1; o <= g_.num_support; ++o)
        for (const Arc& a : g_.arcs)
          if (is_cross_fleet(g_, a.from, a.to)) {
            std::vector<LinTerm> terms{{model_.var_id(VarRef::z(a.from, a.to, o)), 1.0}};
            add_row(tag({o, a.from, a.to}, "switch_disable"), std::move(terms), Rel::Equal,
                    0.0);
          }
  }

  void integer_flow_rows() {
    // mode equals aggregated inflow
    for (int j = 1; j <= g_.num_copies(); ++j) {
      std::vector<LinTerm> terms;
      for (int m = 1; m <= modes_of(j); ++m)
        terms.push_back({model_.var_id(VarRef::y(j, m)), static_cast<double>(m)});
      for (const Arc& a : g_.arcs)
        if (a.to == j) terms.push_back({model_.var_id(VarRef::w(a.from, a.to)), -1.0});
      add_row(tag({j}, "set_mode_integer"), std::move(terms), Rel::Equal, 0.0);
    }
    // the whole support fleet leaves the depot
    {
      std::vector<LinTerm> terms;
      for (const Arc& a : g_.arcs)
        if (a.from == 0) terms.push_back({model_.var_id(VarRef::w(0, a.to)), 1.0});
      add_row("outflow_secondary_depot_integer", std::move(terms), Rel::Equal,
              static_cast<double>(g_.num_support));
    }
    // aggregated conservation at copies
    for (int j = 1; j <= g_.num_copies(); ++j) {
      std::vector<LinTerm> terms;
      for (const Arc& a : g_.arcs) {
        if (a.to == j) terms.push_back({model_.var_id(VarRef::w(a.from, a.to)), 1.0});
        if (a.from == j) terms.push_back({model_.var_id(VarRef::w(a.from, a.to)), -1.0});
      }
      add_row(tag({j}, "flow_conservation_integer"), std::move(terms), Rel::Equal, 0.0);
    }
    // capacity ties flow to the arc indicator; gamma 0 disables the arc
    for (const Arc& a : g_.arcs) {
      std::vector<LinTerm> terms{{model_.var_id(VarRef::w(a.from, a.to)), 1.0},
                                 {model_.var_id(VarRef::v(a.from, a.to)),
                                  -static_cast<double>(a.gamma)}};
      add_row(tag({a.from, a.to}, "arc_used_integer"), std::move(terms), Rel::LessEqual, 0.0);
    }
    // timing along used arcs
    for (const Arc& a : g_.arcs) {
      std::vector<LinTerm> terms{{model_.var_id(VarRef::t(a.to)), 1.0},
                                 {model_.var_id(VarRef::t(a.from)), -1.0}};
      for (LinTerm st : service_terms(a.from, -1.0)) terms.push_back(st);
      terms.push_back({model_.var_id(VarRef::v(a.from, a.to)), -(a.tau + model_.big_m)});
      add_row(tag({a.from, a.to}, "time_support_integer"), std::move(terms), Rel::GreaterEqual,
              -model_.big_m);
    }
  }

  void cut_rows() {
    // makespan covers each vehicle's own travel plus its services
    for (int k = 1; k <= g_.num_primary; ++k) {
      std::vector<LinTerm> terms{{model_.objective_var, 1.0}};
      for (int i : fleet_tails(k))
        for (int j : fleet_heads(k)) {
          int xid = model_.var_id(VarRef::x(i, j));
          if (xid >= 0) terms.push_back({xid, -g_.tau(i, j)});
        }
      for (int v = 1; v <= inst_.num_customers(); ++v) {
        int j = g_.copy_of(k, v);
        for (int m = 1; m <= modes_of(j); ++m)
          terms.push_back({model_.var_id(VarRef::s(j, m)), -1.0});
      }
      add_row(tag({k}, "lower_bound_primary"), std::move(terms), Rel::GreaterEqual, 0.0);
    }
    // makespan covers the departure from any served node plus the way home
    for (int k = 1; k <= g_.num_primary; ++k)
      for (int i : fleet_tails(k)) {
        std::vector<LinTerm> terms{{model_.objective_var, 1.0},
                                   {model_.var_id(VarRef::t(i)), -1.0}};
        for (LinTerm st : service_terms(i, -1.0)) terms.push_back(st);
        for (int j : fleet_heads(k)) {
          int xid = (i == j) ? -1 : model_.var_id(VarRef::x(i, j));
          if (xid < 0) continue;
          double home = j == g_.end_depot() ? 0.0 : g_.tau(j, g_.end_depot());
          terms.push_back({xid, -(g_.tau(i, j) + home)});
        }
        add_row(tag({k, i}, "lower_bound_routing_primary"), std::move(terms),
                Rel::GreaterEqual, 0.0);
      }
    // arrival time covers depot departure plus the direct approach
    for (int k = 1; k <= g_.num_primary; ++k)
      for (int j : fleet_heads(k)) {
        std::vector<LinTerm> terms{{model_.var_id(VarRef::t(j)), 1.0}};
        for (int i : fleet_tails(k)) {
          int xid = (i == j) ? -1 : model_.var_id(VarRef::x(i, j));
          if (xid < 0) continue;
          double approach = i == 0 ? 0.0 : g_.tau(0, i);
          terms.push_back({xid, -(approach + g_.tau(i, j))});
        }
        add_row(tag({k, j}, "lower_bound_arrival_primary"), std::move(terms),
                Rel::GreaterEqual, 0.0);
      }
    // a vehicle with any visit must leave the depot
    for (int k = 1; k <= g_.num_primary; ++k)
      for (int v = 1; v <= inst_.num_customers(); ++v) {
        std::vector<LinTerm> terms;
        for (int u = 1; u <= inst_.num_customers(); ++u)
          terms.push_back({model_.var_id(VarRef::x(0, g_.copy_of(k, u))), 1.0});
        terms.push_back({model_.var_id(VarRef::q(g_.copy_of(k, v))), -1.0});
        add_row(tag({k, g_.copy_of(k, v)}, "lower_bound_leaving_depot"), std::move(terms),
                Rel::GreaterEqual, 0.0);
      }
    // the support fleet's travel and attendance spread over |O| vehicles,
    // scaled by |O| to keep coefficients integral
    {
      std::vector<LinTerm> terms{{model_.objective_var, static_cast<double>(g_.num_support)}};
      for (const Arc& a : g_.arcs) {
        if (g_.policy.flow == FlowModel::Binary) {
          for (int o = 1; o <= g_.num_support; ++o)
            terms.push_back({model_.var_id(VarRef::z(a.from, a.to, o)), -a.tau});
        } else {
          terms.push_back({model_.var_id(VarRef::w(a.from, a.to)), -a.tau});
        }
      }
      for (int j = 1; j <= g_.num_copies(); ++j)
        for (int m = 1; m <= modes_of(j); ++m)
          terms.push_back({model_.var_id(VarRef::s(j, m)), -static_cast<double>(m)});
      add_row("secondary_lower_bound", std::move(terms), Rel::GreaterEqual, 0.0);
    }
    // no copy can host more vehicles than the fleet or its own cap
    for (int j = 1; j <= g_.num_copies(); ++j) {
      std::vector<LinTerm> terms;
      for (const Arc& a : g_.arcs)
        if (a.to == j) {
          if (g_.policy.flow == FlowModel::Binary) {
            for (int o = 1; o <= g_.num_support; ++o)
              terms.push_back({model_.var_id(VarRef::z(a.from, a.to, o)), 1.0});
          } else {
            terms.push_back({model_.var_id(VarRef::w(a.from, a.to)), 1.0});
          }
        }
      add_row(tag({j}, "secondary_upper_bound"), std::move(terms), Rel::LessEqual,
              std::min(g_.num_support, modes_of(j)));
    }
    // a used arc carries at least one vehicle
    if (g_.policy.flow == FlowModel::Integer)
      for (const Arc& a : g_.arcs) {
        std::vector<LinTerm> terms{{model_.var_id(VarRef::w(a.from, a.to)), 1.0},
                                   {model_.var_id(VarRef::v(a.from, a.to)), -1.0}};
        add_row(tag({a.from, a.to}, "minimum_flow_on_arc"), std::move(terms),
                Rel::GreaterEqual, 0.0);
      }
  }

  const Instance& inst_;
  const ExpandedGraph& g_;
  MilpModel model_;
};

}  // namespace detail

inline MilpModel build_model(const Instance& inst, const ExpandedGraph& g,
                             bool with_cuts = false) {
  detail::ModelBuilder b(inst, g, with_cuts);
  return b.build();
}

// Upper bound on the optimal makespan, used as the timing Big-M.
inline double estimate_big_m(const Instance& inst, VariantPolicy policy) {
  if (inst.num_customers() == 0) return 0.0;
  return construction_heuristic(inst, policy).schedule.makespan;
}

namespace detail {

inline std::string mangle(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
      out += c;
    else if (c == '[' || c == ',')
      out += '_';
    // ']' dropped
  }
  return out;
}

inline std::string fmt_num(double v) {
  char buf[48];
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15)
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  else
    std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// appends a term, wrapping before the 255-character line limit
inline void push_token(std::string& out, std::string& line, const std::string& tok) {
  if (line.size() + tok.size() + 1 > 250) {
    out += line;
    out += '\n';
    line = " ";
  }
  line += ' ';
  line += tok;
}

}  // namespace detail

inline std::string export_lp_file(const MilpModel& m) {
  std::string out;
  out += "Minimize\n obj: " + m.vars[static_cast<std::size_t>(m.objective_var)].name + "\n";
  out += "Subject To\n";
  for (const MilpRow& row : m.rows) {
    std::string line = " " + detail::mangle(row.name) + ":";
    bool first = true;
    for (const LinTerm& term : row.terms) {
      double c = term.coef;
      if (c == 0.0) continue;
      std::string tok;
      if (first) {
        if (c < 0) tok = "- ";
        first = false;
      } else {
        tok = c < 0 ? "- " : "+ ";
      }
      double mag = std::abs(c);
      if (mag != 1.0) tok += detail::fmt_num(mag) + " ";
      tok += m.vars[static_cast<std::size_t>(term.var)].name;
      detail::push_token(out, line, tok);
    }
    const char* rel = row.rel == Rel::LessEqual   ? "<="
                      : row.rel == Rel::Equal     ? "="
                                                  : ">=";
    detail::push_token(out, line, std::string(rel) + " " + detail::fmt_num(row.rhs));
    out += line;
    out += '\n';
  }
  out += "Bounds\n";
  for (const MilpVar& v : m.vars) {
    if (v.domain == VarDomain::Binary) continue;  // implied by the Binaries section
    if (v.lo == 0.0 && v.hi >= kLpInfinity) continue;
    if (v.lo == v.hi)
      out += " " + v.name + " = " + detail::fmt_num(v.lo) + "\n";
    else
      out += " " + detail::fmt_num(v.lo) + " <= " + v.name + " <= " + detail::fmt_num(v.hi) +
             "\n";
  }
  auto name_section = [&](const char* header, VarDomain dom) {
    std::string sect;
    std::string line = "";
    bool any = false;
    for (const MilpVar& v : m.vars)
      if (v.domain == dom) {
        detail::push_token(sect, line, v.name);
        any = true;
      }
    if (any) {
      out += header;
      out += '\n';
      out += sect;
      out += line;
      out += '\n';
    }
  };
  name_section("Generals", VarDomain::IntegerNonneg);
  name_section("Binaries", VarDomain::Binary);
  out += "End\n";
  return out;
}

inline std::vector<RowViolation> evaluate_model(const MilpModel& m,
                                                const Assignment& assignment) {
  auto value_of = [&](int id) {
    const std::string& name = m.vars[static_cast<std::size_t>(id)].name;
    auto it = assignment.find(name);
    if (it == assignment.end())
      throw std::invalid_argument("assignment missing variable " + name);
    return it->second;
  };
  std::vector<RowViolation> out;
  for (const MilpRow& row : m.rows) {
    double lhs = 0.0;
    for (const LinTerm& term : row.terms) lhs += term.coef * value_of(term.var);
    double miss = 0.0;
    switch (row.rel) {
      case Rel::LessEqual:
        miss = lhs - row.rhs;
        break;
      case Rel::GreaterEqual:
        miss = row.rhs - lhs;
        break;
      case Rel::Equal:
        miss = std::abs(lhs - row.rhs);
        break;
    }
    if (miss > 1e-6) out.push_back({row.name, miss});
  }
  return out;
}

// Maps a native solution onto the model's variables. The schedule supplies
// the t values; support flows translate directly (Integer) or via a path
// decomposition per vehicle (Binary).
inline Assignment encode_solution(const MilpModel& m, const Solution& sol,
                                  const Schedule& sched) {
  const ExpandedGraph& g = m.graph;
  detail::check_solution_shape(g, sol);
  Assignment out;
  for (const MilpVar& v : m.vars) out[v.name] = 0.0;

  auto set = [&](const VarRef& r, double value) {
    int id = m.var_id(r);
    if (id < 0) throw std::invalid_argument("solution uses a variable outside the model");
    out[m.vars[static_cast<std::size_t>(id)].name] = value;
  };

  for (std::size_t k = 0; k < sol.plan.routes.size(); ++k) {
    int prev = 0;
    for (int j : sol.plan.routes[k]) {
      set(VarRef::x(prev, j), 1.0);
      prev = j;
    }
    if (prev != 0) set(VarRef::x(prev, g.end_depot()), 1.0);
  }
  for (int j = 1; j <= g.num_copies(); ++j) {
    int mode = sol.services.mode[j];
    if (mode <= 0) continue;
    set(VarRef::q(j), 1.0);
    set(VarRef::y(j, mode), 1.0);
    set(VarRef::s(j, mode), sol.services.duration[j]);
  }
  for (int j = 0; j < g.num_nodes(); ++j)
    set(VarRef::t(j), j < static_cast<int>(sched.start.size()) ? sched.start[j] : 0.0);

  if (m.policy.flow == FlowModel::Integer) {
    for (std::size_t a = 0; a < g.arcs.size(); ++a) {
      set(VarRef::w(g.arcs[a].from, g.arcs[a].to), sol.flow.counts[a]);
      set(VarRef::v(g.arcs[a].from, g.arcs[a].to), sol.flow.counts[a] > 0 ? 1.0 : 0.0);
    }
  } else {
    SupportPaths paths = decompose_flow(g, sol.flow);
    for (std::size_t o = 0; o < paths.paths.size(); ++o)
      for (std::size_t r = 0; r + 1 < paths.paths[o].size(); ++r)
        set(VarRef::z(paths.paths[o][r], paths.paths[o][r + 1], static_cast<int>(o) + 1), 1.0);
  }
  return out;
}

// Continuous relaxation: binaries to [0, 1], integers to [0, inf), bounds
// and rows otherwise identical.
inline LpProblem lp_relaxation(const MilpModel& m) {
  LpProblem lp;
  for (const MilpVar& v : m.vars) {
    double hi = v.domain == VarDomain::Binary ? 1.0 : v.hi;
    lp.add_var(0.0, v.lo, hi);
  }
  lp.objective[static_cast<std::size_t>(m.objective_var)] = 1.0;
  for (const MilpRow& row : m.rows) {
    LpRow r;
    r.coeffs.assign(m.vars.size(), 0.0);
    for (const LinTerm& term : row.terms)
      r.coeffs[static_cast<std::size_t>(term.var)] += term.coef;
    r.rel = row.rel;
    r.rhs = row.rhs;
    lp.rows.push_back(std::move(r));
  }
  return lp;
}

}  // namespace svrp

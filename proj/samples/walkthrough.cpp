// End-to-end tour: build an instance in code, solve it, inspect the answer,
// then grow the support fleet and watch the makespan drop.

#include <cstdio>

#include "svrp/bench.hpp"
#include "svrp/exact.hpp"
#include "svrp/graph.hpp"
#include "svrp/instance.hpp"
#include "svrp/milp.hpp"
#include "svrp/schedule.hpp"

int main() {
  // Three customers around a depot at the origin. Demand is the service time
  // a customer needs when its support crew is at full strength; fewer crews
  // stretch it proportionally.
  svrp::Instance inst;
  inst.name = "walkthrough";
  inst.depot = {0.0, 0.0};
  inst.fleet = {2, 3};  // two primary vehicles, three support vehicles
  for (int id = 1; id <= 3; ++id) {
    svrp::CustomerSpec c;
    c.id = id;
    c.location = {10.0 * id, 5.0 * (4 - id)};
    c.demand = 12.0 + 4.0 * id;
    c.max_modes = 2;
    for (int m = 1; m <= c.max_modes; ++m)
      c.productivity.push_back(svrp::default_productivity(c.max_modes, m));
    inst.customers.push_back(c);
  }
  svrp::validate_instance(inst);

  svrp::VariantPolicy policy = svrp::VariantPolicy::parse("I|S|N");
  svrp::SolveResult res = svrp::solve_exact(inst, policy);
  std::printf("%s under %s: makespan %.3f (%llu nodes)\n", inst.name.c_str(),
              policy.name().c_str(), res.makespan,
              static_cast<unsigned long long>(res.stats.nodes));

  // Routes are lists of copy ids on the expanded graph; owner() maps a copy
  // back to its vehicle and original_of() to the customer.
  svrp::ExpandedGraph g = svrp::build_graph(inst, policy, 0.0);
  for (std::size_t k = 1; k <= res.solution.plan.routes.size(); ++k) {
    std::printf("  vehicle %zu:", k);
    for (int j : res.solution.plan.routes[k - 1])
      std::printf(" customer %d (mode %d, starts %.3f)", g.original_of(j),
                  res.solution.services.mode[j], res.schedule.start[j]);
    std::printf("\n");
  }

  // The same instance with more support vehicles can only get faster.
  std::printf("support sweep:");
  for (int support = 2; support <= 6; ++support) {
    svrp::Instance variant = svrp::with_fleet(inst, 2, support);
    svrp::SolveResult r = svrp::solve_exact(variant, policy);
    std::printf(" |O|=%d -> %.3f", support, r.makespan);
  }
  std::printf("\n");

  // The matching mixed-integer model, ready for an external solver.
  double big_m = svrp::estimate_big_m(inst, policy);
  svrp::MilpModel model =
      svrp::build_model(inst, svrp::build_graph(inst, policy, big_m));
  std::printf("LP export: %zu variables, %zu rows, %zu characters\n",
              model.vars.size(), model.rows.size(),
              svrp::export_lp_file(model).size());
  return 0;
}

#pragma once

// Problem data model: customers with mode-dependent service times, fleet
// sizes, Euclidean travel metric, and the seeded random instance generator.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace svrp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point& a, const Point& b) {
    return a.x == b.x && a.y == b.y;
  }
};

/// Euclidean travel time between two locations.
inline double travel_time(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Thrown when a document violates a type invariant. `field` names the
/// offending entry.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Productivity rate of mode m out of b: m/b, so the service time at mode m
/// is demand * b / m and equals the demand at the highest mode.
inline double default_productivity(int b, int m) {
  if (m < 1 || m > b) {
    throw std::domain_error("mode " + std::to_string(m) + " outside 1.." +
                            std::to_string(b));
  }
  return static_cast<double>(m) / static_cast<double>(b);
}

struct CustomerSpec {
  int id = 0;
  Point location;
  double demand = 0.0;      // service time at the highest mode
  int max_modes = 1;        // b: modes are 1..b
  std::vector<double> productivity;  // productivity[m-1] = p^m, size b

  /// p^m for mode m in 1..max_modes.
  double productivity_at(int m) const {
    if (m < 1 || m > max_modes) {
      throw std::domain_error("mode " + std::to_string(m) + " outside 1.." +
                              std::to_string(max_modes));
    }
    return productivity[static_cast<size_t>(m) - 1];
  }
};

/// Full service duration at customer `spec` in mode m: demand / p^m.
/// Strictly decreasing in m; equals the demand at the highest mode.
inline double mode_service_time(const CustomerSpec& spec, int m) {
  return spec.demand / spec.productivity_at(m);
}

struct FleetConfig {
  int primary_count = 1;   // |K|
  int support_count = 1;   // |O|
};

struct Instance {
  Point depot;             // start node 0 and end node n share this location
  std::vector<CustomerSpec> customers;
  FleetConfig fleet;
  std::string name;

  int num_customers() const { return static_cast<int>(customers.size()); }

  const CustomerSpec& customer(int id) const {
    return customers.at(static_cast<size_t>(id) - 1);
  }
};

inline void validate_instance(const Instance& inst) {
  auto finite_point = [](const Point& p) {
    return std::isfinite(p.x) && std::isfinite(p.y);
  };
  if (!finite_point(inst.depot)) throw ValidationError("depot", "non-finite coordinate");
  if (inst.fleet.primary_count < 1) throw ValidationError("fleet.primary", "must be positive");
  if (inst.fleet.support_count < 1) throw ValidationError("fleet.support", "must be positive");
  for (size_t idx = 0; idx < inst.customers.size(); ++idx) {
    const CustomerSpec& c = inst.customers[idx];
    if (c.id != static_cast<int>(idx) + 1) {
      throw ValidationError("customers[" + std::to_string(idx) + "].id",
                            "ids must be 1..|V| in order");
    }
    if (!finite_point(c.location)) throw ValidationError("loc", "non-finite coordinate");
    if (!(c.demand > 0.0) || !std::isfinite(c.demand)) {
      throw ValidationError("demand", "must be positive");
    }
    if (c.max_modes < 1) throw ValidationError("max_modes", "must be at least 1");
    if (c.productivity.size() != static_cast<size_t>(c.max_modes)) {
      throw ValidationError("productivity", "needs one rate per mode");
    }
    double prev = 0.0;
    for (double p : c.productivity) {
      if (!(p > 0.0) || p > 1.0) throw ValidationError("productivity", "rates must lie in (0, 1]");
      if (p <= prev) throw ValidationError("productivity monotone", "rates must strictly increase");
      prev = p;
    }
    if (std::abs(c.productivity.back() - 1.0) > 1e-12) {
      throw ValidationError("productivity", "highest mode must have rate 1");
    }
  }
}

struct GenConfig {
  int num_customers = 5;
  int primary_count = 2;
  int support_count = 4;
  double plane_size = 100.0;
  int demand_min = 20;
  int demand_max = 50;
  int max_modes_min = 2;
  int max_modes_max = 4;
  std::uint64_t seed = 0;
};

/// |C|-|K|-|O| label, e.g. "05-02-04".
inline std::string config_label(int customers, int primary, int support) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%02d-%02d-%02d", customers, primary, support);
  return buf;
}

/// Uniformly distributed instance on [0, plane_size]^2 with integer demands
/// and default productivity rates. Pure function of the config: the sampling
/// scheme is pinned to mt19937_64 (recorded in the instance name), not to
/// std::uniform_* distributions, so instances are reproducible across
/// platforms.
inline Instance generate_instance(const GenConfig& cfg) {
  if (cfg.num_customers < 0 || cfg.primary_count < 1 || cfg.support_count < 1) {
    throw ValidationError("gen_config", "counts must be positive");
  }
  if (cfg.demand_min > cfg.demand_max || cfg.demand_min <= 0 ||
      cfg.max_modes_min > cfg.max_modes_max || cfg.max_modes_min < 1) {
    throw ValidationError("gen_config", "empty range");
  }
  std::mt19937_64 rng(cfg.seed);
  auto uniform_real = [&rng](double span) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * span;
  };
  auto uniform_int = [&rng](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };

  Instance inst;
  inst.fleet = {cfg.primary_count, cfg.support_count};
  inst.depot = {uniform_real(cfg.plane_size), uniform_real(cfg.plane_size)};
  inst.customers.reserve(static_cast<size_t>(cfg.num_customers));
  for (int id = 1; id <= cfg.num_customers; ++id) {
    CustomerSpec c;
    c.id = id;
    c.location = {uniform_real(cfg.plane_size), uniform_real(cfg.plane_size)};
    c.demand = uniform_int(cfg.demand_min, cfg.demand_max);
    c.max_modes = uniform_int(cfg.max_modes_min, cfg.max_modes_max);
    c.productivity.resize(static_cast<size_t>(c.max_modes));
    for (int m = 1; m <= c.max_modes; ++m) {
      c.productivity[static_cast<size_t>(m) - 1] = default_productivity(c.max_modes, m);
    }
    inst.customers.push_back(std::move(c));
  }
  inst.name = config_label(cfg.num_customers, cfg.primary_count, cfg.support_count) +
              "_s" + std::to_string(cfg.seed) + "_mt19937_64";
  validate_instance(inst);
  return inst;
}

/// Copy of `inst` with a different fleet, renamed to match.
inline Instance with_fleet(const Instance& inst, int primary, int support) {
  Instance out = inst;
  out.fleet = {primary, support};
  std::string label = config_label(inst.num_customers(), primary, support);
  std::string::size_type tail = inst.name.find('_');
  out.name = (tail == std::string::npos) ? label : label + inst.name.substr(tail);
  validate_instance(out);
  return out;
}

// ---------------------------------------------------------------------------
// JSON round trip.
//
// { "name": str, "depot": [x, y],
//   "customers": [{ "id": int, "loc": [x, y], "demand": num,
//                   "max_modes": int, "productivity": [num...]? }],
//   "fleet": { "primary": int, "support": int } }
//
// Omitted productivity means the default m/b rates.

inline std::string write_instance(const Instance& inst) {
  nlohmann::json j;
  j["name"] = inst.name;
  j["depot"] = {inst.depot.x, inst.depot.y};
  j["fleet"] = {{"primary", inst.fleet.primary_count},
                {"support", inst.fleet.support_count}};
  j["customers"] = nlohmann::json::array();
  for (const CustomerSpec& c : inst.customers) {
    nlohmann::json cj;
    cj["id"] = c.id;
    cj["loc"] = {c.location.x, c.location.y};
    cj["demand"] = c.demand;
    cj["max_modes"] = c.max_modes;
    bool is_default = true;
    for (int m = 1; m <= c.max_modes; ++m) {
      if (std::abs(c.productivity[static_cast<size_t>(m) - 1] -
                   default_productivity(c.max_modes, m)) > 1e-12) {
        is_default = false;
        break;
      }
    }
    if (!is_default) cj["productivity"] = c.productivity;
    j["customers"].push_back(std::move(cj));
  }
  return j.dump(2) + "\n";
}

inline Instance read_instance(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what());
  }
  Instance inst;
  try {
    inst.name = j.value("name", std::string{});
    inst.depot = {j.at("depot").at(0).get<double>(), j.at("depot").at(1).get<double>()};
    inst.fleet.primary_count = j.at("fleet").at("primary").get<int>();
    inst.fleet.support_count = j.at("fleet").at("support").get<int>();
    for (const auto& cj : j.at("customers")) {
      CustomerSpec c;
      c.id = cj.at("id").get<int>();
      c.location = {cj.at("loc").at(0).get<double>(), cj.at("loc").at(1).get<double>()};
      c.demand = cj.at("demand").get<double>();
      c.max_modes = cj.at("max_modes").get<int>();
      if (cj.contains("productivity")) {
        c.productivity = cj.at("productivity").get<std::vector<double>>();
      } else if (c.max_modes >= 1) {
        for (int m = 1; m <= c.max_modes; ++m) {
          c.productivity.push_back(default_productivity(c.max_modes, m));
        }
      }
      inst.customers.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
  validate_instance(inst);
  return inst;
}

}  // namespace svrp

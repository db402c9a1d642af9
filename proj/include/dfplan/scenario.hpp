#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "dfplan/replanner.hpp"
#include "dfplan/world_sim.hpp"

namespace dfplan {

inline constexpr int kConfigSchemaVersion = 1;

/// Schema violation; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  WorldConfig world;
  RobotModel robot;
  VecX start;
  VecX goal;
  PlannerParams params;
  ReplanConfig replan;

  ReplanProblem problem() const;
  bool operator==(const Scenario& o) const {
    return name == o.name && seed == o.seed && world == o.world && robot == o.robot &&
           start == o.start && goal == o.goal && params == o.params && replan == o.replan;
  }
};

Scenario scenario_from_yaml(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::string& path);
std::string scenario_to_yaml(const Scenario& s);

}  // namespace dfplan

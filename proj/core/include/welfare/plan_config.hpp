#pragma once

// JSON experiment plans.
//
//   {
//     "name": "fig2",
//     "algorithm":   {"id": "exp3", "K": 20, "gamma": 0.1, "eta": 0.025, "lambda": 0.7},
//     "environment": {"kind": "uniform"},
//     "horizons": [100000],
//     "replications": 4000,
//     "seed": 1,
//     "checkpoints_per_decade": 10,
//     "output": "out"
//   }
//
// algorithm.id, algorithm.lambda, environment.kind and horizons are required.
// Overrides are dotted key=value pairs applied after the file is parsed, e.g.
// algorithm.K=30 or T=1000 (shorthand for horizons=[1000]). Unknown keys are
// rejected.

#include <stdexcept>
#include <string>
#include <vector>

#include "welfare/harness.hpp"

namespace welfare {

/// Invalid plan file or override. The message names the file, line or field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentPlan parse_plan(const std::string& json_text, const std::vector<std::string>& overrides = {},
                          const std::string& origin = "<config>");

ExperimentPlan load_plan(const std::string& path, const std::vector<std::string>& overrides = {});

/// A plan built from overrides alone, on top of an empty document.
ExperimentPlan plan_from_overrides(const std::vector<std::string>& overrides);

}  // namespace welfare

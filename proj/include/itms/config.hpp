#pragma once

// YAML run configuration: scenario, plant, optional prediction-model
// overrides, simulation options and the three controller sections.
// Unknown keys are rejected with their dotted path.

#include <string>
#include <vector>

#include "itms/controllers.hpp"
#include "itms/plant.hpp"
#include "itms/scenario.hpp"
#include "itms/simulation.hpp"

namespace itms {

struct RunConfig {
    Scenario scenario;
    PlantParams plant;
    /// Model used inside both MPC layers; equals `plant` unless overridden.
    PlantParams model;
    SimulationOptions simulation;
    ControllerSuite controllers;

    /// Throws ConfigError on any inconsistent section.
    void validate() const;
};

/// Parse YAML text after applying `key.path=value` overrides.
[[nodiscard]] RunConfig parse_config(const std::string& yaml_text,
                                     const std::vector<std::string>& overrides = {});

[[nodiscard]] RunConfig load_config(const std::string& path,
                                    const std::vector<std::string>& overrides = {});

}  // namespace itms

#pragma once

#include "atwflow/flow.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace atw {

// Schema or value error in a scenario file. line is 1-based, 0 when unknown.
struct ScenarioError : std::runtime_error {
    int line = 0;
    ScenarioError(const std::string& msg, int line_no) : std::runtime_error(msg), line(line_no) {}
};

struct Scenario {
    std::string name;
    GridDomain domain;
    ShapeSpec shape;
    Anisotropy phi;
    Anisotropy psi;  // mobility; the distance uses psi.dual()
    double h = 0;
    double t_max = 0;
    SolverConfig solver;
    bool require_certified = true;
    int max_steps = -1;
    std::vector<double> probes;
    std::string output;
    std::uint64_t seed = 0;
};

// Top-level keys: domain, shape, phi, psi, h, t_max, solver, probes, output,
// seed (and an optional name). Unknown keys at any level are rejected.
// Throws ScenarioError, or FrameViolation when the shape reaches the frame.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<string>");

IndicatorField initial_set(const Scenario& s);

}  // namespace atw

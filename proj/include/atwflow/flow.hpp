#pragma once

#include "atwflow/solver.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace atw {

struct FlowStep {
    int n = 0;
    double t = 0;
    IndicatorField set;  // empty field (no cells) when sets are not kept
    double volume = 0;
    double perimeter = 0;
    double delta_cert = 0;  // certificate of this set from the step producing it; NaN at n = 0
    double residual = 0;
    int iterations = 0;
    bool certified = true;
};

struct FlowTrace {
    double h = 0;
    GridDomain dom;
    std::vector<FlowStep> steps;  // steps[0] is the initial set
    std::optional<int> extinction_step;
    // exit_step[x] = min{n : x not in T^n E0}, -1 while x is still inside
    std::vector<int> exit_step;
    bool aborted = false;
    std::string abort_reason;
};

struct FlowOptions {
    double t_max = 1e300;
    int max_steps = -1;             // -1: no limit besides t_max
    bool keep_sets = true;
    bool require_certified = true;  // abort on a non-certified step
    bool warm_start = true;
    std::function<void(const FlowStep&, const AtwStepResult&)> on_step;
};

// Iterates the ATW step from e0 until the set is empty or n h > t_max.
FlowTrace run_flow(const IndicatorField& e0, double h, const Anisotropy& phi, const Anisotropy& psi_dual,
                   const SolverConfig& cfg, const FlowOptions& opt);
FlowTrace run_flow(const IndicatorField& e0, double h, const Anisotropy& phi, const Anisotropy& psi_dual,
                   const SolverConfig& cfg, double t_max);

struct ArrivalTime {
    ScalarField field;
    double h = 0;
};

// u_h(x) = h min{n >= 0 : x not in T^n E0}. Throws if the trace is not extinct.
ArrivalTime arrival_time(const FlowTrace& trace);

struct BvEnergy {
    double total = 0;   // sum phi(-grad u) cellvol, same functional as the perimeter
    double coarea = 0;  // h sum_n P(T^n E0)
    double mismatch = 0;  // relative difference
};

// Throws std::runtime_error when the coarea sum disagrees by more than tol.
BvEnergy bv_energy(const ArrivalTime& u, const FlowTrace& trace, const TvStencil& st, double tol = 1e-6);
double bv_energy(const ArrivalTime& u, const TvStencil& st);
double bv_energy(const ArrivalTime& u, const Anisotropy& phi, int stencil_radius = 3);

// One row per refinement level of refine_study.
struct RefineRow {
    double h = 0;
    GridDomain dom;
    double bv_energy = 0;
    double coarea_mismatch = 0;
    std::optional<double> extinction_time;
    std::vector<double> hausdorff;  // per probe time, against the oracle set
    double error = 0;               // relative bv error with a reference, else max Hausdorff
    bool aborted = false;
};

struct RefineStudy {
    std::vector<RefineRow> rows;
    bool monotone_all = false;   // error strictly decreasing over every refinement
    bool monotone_last = false;  // ... over the last refinement
};

struct RefineSpec {
    std::function<IndicatorField(const GridDomain&)> initial;
    Anisotropy phi, psi_dual;
    SolverConfig cfg;
    double t_max = 1e300;
    std::vector<double> probes;
    // Oracle set at time t on a grid; used for the Hausdorff column when set.
    std::function<IndicatorField(double, const GridDomain&)> oracle;
    double reference_energy = std::numeric_limits<double>::quiet_NaN();
};

// Runs the flow for each (h_list[i], grids[i]); h_list must be decreasing.
RefineStudy refine_study(const RefineSpec& spec, const std::vector<double>& h_list,
                         const std::vector<GridDomain>& grids);

}  // namespace atw

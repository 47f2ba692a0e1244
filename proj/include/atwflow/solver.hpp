#pragma once

#include "atwflow/distance.hpp"
#include "atwflow/grid.hpp"
#include "atwflow/stencil.hpp"

#include <vector>

namespace atw {

enum class DistanceMethod { Sweep, BruteForce };

// Rof: threshold the minimizer of the ROF problem (gives duals and div).
// MinCut: minimize the set energy directly by a max-flow on a band around
// the boundary; no duals.
enum class SetSolver { Rof, MinCut };

struct SolverConfig {
    double tol_gap = 1e-7;        // relative duality gap
    int max_iters = 20000;        // block sweeps over all stencil directions
    double level_tol = 1e-9;
    bool smallest_minimizer = false;  // {w < -level_tol} instead of {w <= level_tol}
    int stencil_radius = 3;
    DistanceMethod distance = DistanceMethod::Sweep;
    DistanceConvention convention = DistanceConvention::HalfCell;
    int check_every = 5;
    int crop_margin = -1;         // cells around the set; -1 picks one from h
    int workers = 1;
    SetSolver set_solver = SetSolver::Rof;
    double band_cells = -1;       // initial min-cut band half-width in cells; -1 picks one from h
    bool truncate_distance = false;  // min-cut only: stop the distance a few bands out
};

// Edge duals y_k, one full-domain array per stencil direction. Doubles as a
// warm start for the next solve.
struct DualState {
    std::vector<std::vector<double>> y;
    bool empty() const { return y.empty(); }
};

struct RofSolution {
    ScalarField w;
    VectorField z;       // cell vectors sum_k y_k g_k, dual_eval(z) <= 1
    ScalarField div;     // stencil divergence of the duals: w = d + h div
    DualState dual;
    double residual = 0;     // relative duality gap at exit
    double el_residual = 0;  // max |-h div + w - d|
    int iterations = 0;
    bool certified = false;
    Box crop;
};

// Minimizes h J(w) + 1/2 |w - d|^2 on the crop box (natural boundary) by
// exact block-coordinate ascent on the dual: each block is one stencil
// direction, solved exactly along its lattice lines by a taut-string
// 1D TV prox. Outside the crop w = d and the duals vanish.
RofSolution solve_w(const ScalarField& d, double h, const TvStencil& st, const SolverConfig& cfg, const Box& crop,
                    const DualState* warm = nullptr);
RofSolution solve_w(const SignedDistance& d, double h, const Anisotropy& phi, const SolverConfig& cfg);

// Largest minimizer {w <= level_tol} (or the smallest one behind the flag).
// Throws FrameViolation if the result reaches the frame.
IndicatorField threshold_set(const ScalarField& w, const SolverConfig& cfg);

struct AtwStepResult {
    IndicatorField next_set;
    ScalarField d;  // signed distance of the input set
    ScalarField w;
    VectorField z;
    ScalarField div;
    DualState dual;
    double residual = 0;
    int iterations = 0;
    bool certified = false;
    double delta_certificate = 0;  // NaN when next_set has no interior cells or with min-cut
    double energy = 0;             // P(next) + (1/h) int_next d
    double perimeter = 0;
    Box crop;
};

SignedDistance compute_distance(const IndicatorField& e, const Anisotropy& psi_dual, const SolverConfig& cfg,
                                double cutoff = std::numeric_limits<double>::infinity());

AtwStepResult atw_step(const IndicatorField& e, double h, const Anisotropy& phi, const Anisotropy& psi_dual,
                       const SolverConfig& cfg);
AtwStepResult atw_step(const IndicatorField& e, double h, const TvStencil& st, const Anisotropy& psi_dual,
                       const SolverConfig& cfg, const DualState* warm = nullptr);

// P_phi(F) + (1/h) int_F d.
double atw_energy(const IndicatorField& f, const ScalarField& d, double h, const TvStencil& st);
double atw_energy(const IndicatorField& f, const SignedDistance& d, double h, const Anisotropy& phi);

// min of div over the cells of `set` lying at least two cells inside; NaN if none.
double delta_certificate(const IndicatorField& set, const ScalarField& div);

int auto_crop_margin(double h, const TvStencil& st);

}  // namespace atw

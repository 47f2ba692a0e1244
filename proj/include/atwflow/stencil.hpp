#pragma once

#include "atwflow/anisotropy.hpp"
#include "atwflow/grid.hpp"

#include <array>
#include <vector>

namespace atw {

// One undirected lattice direction of the discrete anisotropic TV.
// For a difference D = u(i + off) - u(i) the edge costs a*D^+ + b*D^-.
struct StencilEdge {
    std::array<int, 3> off{0, 0, 0};
    Vec g;        // physical offset vector off * spacing
    double a = 0;  // weight of increases along off
    double b = 0;  // weight of decreases along off
};

// Pairwise discretization phi_S(p) = sum_k a_k (p.g_k)^+ + b_k (p.g_k)^-.
// The weights are fitted to phi and then scaled so that the zonotope
// sum_k [-b_k, a_k] g_k lies inside {phi° <= 1}, touching its boundary.
// Hence phi_S <= phi and every cell vector z = sum_k y_k g_k with
// y_k in [-b_k, a_k] is dual feasible.
struct TvStencil {
    GridDomain dom;
    std::vector<StencilEdge> edges;
    double min_ratio = 1;  // min over sampled directions of phi_S / phi
    double max_ratio = 1;
    bool exact = false;    // phi_S == phi identically
};

TvStencil build_stencil(const Anisotropy& phi, const GridDomain& dom, int radius = 3);

// Evaluate phi_S on a vector p.
double stencil_eval(const TvStencil& s, const Vec& p);
// Max of phi°(v) over the zonotope vertices v (1 after construction).
double stencil_max_dual(const TvStencil& s, const Anisotropy& phi);

// J(u) = cellvol * sum_cells sum_k a_k (D_k u)^+ + b_k (D_k u)^-,
// with u extended by zero outside the grid. Approximates int phi(grad u).
double total_variation(const ScalarField& u, const TvStencil& s);
// J(-chi_E): anisotropic perimeter, phi evaluated on the outer normal.
double perimeter_phi(const IndicatorField& e, const TvStencil& s);
double perimeter_phi(const IndicatorField& e, const Anisotropy& phi);

// Nonnegative least squares, min |Ax - b| subject to x >= 0 (Lawson-Hanson).
Vec nnls(const Mat& A, const Vec& b, int max_iter = 500);

}  // namespace atw

#pragma once

#include "atwflow/anisotropy.hpp"
#include "atwflow/grid.hpp"

#include <limits>

namespace atw {

// Where the zero level sits relative to the cell centers.
//   CellCenter: the literal definition at cell centers, so boundary cells
//               get -(distance to the nearest outside center) and vice versa.
//   HalfCell:   the literal value moved toward zero by half the shortest
//               lattice step, centering the zero level between the layers.
//   Subcell:    distance to the 1/2 level of the indicator smoothed by a
//               Gaussian of one cell width (sweep only). The sign follows the
//               smoothed indicator, so it may differ from membership right at
//               the boundary.
enum class DistanceConvention { CellCenter, HalfCell, Subcell };

struct SignedDistance {
    ScalarField field;
    Anisotropy gauge;  // the metric used, i.e. psi°
    DistanceConvention convention = DistanceConvention::CellCenter;
};

// d(x) = inf_{y in E} g(x - y) - inf_{y not in E} g(y - x) over cell centers,
// with the infima restricted to boundary cells of E and of its complement.
SignedDistance signed_distance_bruteforce(const IndicatorField& e, const Anisotropy& metric,
                                          DistanceConvention conv = DistanceConvention::CellCenter);

// Dijkstra on the 16-neighbour (2D) / 26-neighbour (3D) lattice graph with
// edge weight g(step). Graph paths overestimate straight distances slightly.
// With a finite `cutoff` the search stops there and farther cells get
// +-cutoff.
SignedDistance signed_distance_sweep(const IndicatorField& e, const Anisotropy& metric,
                                     DistanceConvention conv = DistanceConvention::CellCenter,
                                     double cutoff = std::numeric_limits<double>::infinity());

// Shift used by the HalfCell convention: half the smallest g(+-step) over the
// neighbourhood steps.
double half_cell_shift(const GridDomain& dom, const Anisotropy& metric);

// |psi(grad_forward d) - 1| at cells further than two spacings from the zero
// level; 0 elsewhere.
ScalarField eikonal_residual(const SignedDistance& d, const Anisotropy& psi);

}  // namespace atw

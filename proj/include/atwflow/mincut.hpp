#pragma once

#include "atwflow/grid.hpp"
#include "atwflow/stencil.hpp"

namespace atw {

struct CutResult {
    IndicatorField set;
    double cut = 0;   // P_S(F) + (1/h) sum_F d cellvol, up to the constant of held cells
    double flow = 0;  // max-flow value; equals cut at optimality
    std::size_t free_cells = 0;
    double band = 0;  // band half-width finally used
};

// Minimizes P_S(F) + (1/h) int_F d exactly by an s-t minimum cut. Cells with
// |d| > band, and the frame, are held at their sign ({d <= 0} is inside);
// the band doubles until the minimizer stays clear of held cells. The largest
// minimizer is returned, or the smallest one when `smallest` is set.
CutResult min_cut_set(const ScalarField& d, double h, const TvStencil& st, double band, bool smallest = false);

}  // namespace atw

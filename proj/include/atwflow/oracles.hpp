#pragma once

#include "atwflow/grid.hpp"
#include "atwflow/io.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace atw {

// Closed-form evolutions, evaluated exactly (never on a grid).

using Polygon = std::vector<std::array<double, 2>>;  // counter-clockwise, not closed

double polygon_area(const Polygon& p);
bool point_in_polygon(const Polygon& p, double x, double y);  // closed polygon

// Crystalline flow of the cross E_L = ([-1,1]x[-L,L]) u ([-L,L]x[-1,1]), phi = psi = l1:
//   t <= L-1:            E_{L-t}
//   L-1 < t <= L-1/2:    square of half-side sqrt(1 - 2(t-(L-1)))
//   later:               empty
Polygon cross_polygon(double L);
Polygon cross_set(double t, double L = 2);
double cross_extinction(double L = 2);
// sup{t : x in cross_set(t)}, 0 outside E_L.
double cross_arrival(double x, double y, double L = 2);
double cross_volume(double t, double L = 2);

// The calibration field on E_L: identity in [-1,1]^2, component clamped to
// +-1 in the arms, and its divergence 1 + chi_[-1,1]^2.
struct Calibration {
    std::array<double, 2> z{0, 0};
    double div = 0;
};
Calibration cross_calibration(double x, double y, double L = 2);

struct CalibrationReport {
    int samples = 0;
    double max_dual = 0;         // max dual_eval(z) over the samples
    double max_div_error = 0;    // |div z - (1 + chi)| with div z by difference quotients
    double max_formula_error = 0;  // |analytic div - (1 + chi)|
    bool pass = false;
};
// Samples uniformly in E_L with a fixed seed; psi is the mobility (l1 for the
// cross example), z must lie in {psi° <= 1}.
CalibrationReport calibration_check(int n_samples, std::uint64_t seed, double L = 2);

// Radius sqrt(R0^2 - 2(dim-1)t)^+ of the Euclidean shrinking ball.
double shrinking_ball(double R0, double t, int dim = 2);
double shrinking_ball_extinction(double R0, int dim = 2);

// Square of half-side a0 under phi = psi = l1 shrinks like sqrt(a0^2 - 2t).
double shrinking_square_l1(double a0, double t);

// u(x) = sum_n (r_n^2 - |x - x_n|^2)^+ / 2. Throws if disks overlap.
double disk_family_arrival(const std::array<double, 2>& x, const std::vector<std::array<double, 2>>& centers,
                           const std::vector<double>& radii);

struct DiskFamily {
    std::vector<std::array<double, 2>> centers;
    std::vector<double> radii;  // 0 for skipped points
    double delta = 0;           // each partial union satisfies (MC_delta) in B(0,1)
    double C = 0;
};
// Greedy finite realization in Omega = B(0,1): centers from a scrambled
// low-discrepancy sequence on a 1/1024 lattice, radii at 0.99 of the largest
// value allowed by the radius bound, and the 2^{-n} cap.
DiskFamily disk_family_generate(int n_disks, std::uint64_t seed);
// The bound itself: min(1/2 (1/n - 1/(n+1)) delta d_n^2 / (2 pi C), d_n / 6).
double disk_family_radius_bound(int n, double d_n, double delta, double C);

// Hausdorff distance between two cell sets on the same grid, in length units
// (distance between cell centers). 0 for two empty sets, +inf if one is empty.
double hausdorff(const IndicatorField& a, const IndicatorField& b);
// Raster of a polygon on a grid: cell is a member iff its center is inside.
IndicatorField rasterize(const Polygon& p, const GridDomain& dom);

}  // namespace atw

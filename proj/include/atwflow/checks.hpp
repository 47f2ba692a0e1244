#pragma once

#include "atwflow/flow.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace atw {

struct CheckReport {
    std::string name;
    bool pass = true;
    double worst = 0;  // smallest margin found (negative means a violation beyond tolerance)
    double tolerance = 0;
    int samples = 0;
    std::vector<std::pair<std::string, double>> values;
    std::string note;
};

// (MC_delta): P(E n F) <= P(F) - delta |F \ E| on sampled competitors F
// (dilations of e, e with random balls added, random bumps, balls crossing
// the boundary). Tolerance 4 spacing times the largest phi of a unit axis vector.
CheckReport check_mc_delta(const IndicatorField& e, const TvStencil& st, double delta, int n_samples,
                           std::uint64_t seed);

// Sum phi(-grad u) <= sum phi(-grad v) - delta int (v-u)^+ + tol over sampled
// v >= u: u plus smooth bumps, max(u, c chi_B), u + eps chi_{u>0}.
CheckReport check_superharmonic(const ArrivalTime& u, const TvStencil& st, int n_samples, std::uint64_t seed,
                                double delta = 0, double tol = 1e-6);

// u(x) - u(y) <= h + psi°(y - x)/delta + 2 spacing/delta over all neighbour
// pairs and n_pairs random pairs. psi_dual is the gauge psi°.
CheckReport check_lipschitz(const ArrivalTime& u, const Anisotropy& psi_dual, double delta, int n_pairs,
                            std::uint64_t seed);

// |E(s) \ E(t)| <= C sqrt(t - s) over step pairs whose first time lies in
// [t_lo, t_hi]; fits the exponent over dyadic gaps and requires >= min_exponent.
CheckReport check_holder_volume(const FlowTrace& trace, double t_lo = 0,
                                double t_hi = std::numeric_limits<double>::infinity(), double min_exponent = 0.45);

// T^{n+1} E0 subset of T^n E0; needs kept sets. Reports the number of offending cells.
CheckReport check_nesting(const FlowTrace& trace);

// P(step n+1) <= P(step n) (1 + rel_tol); with certificates also the strict
// decrease P(n+1) <= P(n) - delta_n (volume drop) + rel_tol P(n), reported as a value.
CheckReport check_perimeter_monotone(const FlowTrace& trace, double rel_tol = 1e-6);

// delta(n+1) >= delta(n) - tol with tol = rel_tol * (first certificate).
CheckReport check_delta_persistence(const FlowTrace& trace, double rel_tol = 1e-3);

// delta_n |F_n| <= P(F_n) + tol for every step carrying a certificate.
CheckReport check_isoperimetric(const FlowTrace& trace, double tol = 1e-9);

// gamma = min |B(x,r) n F| / r^d over boundary cells x of F and radii
// r in [2 spacing, max(2 spacing, r0 h)]; passes when gamma > 0.
CheckReport check_density(const IndicatorField& f, double h, double r0 = 4, int max_points = 200);

// Every member of next has d_e <= -delta h + 2 spacing.
CheckReport check_inclusion_step(const ScalarField& d_e, const IndicatorField& next, double delta, double h);

// d_later >= d_e + delta n h - 2 n spacing at every cell.
CheckReport check_distance_growth(const ScalarField& d_e, const ScalarField& d_later, int n, double delta, double h);

// Smallest certificate along the trace (steps n >= 1), NaN if none.
double trace_min_delta(const FlowTrace& trace);

}  // namespace atw

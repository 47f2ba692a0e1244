#include "atwflow/checks.hpp"
#include "atwflow/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace atw;

namespace {

GridDomain box2(double lo, double ext, int n) { return GridDomain::make({lo, lo}, {ext, ext}, {n, n}); }

ShapeSpec ball(double r, double cx = 0, double cy = 0)
{
    ShapeSpec s;
    s.kind = ShapeKind::Ball;
    s.center = {cx, cy};
    s.radius = r;
    return s;
}

struct DiskRun {
    GridDomain dom;
    TvStencil st;
    FlowTrace trace;
};

// Small Euclidean disk of radius 0.5, h = spacing = 1/64. The discrete
// extinction comes a few steps early at this resolution.
const DiskRun& disk_run()
{
    static const DiskRun r = [] {
        DiskRun d;
        d.dom = box2(-0.75, 1.5, 96);
        const Anisotropy eu = Anisotropy::euclidean(2);
        d.st = build_stencil(eu, d.dom);
        d.trace = run_flow(shape(ball(0.5), d.dom), 1.0 / 64, eu, eu, SolverConfig(), 1.0);
        return d;
    }();
    return r;
}

}  // namespace

TEST_CASE("empty initial set is extinct at step 0")
{
    const GridDomain d = box2(0, 1, 16);
    const FlowTrace t = run_flow(IndicatorField(d), 0.1, Anisotropy::euclidean(2), Anisotropy::euclidean(2),
                                 SolverConfig(), 1.0);
    REQUIRE(t.extinction_step);
    CHECK(*t.extinction_step == 0);
    CHECK(t.steps.size() == 1);
}

TEST_CASE("disk flow reaches extinction near r^2/2")
{
    const auto& r = disk_run();
    REQUIRE(r.trace.extinction_step);
    CHECK_FALSE(r.trace.aborted);
    const double T = *r.trace.extinction_step * r.trace.h;
    CHECK(std::abs(T - 0.125) <= 3 * r.trace.h);
    for (std::size_t n = 1; n < r.trace.steps.size(); ++n) CHECK(r.trace.steps[n].certified);
}

TEST_CASE("arrival time")
{
    const auto& r = disk_run();
    const ArrivalTime u = arrival_time(r.trace);
    const IndicatorField e0 = r.trace.steps[0].set;
    for (std::size_t i = 0; i < u.field.v.size(); ++i) {
        REQUIRE(u.field.v[i] >= 0);
        if (!e0.m[i]) REQUIRE(u.field.v[i] == 0);
        const double k = u.field.v[i] / u.h;
        REQUIRE(k == std::round(k));
    }
    // center value against r^2/2
    const std::size_t c = r.dom.index(48, 48);
    CHECK(std::abs(u.field.v[c] - 0.125) <= 3 * r.trace.h);

    FlowTrace partial = r.trace;
    partial.extinction_step.reset();
    CHECK_THROWS(arrival_time(partial));
}

TEST_CASE("BV energy and the coarea sum")
{
    const auto& r = disk_run();
    const ArrivalTime u = arrival_time(r.trace);
    const BvEnergy b = bv_energy(u, r.trace, r.st);
    CHECK(b.mismatch <= 1e-6);
    CHECK(b.total == doctest::Approx(2 * M_PI / 3 * 0.125).epsilon(0.2));

    ArrivalTime zero{ScalarField(r.dom), 0.1};
    CHECK(bv_energy(zero, r.st) == 0);

    ShapeSpec sq;
    sq.kind = ShapeKind::Rectangle;
    sq.lo = {-0.4, -0.4};
    sq.hi = {0.4, 0.4};
    const IndicatorField s = shape(sq, r.dom);
    ArrivalTime cu{ScalarField(r.dom), 0.1};
    for (std::size_t i = 0; i < s.m.size(); ++i) cu.field.v[i] = s.m[i] ? 0.3 : 0.0;
    CHECK(bv_energy(cu, r.st) == doctest::Approx(0.3 * perimeter_phi(s, r.st)));
}

TEST_CASE("trace invariants on the disk")
{
    const auto& r = disk_run();
    CHECK(check_nesting(r.trace).pass);
    CHECK(check_perimeter_monotone(r.trace).pass);
    CHECK(check_isoperimetric(r.trace).pass);
    CHECK(check_delta_persistence(r.trace).pass);
    const CheckReport h = check_holder_volume(r.trace);
    CHECK(h.pass);
    CHECK(h.worst >= 0.45);
    CHECK(check_density(r.trace.steps[2].set, r.trace.h).pass);
    const double dmin = trace_min_delta(r.trace);
    CHECK(dmin > 0);
    const Anisotropy eu = Anisotropy::euclidean(2);
    const ScalarField d0 = signed_distance_sweep(r.trace.steps[1].set, eu, DistanceConvention::HalfCell).field;
    CHECK(check_inclusion_step(d0, r.trace.steps[2].set, dmin, r.trace.h).pass);
    const ScalarField d4 = signed_distance_sweep(r.trace.steps[5].set, eu, DistanceConvention::HalfCell).field;
    CHECK(check_distance_growth(d0, d4, 4, dmin, r.trace.h).pass);
}

TEST_CASE("constant trace has a trivial Hoelder report")
{
    FlowTrace t;
    t.h = 0.1;
    t.dom = box2(0, 1, 8);
    for (int n = 0; n < 5; ++n) {
        FlowStep s;
        s.n = n;
        s.t = n * 0.1;
        s.set = IndicatorField(t.dom);
        t.steps.push_back(s);
    }
    CHECK(check_holder_volume(t).pass);
}

TEST_CASE("superharmonicity of the disk arrival time")
{
    const auto& r = disk_run();
    const ArrivalTime u = arrival_time(r.trace);
    const CheckReport eq = check_superharmonic(u, r.st, 1, 1);
    CHECK(eq.worst == doctest::Approx(0).scale(1));
    const CheckReport rep = check_superharmonic(u, r.st, 100, 5);
    CHECK(rep.pass);
    CHECK(rep.samples == 100);
    CHECK(check_superharmonic(u, r.st, 100, 6, trace_min_delta(r.trace)).pass);

    // u + eps chi_{E0} exceeds by about eps P(E0)
    ScalarField v = u.field;
    const double eps = 1e-3;
    for (std::size_t i = 0; i < v.v.size(); ++i)
        if (r.trace.steps[0].set.m[i]) v.v[i] += eps;
    ScalarField nv = v, nu = u.field;
    for (double& x : nv.v) x = -x;
    for (double& x : nu.v) x = -x;
    CHECK(total_variation(nv, r.st) - total_variation(nu, r.st) ==
          doctest::Approx(eps * r.trace.steps[0].perimeter).epsilon(0.05));
}

TEST_CASE("Lipschitz bound of the disk arrival time")
{
    const auto& r = disk_run();
    const ArrivalTime u = arrival_time(r.trace);
    const CheckReport rep = check_lipschitz(u, Anisotropy::euclidean(2), trace_min_delta(r.trace), 2000, 3);
    CHECK(rep.pass);
    CHECK_THROWS(check_lipschitz(u, Anisotropy::euclidean(2), 0, 10, 3));
}

TEST_CASE("outward minimality checks")
{
    const GridDomain d = box2(-2.5, 5, 160);
    const TvStencil eu = build_stencil(Anisotropy::euclidean(2), d);
    const IndicatorField b = shape(ball(1), d);
    CHECK(check_mc_delta(b, eu, 0.5, 60, 1).pass);
    const CheckReport self = check_mc_delta(b, eu, 0, 1, 1);
    CHECK(self.worst == doctest::Approx(0).scale(1));

    ShapeSpec plus;
    plus.kind = ShapeKind::Cross;
    plus.L = 2;
    const IndicatorField c = shape(plus, d);
    CHECK_FALSE(check_mc_delta(c, eu, 1.0, 200, 2).pass);
    const TvStencil l1 = build_stencil(Anisotropy::weighted_l1(Vec::Ones(2)), d, 1);
    CHECK(check_mc_delta(c, l1, 0, 200, 2).pass);
}

TEST_CASE("refinement study on a small disk")
{
    RefineSpec spec;
    spec.initial = [](const GridDomain& g) { return shape(ball(0.5), g); };
    spec.phi = spec.psi_dual = Anisotropy::euclidean(2);
    spec.cfg.set_solver = SetSolver::MinCut;
    spec.t_max = 1;
    spec.probes = {0.05};
    spec.oracle = [](double t, const GridDomain& g) { return shape(ball(shrinking_ball(0.5, t)), g); };
    const std::vector<double> hs = {1.0 / 32, 1.0 / 64};
    const RefineStudy s = refine_study(spec, hs, {box2(-0.75, 1.5, 48), box2(-0.75, 1.5, 96)});
    REQUIRE(s.rows.size() == 2);
    for (const auto& row : s.rows) {
        CHECK(row.extinction_time);
        CHECK(row.coarea_mismatch <= 1e-6);
        CHECK(row.hausdorff.size() == 1);
    }
    const RefineStudy again = refine_study(spec, hs, {box2(-0.75, 1.5, 48), box2(-0.75, 1.5, 96)});
    CHECK(again.rows[1].bv_energy == s.rows[1].bv_energy);
    CHECK_THROWS(refine_study(spec, {0.1, 0.2}, {box2(0, 1, 8), box2(0, 1, 8)}));
}

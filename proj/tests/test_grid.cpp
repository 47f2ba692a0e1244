#include "atwflow/io.hpp"
#include "atwflow/stencil.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

using namespace atw;

namespace {

GridDomain box2(double lo, double ext, int n) { return GridDomain::make({lo, lo}, {ext, ext}, {n, n}); }

Vec v2(double x, double y) { return (Vec(2) << x, y).finished(); }

ShapeSpec ball(double r, double cx = 0, double cy = 0)
{
    ShapeSpec s;
    s.kind = ShapeKind::Ball;
    s.center = {cx, cy};
    s.radius = r;
    return s;
}

ShapeSpec rect(double lo, double hi)
{
    ShapeSpec s;
    s.kind = ShapeKind::Rectangle;
    s.lo = {lo, lo};
    s.hi = {hi, hi};
    return s;
}

ShapeSpec cross(double L = 2)
{
    ShapeSpec s;
    s.kind = ShapeKind::Cross;
    s.L = L;
    return s;
}

}  // namespace

TEST_CASE("domain validation")
{
    CHECK_THROWS(GridDomain::make({0, 0}, {1, 1}, {3, 8}));
    CHECK_THROWS(GridDomain::make({0, 0}, {1, -1}, {8, 8}));
    CHECK_THROWS(GridDomain::make({0}, {1}, {8}));
    const GridDomain d = GridDomain::make({0, 0, 0}, {1, 2, 4}, {4, 8, 16});
    CHECK(d.dim == 3);
    CHECK(d.min_spacing() == doctest::Approx(0.25));
    CHECK(d.coords(d.index(1, 2, 3)) == std::array<int, 3>{1, 2, 3});
}

TEST_CASE("volume")
{
    const GridDomain d = box2(-2.5, 5, 640);  // spacing 1/128
    CHECK(volume(IndicatorField(d)) == 0);
    const IndicatorField c = shape(cross(), d);
    const double P = 16;
    CHECK(std::abs(volume(c) - 12) <= 4 * P * d.min_spacing());

    IndicatorField inner(d);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto q = d.coords(i);
        inner.m[i] = !d.in_frame(q[0], q[1], q[2]);
    }
    const double sp = d.min_spacing();
    CHECK(volume(inner) == doctest::Approx(25 - (25 - std::pow(5 - 4 * sp, 2))));
}

TEST_CASE("forward gradient and backward divergence")
{
    const GridDomain d = box2(0, 1, 16);
    ScalarField c(d, 3.0);
    for (double x : grad_forward(c).v) CHECK(x == 0);

    ScalarField ramp(d);
    for (std::size_t i = 0; i < d.size(); ++i) ramp.v[i] = d.center(i)[0];
    const VectorField g = grad_forward(ramp);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 15; ++i) {
            CHECK(g.at(d.index(i, j), 0) == doctest::Approx(1));
            CHECK(g.at(d.index(i, j), 1) == doctest::Approx(0));
        }

    std::mt19937_64 rng(1);
    std::normal_distribution<double> N;
    ScalarField f(d);
    VectorField p(d);
    for (double& x : f.v) x = N(rng);
    for (double& x : p.v) x = N(rng);
    const VectorField gf = grad_forward(f);
    const ScalarField dp = div_backward(p);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < gf.v.size(); ++i) lhs += gf.v[i] * p.v[i];
    for (std::size_t i = 0; i < f.v.size(); ++i) rhs += f.v[i] * dp.v[i];
    CHECK(lhs == doctest::Approx(-rhs).epsilon(1e-10));
    for (double x : div_backward(VectorField(d)).v) CHECK(x == 0);
}

TEST_CASE("anisotropic perimeter")
{
    const Anisotropy l1 = Anisotropy::weighted_l1(Vec::Ones(2));
    const GridDomain d = box2(-1.5, 3, 96);
    CHECK(perimeter_phi(shape(rect(-1, 1), d), l1) == doctest::Approx(8).epsilon(1e-12));
    const GridDomain dc = box2(-2.5, 5, 320);
    CHECK(std::abs(perimeter_phi(shape(cross(), dc), l1) - 16) <= 8 * dc.min_spacing());
    CHECK(perimeter_phi(IndicatorField(d), l1) == 0);

    // the Euclidean disk converges to 2 pi r
    const GridDomain db = box2(-1.25, 2.5, 256);
    CHECK(perimeter_phi(shape(ball(1), db), Anisotropy::euclidean(2)) == doctest::Approx(2 * M_PI).epsilon(0.02));
}

TEST_CASE("shapes")
{
    const GridDomain d = box2(-2.5, 5, 100);
    const IndicatorField c = shape(cross(), d);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Vec x = d.center(i);
        const bool in = (std::abs(x[0]) <= 1 && std::abs(x[1]) <= 2) || (std::abs(x[0]) <= 2 && std::abs(x[1]) <= 1);
        REQUIRE(c.m[i] == in);
    }
    CHECK(shape(ball(0), d).empty());
    ShapeSpec w;
    w.kind = ShapeKind::Wulff;
    w.center = {0, 0};
    w.radius = 1;
    w.phi = Anisotropy::weighted_l1(Vec::Ones(2));
    const IndicatorField sq = shape(w, d);
    for (std::size_t i = 0; i < d.size(); ++i) REQUIRE(sq.m[i] == (w.phi.dual_eval(d.center(i)) <= 1));
    CHECK_THROWS_AS(shape(ball(2.49), d), FrameViolation);
}

TEST_CASE("set algebra")
{
    const GridDomain d = box2(-1.25, 2.5, 64);
    const IndicatorField a = shape(ball(0.6, -0.2, 0), d), b = shape(ball(0.5, 0.3, 0.1), d);
    const IndicatorField u = set_union(a, b), n = set_intersection(a, b);
    CHECK(volume(u) + volume(n) == volume(a) + volume(b));
    const TvStencil st = build_stencil(Anisotropy::euclidean(2), d);
    CHECK(perimeter_phi(u, st) + perimeter_phi(n, st) <= perimeter_phi(a, st) + perimeter_phi(b, st) + 1e-8);
    CHECK(is_subset(n, a));
    CHECK(set_difference(a, u).empty());
    CHECK(shift(a, {3, 0, 0}).count() == a.count());
}

TEST_CASE("discrete coarea for piecewise constant fields")
{
    const GridDomain d = box2(-1.25, 2.5, 80);
    const TvStencil st = build_stencil(Anisotropy::p_norm(3, 2), d);
    const std::vector<double> radii = {0.9, 0.6, 0.3};
    const std::vector<double> levels = {0.5, 1.25, 2.0};
    ScalarField u(d);
    double expect = 0, prev = 0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const IndicatorField e = shape(ball(radii[k], 0.05, -0.02), d);
        for (std::size_t i = 0; i < d.size(); ++i)
            if (e.m[i]) u.v[i] = levels[k];
        expect += (levels[k] - prev) * perimeter_phi(e, st);
        prev = levels[k];
    }
    ScalarField neg = u;
    for (double& x : neg.v) x = -x;
    CHECK(total_variation(neg, st) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("contours")
{
    const GridDomain d = box2(0, 1, 10);
    IndicatorField one(d);
    one.m[d.index(5, 5)] = 1;
    const auto c = contour_extract(one);
    REQUIRE(c.size() == 1);
    CHECK(c[0].size() == 4);
    CHECK(contour_extract(IndicatorField(d)).empty());

    const GridDomain db = box2(-1.25, 2.5, 125);  // spacing r/50
    const auto cb = contour_extract(shape(ball(1), db));
    REQUIRE(cb.size() == 1);
    CHECK(polyline_length(cb[0]) == doctest::Approx(2 * M_PI).epsilon(0.1));
}

TEST_CASE("raster round trip")
{
    const GridDomain d = box2(-1, 2, 12);
    ScalarField f(d);
    for (std::size_t i = 0; i < d.size(); ++i) f.v[i] = std::sin(double(i));
    const std::string path = "raster_roundtrip.atwf";
    write_raster(path, to_raster(f));
    const Raster r = read_raster(path);
    CHECK(r.n[0] == 12);
    CHECK(r.spacing == doctest::Approx(d.spacing(0)));
    const ScalarField g = scalar_from_raster(r, d);
    CHECK(g.v == f.v);
    CHECK_THROWS(scalar_from_raster(r, box2(-1, 2, 13)));
    std::remove(path.c_str());
}

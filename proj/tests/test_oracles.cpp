#include "atwflow/checks.hpp"
#include "atwflow/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace atw;

TEST_CASE("cross set and volume")
{
    CHECK(cross_volume(0) == doctest::Approx(12));
    CHECK(cross_volume(0.5) == doctest::Approx(4 * 1.5 * 2 - 4));
    CHECK(cross_volume(1) == doctest::Approx(4));
    for (double t : {1.1, 1.25, 1.4}) CHECK(cross_volume(t) == doctest::Approx(4 * (1 - 2 * (t - 1))));
    CHECK(cross_set(2).empty());
    CHECK(cross_extinction() == 1.5);
    CHECK(point_in_polygon(cross_set(0), 0, 1.99));
    CHECK_FALSE(point_in_polygon(cross_set(0), 1.5, 1.5));
    CHECK(cross_volume(0, 3) == doctest::Approx(20));
}

TEST_CASE("cross arrival time")
{
    CHECK(cross_arrival(0, 0) == doctest::Approx(1.5));
    CHECK(cross_arrival(0, 1.5) == doctest::Approx(0.5));
    CHECK(cross_arrival(1.9, 1.9) == 0);
    CHECK(cross_arrival(0.5, 0.5) == doctest::Approx(1 + (1 - 0.25) / 2));

    // x belongs to cross_set(t) exactly when t < arrival(x)
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-2, 2), T(0, 1.5);
    for (int k = 0; k < 2000; ++k) {
        const double x = U(rng), y = U(rng), t = T(rng);
        const double a = cross_arrival(x, y);
        if (std::abs(a - t) < 1e-9) continue;
        REQUIRE(point_in_polygon(cross_set(t), x, y) == (t < a));
    }
}

TEST_CASE("calibration field of the cross")
{
    const Calibration c0 = cross_calibration(0.5, 0.5);
    CHECK(c0.z[0] == doctest::Approx(0.5));
    CHECK(c0.z[1] == doctest::Approx(0.5));
    CHECK(c0.div == doctest::Approx(2));
    const Calibration c1 = cross_calibration(0.5, 1.5);
    CHECK(c1.z[0] == doctest::Approx(0.5));
    CHECK(c1.z[1] == doctest::Approx(1));
    CHECK(c1.div == doctest::Approx(1));
    const Calibration c2 = cross_calibration(1.5, 0.5);
    CHECK(c2.z[0] == doctest::Approx(1));
    CHECK(c2.div == doctest::Approx(1));

    const CalibrationReport r = calibration_check(1000, 9);
    CHECK(r.pass);
    CHECK(r.samples == 1000);
    CHECK(r.max_dual <= 1 + 1e-12);
    CHECK(r.max_div_error <= 1e-6);
    CHECK(r.max_formula_error <= 1e-12);
}

TEST_CASE("shrinking balls and squares")
{
    CHECK(shrinking_ball(1, 0.375) == doctest::Approx(0.5));
    CHECK(shrinking_ball(1, 0.6) == 0);
    CHECK(shrinking_ball_extinction(1) == doctest::Approx(0.5));
    CHECK(shrinking_ball_extinction(1, 3) == doctest::Approx(0.25));
    CHECK(shrinking_square_l1(1, 0.375) == doctest::Approx(0.5));
}

TEST_CASE("disk family arrival")
{
    const std::vector<std::array<double, 2>> c = {{0, 0}, {0.6, 0}};
    const std::vector<double> r = {0.4, 0.1};
    CHECK(disk_family_arrival({0, 0}, c, r) == doctest::Approx(0.08));
    CHECK(disk_family_arrival({0.2, 0}, c, r) == doctest::Approx(3 * 0.16 / 8));
    CHECK(disk_family_arrival({0.6, 0}, c, r) == doctest::Approx(0.005));
    CHECK(disk_family_arrival({0.3, 0.3}, c, r) == 0);
    CHECK_THROWS(disk_family_arrival({0, 0}, {{0, 0}, {0.3, 0}}, {0.2, 0.2}));
}

TEST_CASE("generated disk family")
{
    const DiskFamily f = disk_family_generate(10, 5);
    REQUIRE(f.centers.size() == 10);
    for (std::size_t i = 0; i < f.centers.size(); ++i) {
        const double rho = std::hypot(f.centers[i][0], f.centers[i][1]);
        CHECK(rho + f.radii[i] <= 1);
        CHECK(f.radii[i] <= std::ldexp(1.0, -int(i)) + 1e-15);
    }
    CHECK_NOTHROW(disk_family_arrival({0, 0}, f.centers, f.radii));
    const DiskFamily g = disk_family_generate(10, 5);
    CHECK(g.radii == f.radii);

    // the union passes the outward minimality check with delta = f.delta
    const GridDomain d = GridDomain::make({-1.1, -1.1}, {2.2, 2.2}, {256, 256});
    ShapeSpec s;
    s.kind = ShapeKind::DiskUnion;
    for (std::size_t i = 0; i < f.centers.size(); ++i)
        if (f.radii[i] > 2 * d.min_spacing()) {
            s.centers.push_back({f.centers[i][0], f.centers[i][1]});
            s.radii.push_back(f.radii[i]);
        }
    const IndicatorField e = shape(s, d);
    CHECK(check_mc_delta(e, build_stencil(Anisotropy::euclidean(2), d), f.delta, 100, 3).pass);
}

TEST_CASE("hausdorff and rasterize")
{
    const GridDomain d = GridDomain::make({-3, -3}, {6, 6}, {120, 120});
    const IndicatorField a = rasterize(cross_set(0), d);
    CHECK(volume(a) == doctest::Approx(12).epsilon(0.02));
    CHECK(hausdorff(a, a) == 0);
    CHECK(hausdorff(IndicatorField(d), IndicatorField(d)) == 0);
    CHECK(std::isinf(hausdorff(a, IndicatorField(d))));
    const IndicatorField b = rasterize(cross_set(0.5), d);
    CHECK(hausdorff(a, b) == doctest::Approx(0.5).epsilon(0.05));
}

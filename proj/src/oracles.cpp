#include "atwflow/oracles.hpp"

#include "atwflow/anisotropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace atw {

double polygon_area(const Polygon& p)
{
    double a = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& u = p[i];
        const auto& v = p[(i + 1) % p.size()];
        a += u[0] * v[1] - v[0] * u[1];
    }
    return 0.5 * a;
}

bool point_in_polygon(const Polygon& p, double x, double y)
{
    bool in = false;
    for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
        const auto& a = p[i];
        const auto& b = p[j];
        // on an edge counts as inside
        const double cr = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
        if (std::abs(cr) < 1e-14 && x >= std::min(a[0], b[0]) - 1e-14 && x <= std::max(a[0], b[0]) + 1e-14 &&
            y >= std::min(a[1], b[1]) - 1e-14 && y <= std::max(a[1], b[1]) + 1e-14)
            return true;
        if ((a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0]) in = !in;
    }
    return in;
}

Polygon cross_polygon(double L)
{
    if (!(L >= 1)) throw std::invalid_argument("cross: L must be at least 1");
    return {{1, -L}, {1, -1}, {L, -1}, {L, 1}, {1, 1}, {1, L}, {-1, L}, {-1, 1}, {-L, 1}, {-L, -1}, {-1, -1}, {-1, -L}};
}

double cross_extinction(double L) { return L - 0.5; }

Polygon cross_set(double t, double L)
{
    if (t < 0) throw std::invalid_argument("cross_set: t must be nonnegative");
    if (t <= L - 1) return cross_polygon(L - t);
    if (t <= L - 0.5) {
        const double a = std::sqrt(std::max(0.0, 1 - 2 * (t - (L - 1))));
        if (a == 0) return {};
        return {{-a, -a}, {a, -a}, {a, a}, {-a, a}};
    }
    return {};
}

double cross_volume(double t, double L) { return std::abs(polygon_area(cross_set(t, L))); }

double cross_arrival(double x, double y, double L)
{
    const double ax = std::abs(x), ay = std::abs(y);
    const double s = std::max(ax, ay);
    if (s <= 1) return (L - 1) + 0.5 * (1 - s * s);
    if (ax <= 1 && ay <= L) return L - ay;
    if (ay <= 1 && ax <= L) return L - ax;
    return 0;
}

Calibration cross_calibration(double x, double y, double L)
{
    const double ax = std::abs(x), ay = std::abs(y);
    if (std::min(ax, ay) > 1 || std::max(ax, ay) > L) throw std::invalid_argument("calibration: point outside E_L");
    Calibration c;
    if (ax <= 1 && ay <= 1) {
        c.z = {x, y};
        c.div = 2;
    } else if (ax <= 1) {
        c.z = {x, y > 0 ? 1.0 : -1.0};
        c.div = 1;
    } else {
        c.z = {x > 0 ? 1.0 : -1.0, y};
        c.div = 1;
    }
    return c;
}

CalibrationReport calibration_check(int n_samples, std::uint64_t seed, double L)
{
    const Anisotropy psi = Anisotropy::weighted_l1(Vec::Ones(2));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-L, L);
    const double eta = 1e-6;
    CalibrationReport r;
    Vec z(2);
    while (r.samples < n_samples) {
        const double x = U(rng), y = U(rng);
        const double ax = std::abs(x), ay = std::abs(y);
        if (std::min(ax, ay) > 1) continue;
        // difference quotients must stay on one piece and inside E_L
        if (std::abs(ax - 1) < 4 * eta || std::abs(ay - 1) < 4 * eta || std::max(ax, ay) > L - 4 * eta) continue;
        const Calibration c = cross_calibration(x, y, L);
        const double expected = 1 + ((ax <= 1 && ay <= 1) ? 1.0 : 0.0);
        z << c.z[0], c.z[1];
        r.max_dual = std::max(r.max_dual, psi.dual_eval(z));
        r.max_formula_error = std::max(r.max_formula_error, std::abs(c.div - expected));
        const double dzx = cross_calibration(x + eta, y, L).z[0] - cross_calibration(x - eta, y, L).z[0];
        const double dzy = cross_calibration(x, y + eta, L).z[1] - cross_calibration(x, y - eta, L).z[1];
        r.max_div_error = std::max(r.max_div_error, std::abs((dzx + dzy) / (2 * eta) - expected));
        ++r.samples;
    }
    r.pass = r.max_dual <= 1 + 1e-12 && r.max_formula_error == 0 && r.max_div_error <= 1e-8;
    return r;
}

double shrinking_ball(double R0, double t, int dim)
{
    if (dim < 2) throw std::invalid_argument("shrinking_ball: dim must be at least 2");
    return std::sqrt(std::max(0.0, R0 * R0 - 2.0 * (dim - 1) * t));
}

double shrinking_ball_extinction(double R0, int dim) { return R0 * R0 / (2.0 * (dim - 1)); }

double shrinking_square_l1(double a0, double t) { return std::sqrt(std::max(0.0, a0 * a0 - 2 * t)); }

double disk_family_arrival(const std::array<double, 2>& x, const std::vector<std::array<double, 2>>& centers,
                           const std::vector<double>& radii)
{
    if (centers.size() != radii.size()) throw std::invalid_argument("disk family: size mismatch");
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            if (radii[i] <= 0 || radii[j] <= 0) continue;
            const double d = std::hypot(centers[i][0] - centers[j][0], centers[i][1] - centers[j][1]);
            if (d < radii[i] + radii[j]) throw std::invalid_argument("disk family: disks overlap");
        }
    double u = 0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double dx = x[0] - centers[i][0], dy = x[1] - centers[i][1];
        u += 0.5 * std::max(0.0, radii[i] * radii[i] - dx * dx - dy * dy);
    }
    return u;
}

double disk_family_radius_bound(int n, double d_n, double delta, double C)
{
    return std::min(0.5 * (1.0 / n - 1.0 / (n + 1)) * delta * d_n * d_n / (2 * M_PI * C), d_n / 6);
}

namespace {

double radical_inverse(std::uint64_t i, int base)
{
    double f = 1, r = 0;
    while (i > 0) {
        f /= base;
        r += f * double(i % base);
        i /= base;
    }
    return r;
}

}  // namespace

DiskFamily disk_family_generate(int n_disks, std::uint64_t seed)
{
    if (n_disks < 0) throw std::invalid_argument("disk family: negative count");
    DiskFamily f;
    // every ball in the unit disk satisfies (MC_{2 delta}) with this delta
    f.delta = 0.25;
    f.C = std::max(18 / (M_PI - 2), 3 * (2 * f.delta + 9) / 2);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0, 1);
    const double sx = U(rng), sy = U(rng);
    std::uint64_t k = 1;
    while (int(f.centers.size()) < n_disks) {
        double x = 2 * std::fmod(radical_inverse(k, 2) + sx, 1.0) - 1;
        double y = 2 * std::fmod(radical_inverse(k, 3) + sy, 1.0) - 1;
        ++k;
        x = std::round(x * 1024) / 1024;
        y = std::round(y * 1024) / 1024;
        const double rho = std::hypot(x, y);
        if (rho >= 1) continue;
        const int n = int(f.centers.size());  // this is x_{n+1}
        double r;
        if (n == 0) {
            r = 0.5 * (1 - rho);
        } else {
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < f.centers.size(); ++j)
                if (f.radii[j] > 0)
                    d = std::min(d, std::hypot(x - f.centers[j][0], y - f.centers[j][1]) - f.radii[j]);
            d = std::max(d, 0.0);
            r = d > 0 ? 0.99 * std::min({disk_family_radius_bound(n, d, f.delta, f.C), std::ldexp(1.0, -n),
                                         0.5 * (1 - rho)})
                      : 0.0;
        }
        f.centers.push_back({x, y});
        f.radii.push_back(r);
    }
    return f;
}

double hausdorff(const IndicatorField& a, const IndicatorField& b)
{
    if (!(a.dom == b.dom)) throw std::invalid_argument("hausdorff: grids differ");
    const bool ea = a.empty(), eb = b.empty();
    if (ea && eb) return 0;
    if (ea || eb) return std::numeric_limits<double>::infinity();
    const GridDomain& dom = a.dom;
    auto one_side = [&](const IndicatorField& p, const IndicatorField& q) {
        const IndicatorField qb = boundary_cells(q);
        std::vector<Vec> pts;
        for (std::size_t i = 0; i < dom.size(); ++i)
            if (qb.m[i]) pts.push_back(dom.center(i));
        double worst = 0;
        for (std::size_t i = 0; i < dom.size(); ++i) {
            if (!p.m[i] || q.m[i]) continue;
            const Vec x = dom.center(i);
            double best = std::numeric_limits<double>::infinity();
            for (const auto& y : pts) best = std::min(best, (x - y).squaredNorm());
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(one_side(a, b), one_side(b, a));
}

IndicatorField rasterize(const Polygon& p, const GridDomain& dom)
{
    if (dom.dim != 2) throw std::invalid_argument("rasterize: 2D grids only");
    IndicatorField e(dom);
    if (p.empty()) return e;
    for (std::size_t i = 0; i < dom.size(); ++i) {
        const Vec c = dom.center(i);
        e.m[i] = point_in_polygon(p, c[0], c[1]);
    }
    return e;
}

}  // namespace atw

#include "atwflow/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace atw {

namespace {

IndicatorField interior_mask(const GridDomain& dom)
{
    IndicatorField m(dom);
    for (std::size_t i = 0; i < dom.size(); ++i) {
        const auto c = dom.coords(i);
        m.m[i] = !dom.in_frame(c[0], c[1], c[2]);
    }
    return m;
}

// Cells whose center lies within radius of x, off the frame.
IndicatorField ball_cells(const GridDomain& dom, const Vec& x, double radius)
{
    IndicatorField b(dom);
    std::array<int, 3> lo{0, 0, 0}, hi{1, 1, 1};
    for (int a = 0; a < dom.dim; ++a) {
        const double s = dom.spacing(a);
        lo[a] = std::max(2, int(std::floor((x[a] - radius - dom.origin[a]) / s)));
        hi[a] = std::min(dom.cells[a] - 2, int(std::ceil((x[a] + radius - dom.origin[a]) / s)) + 1);
    }
    for (int k = lo[2]; k < hi[2]; ++k)
        for (int j = lo[1]; j < hi[1]; ++j)
            for (int i = lo[0]; i < hi[0]; ++i)
                if ((dom.center(i, j, k) - x).norm() <= radius) b.m[dom.index(i, j, k)] = 1;
    return b;
}

IndicatorField dilate(const IndicatorField& e, double radius)
{
    const GridDomain& dom = e.dom;
    IndicatorField out = e;
    const IndicatorField bd = boundary_cells(e);
    std::vector<std::array<int, 3>> offs;
    std::array<int, 3> r{0, 0, 0};
    for (int a = 0; a < dom.dim; ++a) r[a] = int(std::ceil(radius / dom.spacing(a)));
    for (int k = -r[2]; k <= r[2]; ++k)
        for (int j = -r[1]; j <= r[1]; ++j)
            for (int i = -r[0]; i <= r[0]; ++i) {
                const double dx = i * dom.spacing(0), dy = j * dom.spacing(1), dz = k * dom.spacing(2);
                if (dx * dx + dy * dy + (dom.dim == 3 ? dz * dz : 0.0) <= radius * radius) offs.push_back({i, j, k});
            }
    for (std::size_t p = 0; p < dom.size(); ++p) {
        if (!bd.m[p]) continue;
        const auto c = dom.coords(p);
        for (const auto& o : offs) {
            const int i = c[0] + o[0], j = c[1] + o[1], k = c[2] + o[2];
            if (dom.contains(i, j, k) && !dom.in_frame(i, j, k)) out.m[dom.index(i, j, k)] = 1;
        }
    }
    return out;
}

std::vector<std::size_t> cells_of(const IndicatorField& e)
{
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < e.m.size(); ++i)
        if (e.m[i]) v.push_back(i);
    return v;
}

double axis_phi_scale(const TvStencil& st, int dim)
{
    double s = 0;
    for (int a = 0; a < dim; ++a)
        for (double sg : {1.0, -1.0}) {
            Vec p = Vec::Zero(dim);
            p[a] = sg;
            s = std::max(s, stencil_eval(st, p));
        }
    return s;
}

double sum_positive_diff(const ScalarField& v, const ScalarField& u)
{
    double s = 0;
    for (std::size_t i = 0; i < v.v.size(); ++i) s += std::max(0.0, v.v[i] - u.v[i]);
    return s * v.dom.cell_volume();
}

double tv_neg(const ScalarField& u, const TvStencil& st)
{
    ScalarField n = u;
    for (double& x : n.v) x = -x;
    return total_variation(n, st);
}

}  // namespace

CheckReport check_mc_delta(const IndicatorField& e, const TvStencil& st, double delta, int n_samples,
                           std::uint64_t seed)
{
    CheckReport r;
    r.name = "mc_delta";
    const GridDomain& dom = e.dom;
    if (delta < 0) throw std::invalid_argument("check_mc_delta: delta must be nonnegative");
    r.tolerance = 4 * dom.min_spacing() * axis_phi_scale(st, dom.dim);
    r.worst = std::numeric_limits<double>::infinity();
    const double pe = perimeter_phi(e, st);
    const double cv = dom.cell_volume();
    auto test = [&](const IndicatorField& f) {
        const IndicatorField inter = set_intersection(e, f);
        const IndicatorField extra = set_difference(f, e);
        const double margin = perimeter_phi(f, st) - delta * extra.count() * cv - perimeter_phi(inter, st);
        r.worst = std::min(r.worst, margin);
        ++r.samples;
    };
    // F = E itself: margin 0
    test(e);
    if (e.empty()) {
        r.pass = true;
        r.note = "empty set";
        return r;
    }
    const IndicatorField interior = interior_mask(dom);
    const Box bb = bounding_box(e);
    double extent = 0;
    for (int a = 0; a < dom.dim; ++a) extent = std::max(extent, (bb.hi[a] - bb.lo[a]) * dom.spacing(a));
    const double dx = dom.min_spacing();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0, 1);
    // outer ring: non-members within three cells of e
    const IndicatorField ring = set_difference(set_intersection(dilate(e, 3 * dx), interior), e);
    const auto ring_cells = cells_of(ring);
    const auto bd_cells = cells_of(boundary_cells(e));
    auto pick = [&](const std::vector<std::size_t>& v) { return v[std::size_t(U(rng) * v.size()) % v.size()]; };

    for (int s = 0; s + 1 < n_samples; ++s) {
        const int kind = s % 4;
        IndicatorField f;
        if (kind == 0) {
            f = set_intersection(dilate(e, dx * (1 + 3 * U(rng))), interior);
        } else if (kind == 1 && !ring_cells.empty()) {
            const Vec c = dom.center(pick(ring_cells));
            f = set_union(e, ball_cells(dom, c, dx * 1.5 + U(rng) * 0.25 * extent));
        } else if (kind == 2 && !bd_cells.empty()) {
            // bump made of a few small balls around one boundary cell
            const Vec c = dom.center(pick(bd_cells));
            f = e;
            for (int b = 0; b < 3; ++b) {
                Vec off = Vec::Zero(dom.dim);
                for (int a = 0; a < dom.dim; ++a) off[a] = (U(rng) - 0.5) * 6 * dx;
                f = set_union(f, ball_cells(dom, c + off, dx * (1 + 3 * U(rng))));
            }
        } else {
            // a ball crossing the boundary, not containing e
            const Vec c = dom.center(pick(bd_cells));
            f = ball_cells(dom, c, dx * 2 + U(rng) * 0.5 * extent);
        }
        test(f);
    }
    r.pass = r.worst >= -r.tolerance;
    r.values.push_back({"delta", delta});
    r.values.push_back({"perimeter", pe});
    return r;
}

CheckReport check_superharmonic(const ArrivalTime& u, const TvStencil& st, int n_samples, std::uint64_t seed,
                                double delta, double tol)
{
    CheckReport r;
    r.name = delta > 0 ? "superharmonic_delta" : "superharmonic";
    r.tolerance = tol;
    r.worst = std::numeric_limits<double>::infinity();
    const GridDomain& dom = u.field.dom;
    const double ju = tv_neg(u.field, st);
    double umax = 0;
    for (double x : u.field.v) umax = std::max(umax, x);
    IndicatorField support(dom);
    for (std::size_t i = 0; i < dom.size(); ++i) support.m[i] = u.field.v[i] > 0;
    const auto sup_cells = cells_of(support);
    const IndicatorField interior = interior_mask(dom);
    const double dx = dom.min_spacing();
    const Box bb = bounding_box(support);
    double extent = 0;
    if (bb.valid())
        for (int a = 0; a < dom.dim; ++a) extent = std::max(extent, (bb.hi[a] - bb.lo[a]) * dom.spacing(a));
    if (umax <= 0) umax = 1;
    if (extent <= 0) extent = 10 * dx;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0, 1);
    auto test = [&](const ScalarField& v) {
        const double margin = tv_neg(v, st) - delta * sum_positive_diff(v, u.field) - ju;
        r.worst = std::min(r.worst, margin);
        ++r.samples;
    };
    auto random_center = [&]() {
        if (!sup_cells.empty() && U(rng) < 0.8) {
            Vec c = dom.center(sup_cells[std::size_t(U(rng) * sup_cells.size()) % sup_cells.size()]);
            for (int a = 0; a < dom.dim; ++a) c[a] += (U(rng) - 0.5) * 4 * dx;
            return c;
        }
        Vec c(dom.dim);
        for (int a = 0; a < dom.dim; ++a) c[a] = dom.origin[a] + dom.extent[a] * (0.2 + 0.6 * U(rng));
        return c;
    };

    test(u.field);  // v = u
    for (int s = 0; s + 1 < n_samples; ++s) {
        ScalarField v = u.field;
        const int kind = s % 3;
        if (kind == 0) {
            const Vec c = random_center();
            const double rho = dx * 2 + U(rng) * 0.3 * extent;
            const double eps = (0.01 + 0.2 * U(rng)) * umax;
            for (std::size_t i = 0; i < dom.size(); ++i) {
                if (!interior.m[i]) continue;
                const double q = (dom.center(i) - c).squaredNorm() / (rho * rho);
                if (q < 1) v.v[i] += eps * (1 - q) * (1 - q);
            }
        } else if (kind == 1) {
            const IndicatorField b = ball_cells(dom, random_center(), dx * 2 + U(rng) * 0.3 * extent);
            const double level = U(rng) * umax;
            for (std::size_t i = 0; i < dom.size(); ++i)
                if (b.m[i]) v.v[i] = std::max(v.v[i], level);
        } else {
            const double eps = (0.001 + 0.1 * U(rng)) * umax;
            for (std::size_t i = 0; i < dom.size(); ++i)
                if (support.m[i]) v.v[i] += eps;
        }
        test(v);
    }
    r.pass = r.worst >= -tol;
    r.values.push_back({"tv_u", ju});
    r.values.push_back({"delta", delta});
    return r;
}

CheckReport check_lipschitz(const ArrivalTime& u, const Anisotropy& psi_dual, double delta, int n_pairs,
                            std::uint64_t seed)
{
    if (!(delta > 0)) throw std::invalid_argument("check_lipschitz: delta must be positive");
    CheckReport r;
    r.name = "lipschitz";
    const GridDomain& dom = u.field.dom;
    r.tolerance = 2 * dom.min_spacing() / delta;
    r.worst = std::numeric_limits<double>::infinity();
    auto test = [&](std::size_t x, std::size_t y) {
        const double bound = u.h + psi_dual.eval(dom.center(y) - dom.center(x)) / delta;
        r.worst = std::min(r.worst, bound - (u.field.v[x] - u.field.v[y]));
        ++r.samples;
    };
    for (std::size_t p = 0; p < dom.size(); ++p) {
        const auto c = dom.coords(p);
        for (int k = -1; k <= 1; ++k)
            for (int j = -1; j <= 1; ++j)
                for (int i = -1; i <= 1; ++i) {
                    if ((i == 0 && j == 0 && k == 0) || (dom.dim == 2 && k != 0)) continue;
                    if (!dom.contains(c[0] + i, c[1] + j, c[2] + k)) continue;
                    test(p, dom.index(c[0] + i, c[1] + j, c[2] + k));
                }
    }
    std::vector<std::size_t> sup;
    for (std::size_t i = 0; i < dom.size(); ++i)
        if (u.field.v[i] > 0) sup.push_back(i);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> any(0, dom.size() - 1);
    for (int s = 0; s < n_pairs; ++s) {
        const std::size_t x = sup.empty() ? any(rng) : sup[any(rng) % sup.size()];
        const std::size_t y = (s % 2 || sup.empty()) ? any(rng) : sup[any(rng) % sup.size()];
        test(x, y);
    }
    r.pass = r.worst >= -r.tolerance;
    r.values.push_back({"delta", delta});
    return r;
}

CheckReport check_holder_volume(const FlowTrace& trace, double t_lo, double t_hi, double min_exponent)
{
    CheckReport r;
    r.name = "holder_volume";
    r.tolerance = min_exponent;
    const auto& st = trace.steps;
    const bool sets = !st.empty() && !st.front().set.m.empty();
    const double cv = trace.dom.cell_volume();
    auto diff = [&](std::size_t a, std::size_t b) {
        if (sets) return set_difference(st[a].set, st[b].set).count() * cv;
        return std::abs(st[a].volume - st[b].volume);
    };
    double C = 0;
    std::vector<double> lx, ly;
    for (std::size_t gap = 1; gap < st.size(); gap *= 2) {
        double sum = 0;
        int cnt = 0;
        for (std::size_t a = 0; a + gap < st.size(); ++a) {
            if (st[a].t < t_lo - 1e-12 || st[a].t > t_hi + 1e-12) continue;
            const double v = diff(a, a + gap);
            C = std::max(C, v / std::sqrt(gap * trace.h));
            sum += v;
            ++cnt;
            ++r.samples;
        }
        if (cnt > 0 && sum > 0) {
            lx.push_back(std::log(gap * trace.h));
            ly.push_back(std::log(sum / cnt));
        }
    }
    double slope = std::numeric_limits<double>::infinity();
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= lx.size();
        my /= ly.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        slope = sxy / sxx;
        r.worst = slope;
        r.pass = slope >= min_exponent;
    } else {
        r.worst = slope;
        r.pass = true;
        r.note = "fewer than two dyadic gaps with volume change";
    }
    r.values.push_back({"holder_constant", C});
    r.values.push_back({"exponent", slope});
    return r;
}

CheckReport check_nesting(const FlowTrace& trace)
{
    CheckReport r;
    r.name = "nesting";
    const auto& st = trace.steps;
    if (st.empty() || st.front().set.m.empty()) throw std::invalid_argument("check_nesting: trace has no sets");
    std::size_t bad = 0;
    for (std::size_t n = 1; n < st.size(); ++n) {
        bad += set_difference(st[n].set, st[n - 1].set).count();
        ++r.samples;
    }
    r.worst = -double(bad);
    r.pass = bad == 0;
    r.values.push_back({"offending_cells", double(bad)});
    return r;
}

CheckReport check_perimeter_monotone(const FlowTrace& trace, double rel_tol)
{
    CheckReport r;
    r.name = "perimeter_monotone";
    r.tolerance = rel_tol;
    r.worst = std::numeric_limits<double>::infinity();
    double strict = std::numeric_limits<double>::infinity();
    const auto& st = trace.steps;
    for (std::size_t n = 1; n < st.size(); ++n) {
        const double p0 = st[n - 1].perimeter, p1 = st[n].perimeter;
        const double margin = (p0 - p1) / std::max(p0, 1e-300);
        r.worst = std::min(r.worst, margin);
        const double d = st[n - 1].delta_cert;
        if (std::isfinite(d))
            strict = std::min(strict, (p0 - d * (st[n - 1].volume - st[n].volume) + rel_tol * p0 - p1) /
                                          std::max(p0, 1e-300));
        ++r.samples;
    }
    if (r.samples == 0) r.worst = 0;
    r.pass = r.worst >= -rel_tol;
    if (std::isfinite(strict)) r.values.push_back({"strict_decrease_margin", strict});
    return r;
}

CheckReport check_delta_persistence(const FlowTrace& trace, double rel_tol)
{
    CheckReport r;
    r.name = "delta_persistence";
    const auto& st = trace.steps;
    double first = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : st)
        if (s.n >= 1 && std::isfinite(s.delta_cert)) {
            first = s.delta_cert;
            break;
        }
    r.worst = std::numeric_limits<double>::infinity();
    if (!std::isfinite(first)) {
        r.note = "no certificates";
        r.pass = false;
        return r;
    }
    r.tolerance = rel_tol * std::abs(first);
    for (std::size_t n = 2; n < st.size(); ++n) {
        const double a = st[n - 1].delta_cert, b = st[n].delta_cert;
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        r.worst = std::min(r.worst, b - a);
        ++r.samples;
    }
    if (r.samples == 0) r.worst = 0;
    r.pass = r.worst >= -r.tolerance;
    r.values.push_back({"delta_first", first});
    return r;
}

CheckReport check_isoperimetric(const FlowTrace& trace, double tol)
{
    CheckReport r;
    r.name = "isoperimetric";
    r.tolerance = tol;
    r.worst = std::numeric_limits<double>::infinity();
    double cheeger = std::numeric_limits<double>::infinity();
    for (const auto& s : trace.steps) {
        if (!std::isfinite(s.delta_cert) || s.volume <= 0) continue;
        r.worst = std::min(r.worst, s.perimeter - s.delta_cert * s.volume);
        cheeger = std::min(cheeger, s.perimeter / s.volume);
        ++r.samples;
    }
    if (r.samples == 0) r.worst = 0;
    r.pass = r.worst >= -tol;
    if (std::isfinite(cheeger)) r.values.push_back({"min_perimeter_over_volume", cheeger});
    return r;
}

CheckReport check_density(const IndicatorField& f, double h, double r0, int max_points)
{
    CheckReport r;
    r.name = "density";
    const GridDomain& dom = f.dom;
    const auto bd = cells_of(boundary_cells(f));
    r.worst = std::numeric_limits<double>::infinity();
    if (bd.empty()) {
        r.note = "empty set";
        r.worst = 0;
        return r;
    }
    const double dx = dom.min_spacing();
    const double rmin = 2 * dx, rmax = std::max(rmin, r0 * h);
    std::vector<double> radii;
    for (double rad = rmin; rad <= rmax * (1 + 1e-12); rad *= 1.5) radii.push_back(rad);
    const std::size_t stride = std::max<std::size_t>(1, bd.size() / std::size_t(std::max(1, max_points)));
    for (std::size_t q = 0; q < bd.size(); q += stride) {
        const Vec x = dom.center(bd[q]);
        for (double rad : radii) {
            const IndicatorField b = ball_cells(dom, x, rad);
            const double vol = set_intersection(b, f).count() * dom.cell_volume();
            r.worst = std::min(r.worst, vol / std::pow(rad, dom.dim));
            ++r.samples;
        }
    }
    r.pass = r.worst > 0;
    r.values.push_back({"gamma", r.worst});
    return r;
}

CheckReport check_inclusion_step(const ScalarField& d_e, const IndicatorField& next, double delta, double h)
{
    CheckReport r;
    r.name = "quantitative_inclusion";
    const double bound = -delta * h + 2 * next.dom.min_spacing();
    r.tolerance = 0;
    r.worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < next.m.size(); ++i)
        if (next.m[i]) {
            r.worst = std::min(r.worst, bound - d_e.v[i]);
            ++r.samples;
        }
    if (r.samples == 0) r.worst = 0;
    r.pass = r.worst >= 0;
    return r;
}

CheckReport check_distance_growth(const ScalarField& d_e, const ScalarField& d_later, int n, double delta, double h)
{
    CheckReport r;
    r.name = "distance_growth";
    const double shift = delta * n * h - 2 * n * d_e.dom.min_spacing();
    r.worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d_e.v.size(); ++i) {
        r.worst = std::min(r.worst, d_later.v[i] - (d_e.v[i] + shift));
        ++r.samples;
    }
    r.pass = r.worst >= 0;
    return r;
}

double trace_min_delta(const FlowTrace& trace)
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : trace.steps)
        if (s.n >= 1 && std::isfinite(s.delta_cert)) m = std::min(m, s.delta_cert);
    return std::isfinite(m) ? m : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace atw

#include "atwflow/grid.hpp"

#include <algorithm>
#include <cmath>

namespace atw {

GridDomain GridDomain::make(const std::vector<double>& origin, const std::vector<double>& extent,
                            const std::vector<int>& cells)
{
    const std::size_t d = cells.size();
    if ((d != 2 && d != 3) || origin.size() != d || extent.size() != d)
        throw std::invalid_argument("domain: origin, extent and cells must all have 2 or 3 entries");
    GridDomain g;
    g.dim = static_cast<int>(d);
    g.cells = {1, 1, 1};
    g.origin = {0, 0, 0};
    g.extent = {1, 1, 1};
    for (std::size_t a = 0; a < d; ++a) {
        if (cells[a] < 4) throw std::invalid_argument("domain: need at least 4 cells per axis");
        if (!(extent[a] > 0)) throw std::invalid_argument("domain: extent must be positive");
        g.cells[a] = cells[a];
        g.origin[a] = origin[a];
        g.extent[a] = extent[a];
    }
    return g;
}

double GridDomain::min_spacing() const
{
    double s = spacing(0);
    for (int a = 1; a < dim; ++a) s = std::min(s, spacing(a));
    return s;
}

double GridDomain::cell_volume() const
{
    double v = 1;
    for (int a = 0; a < dim; ++a) v *= spacing(a);
    return v;
}

std::array<int, 3> GridDomain::coords(std::size_t idx) const
{
    std::array<int, 3> c{};
    c[0] = static_cast<int>(idx % cells[0]);
    idx /= cells[0];
    c[1] = static_cast<int>(idx % cells[1]);
    c[2] = static_cast<int>(idx / cells[1]);
    return c;
}

Vec GridDomain::center(int i, int j, int k) const
{
    Vec x(dim);
    const int ijk[3] = {i, j, k};
    for (int a = 0; a < dim; ++a) x[a] = origin[a] + (ijk[a] + 0.5) * spacing(a);
    return x;
}

Vec GridDomain::center(std::size_t idx) const
{
    auto c = coords(idx);
    return center(c[0], c[1], c[2]);
}

bool GridDomain::in_frame(int i, int j, int k) const
{
    const int ijk[3] = {i, j, k};
    for (int a = 0; a < dim; ++a)
        if (ijk[a] < 2 || ijk[a] >= cells[a] - 2) return true;
    return false;
}

bool GridDomain::operator==(const GridDomain& o) const
{
    return dim == o.dim && origin == o.origin && extent == o.extent && cells == o.cells;
}

std::size_t IndicatorField::count() const
{
    std::size_t n = 0;
    for (auto b : m) n += b;
    return n;
}

Vec VectorField::get(std::size_t cell) const
{
    Vec x(dom.dim);
    for (int c = 0; c < dom.dim; ++c) x[c] = at(cell, c);
    return x;
}

Box full_box(const GridDomain& dom)
{
    Box b;
    b.hi = dom.cells;
    return b;
}

Box bounding_box(const IndicatorField& e)
{
    Box b;
    b.lo = {1 << 30, 1 << 30, 1 << 30};
    b.hi = {-1, -1, -1};
    bool any = false;
    for (std::size_t i = 0; i < e.m.size(); ++i) {
        if (!e.m[i]) continue;
        any = true;
        auto c = e.dom.coords(i);
        for (int a = 0; a < 3; ++a) {
            b.lo[a] = std::min(b.lo[a], c[a]);
            b.hi[a] = std::max(b.hi[a], c[a] + 1);
        }
    }
    if (!any) return Box{};
    return b;
}

Box grow(const Box& b, int margin, const GridDomain& dom)
{
    Box r = b;
    for (int a = 0; a < dom.dim; ++a) {
        r.lo[a] = std::max(0, b.lo[a] - margin);
        r.hi[a] = std::min(dom.cells[a], b.hi[a] + margin);
    }
    return r;
}

bool touches_frame(const IndicatorField& e)
{
    for (std::size_t i = 0; i < e.m.size(); ++i) {
        if (!e.m[i]) continue;
        auto c = e.dom.coords(i);
        if (e.dom.in_frame(c[0], c[1], c[2])) return true;
    }
    return false;
}

void require_compact(const IndicatorField& e, const std::string& what)
{
    if (touches_frame(e))
        throw FrameViolation(what + " has member cells in the two outermost layers (frame violation)");
}

double volume(const IndicatorField& e) { return static_cast<double>(e.count()) * e.dom.cell_volume(); }

static void same_domain(const IndicatorField& a, const IndicatorField& b)
{
    if (!(a.dom == b.dom)) throw std::invalid_argument("indicator fields live on different domains");
}

IndicatorField set_union(const IndicatorField& a, const IndicatorField& b)
{
    same_domain(a, b);
    IndicatorField r(a.dom);
    for (std::size_t i = 0; i < r.m.size(); ++i) r.m[i] = a.m[i] | b.m[i];
    return r;
}

IndicatorField set_intersection(const IndicatorField& a, const IndicatorField& b)
{
    same_domain(a, b);
    IndicatorField r(a.dom);
    for (std::size_t i = 0; i < r.m.size(); ++i) r.m[i] = a.m[i] & b.m[i];
    return r;
}

IndicatorField set_difference(const IndicatorField& a, const IndicatorField& b)
{
    same_domain(a, b);
    IndicatorField r(a.dom);
    for (std::size_t i = 0; i < r.m.size(); ++i) r.m[i] = a.m[i] && !b.m[i];
    return r;
}

bool is_subset(const IndicatorField& a, const IndicatorField& b)
{
    same_domain(a, b);
    for (std::size_t i = 0; i < a.m.size(); ++i)
        if (a.m[i] && !b.m[i]) return false;
    return true;
}

IndicatorField shift(const IndicatorField& e, const std::array<int, 3>& by)
{
    IndicatorField r(e.dom);
    for (std::size_t i = 0; i < e.m.size(); ++i) {
        if (!e.m[i]) continue;
        auto c = e.dom.coords(i);
        int ni = c[0] + by[0], nj = c[1] + by[1], nk = c[2] + by[2];
        if (e.dom.contains(ni, nj, nk)) r.m[e.dom.index(ni, nj, nk)] = 1;
    }
    return r;
}

IndicatorField erode(const IndicatorField& e, int radius)
{
    const auto& d = e.dom;
    const int rz = d.dim == 3 ? radius : 0;
    IndicatorField r(d);
    for (std::size_t i = 0; i < e.m.size(); ++i) {
        if (!e.m[i]) continue;
        auto c = d.coords(i);
        bool keep = true;
        for (int dk = -rz; dk <= rz && keep; ++dk)
            for (int dj = -radius; dj <= radius && keep; ++dj)
                for (int di = -radius; di <= radius && keep; ++di) {
                    int a = c[0] + di, b = c[1] + dj, cc = c[2] + dk;
                    if (!d.contains(a, b, cc) || !e.m[d.index(a, b, cc)]) keep = false;
                }
        r.m[i] = keep;
    }
    return r;
}

IndicatorField boundary_cells(const IndicatorField& e)
{
    IndicatorField inner = erode(e, 1);
    return set_difference(e, inner);
}

VectorField grad_forward(const ScalarField& f)
{
    const auto& d = f.dom;
    VectorField g(d);
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto c = d.coords(i);
        for (int a = 0; a < d.dim; ++a) {
            if (c[a] + 1 >= d.cells[a]) continue;
            std::array<int, 3> off{0, 0, 0};
            off[a] = 1;
            g.at(i, a) = (f.v[i + d.stride(off)] - f.v[i]) / d.spacing(a);
        }
    }
    return g;
}

ScalarField div_backward(const VectorField& p)
{
    const auto& d = p.dom;
    ScalarField r(d);
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto c = d.coords(i);
        double s = 0;
        for (int a = 0; a < d.dim; ++a) {
            std::array<int, 3> off{0, 0, 0};
            off[a] = 1;
            const double h = d.spacing(a);
            if (c[a] + 1 < d.cells[a]) s += p.at(i, a) / h;
            if (c[a] > 0) s -= p.at(i - d.stride(off), a) / h;
        }
        r.v[i] = s;
    }
    return r;
}

namespace {

bool in_shape(const ShapeSpec& s, const Vec& x)
{
    const int dim = static_cast<int>(x.size());
    switch (s.kind) {
    case ShapeKind::Ball: {
        double r2 = 0;
        for (int a = 0; a < dim; ++a) r2 += (x[a] - s.center[a]) * (x[a] - s.center[a]);
        return s.radius > 0 && r2 <= s.radius * s.radius;
    }
    case ShapeKind::Rectangle:
        for (int a = 0; a < dim; ++a)
            if (x[a] < s.lo[a] || x[a] > s.hi[a]) return false;
        return true;
    case ShapeKind::Cross: {
        const double ax = std::abs(x[0]), ay = std::abs(x[1]);
        return (ax <= 1 && ay <= s.L) || (ax <= s.L && ay <= 1);
    }
    case ShapeKind::Wulff: {
        if (!(s.radius > 0)) return false;
        Vec y = x;
        for (int a = 0; a < dim; ++a) y[a] -= s.center[a];
        return s.phi.dual_eval(y) <= s.radius;
    }
    case ShapeKind::DiskUnion:
        for (std::size_t n = 0; n < s.radii.size(); ++n) {
            double r2 = 0;
            for (int a = 0; a < dim; ++a) r2 += (x[a] - s.centers[n][a]) * (x[a] - s.centers[n][a]);
            if (s.radii[n] > 0 && r2 <= s.radii[n] * s.radii[n]) return true;
        }
        return false;
    }
    return false;
}

void validate_shape(const ShapeSpec& s, int dim)
{
    auto need = [&](const std::vector<double>& v, const char* what) {
        if (static_cast<int>(v.size()) != dim)
            throw std::invalid_argument(std::string("shape: ") + what + " must have " + std::to_string(dim) + " entries");
    };
    switch (s.kind) {
    case ShapeKind::Ball:
        need(s.center, "center");
        if (s.radius < 0) throw std::invalid_argument("shape: radius must be nonnegative");
        break;
    case ShapeKind::Rectangle:
        need(s.lo, "min");
        need(s.hi, "max");
        break;
    case ShapeKind::Cross:
        if (dim != 2) throw std::invalid_argument("shape: cross is two-dimensional");
        if (!(s.L >= 1)) throw std::invalid_argument("shape: cross needs L >= 1");
        break;
    case ShapeKind::Wulff:
        need(s.center, "center");
        if (s.phi.dim() != dim) throw std::invalid_argument("shape: wulff anisotropy dimension mismatch");
        break;
    case ShapeKind::DiskUnion:
        if (s.centers.size() != s.radii.size()) throw std::invalid_argument("shape: one radius per center");
        for (const auto& c : s.centers) need(c, "centers[i]");
        break;
    }
}

}  // namespace

IndicatorField shape(const ShapeSpec& spec, const GridDomain& dom)
{
    validate_shape(spec, dom.dim);
    IndicatorField e(dom);
    for (std::size_t i = 0; i < dom.size(); ++i) e.m[i] = in_shape(spec, dom.center(i));
    require_compact(e, "shape");
    return e;
}

}  // namespace atw

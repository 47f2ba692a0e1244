#include "atwflow/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace atw {

namespace {

std::vector<std::array<int, 3>> neighbour_steps(int dim)
{
    std::vector<std::array<int, 3>> s;
    if (dim == 2) {
        for (int j = -2; j <= 2; ++j)
            for (int i = -2; i <= 2; ++i) {
                if (i == 0 && j == 0) continue;
                if (std::abs(i) == 2 && std::abs(j) != 1) continue;
                if (std::abs(j) == 2 && std::abs(i) != 1) continue;
                s.push_back({i, j, 0});
            }
    } else {
        for (int k = -1; k <= 1; ++k)
            for (int j = -1; j <= 1; ++j)
                for (int i = -1; i <= 1; ++i)
                    if (i || j || k) s.push_back({i, j, k});
    }
    return s;
}

Vec step_vec(const std::array<int, 3>& s, const GridDomain& dom)
{
    Vec v(dom.dim);
    for (int a = 0; a < dom.dim; ++a) v[a] = s[a] * dom.spacing(a);
    return v;
}

void require_nontrivial(const IndicatorField& e)
{
    const std::size_t n = e.count();
    if (n == 0) throw std::invalid_argument("signed distance: empty set");
    if (n == e.m.size()) throw std::invalid_argument("signed distance: full set");
}

void apply_convention(SignedDistance& sd, const IndicatorField& e)
{
    if (sd.convention != DistanceConvention::HalfCell) return;
    const double s = half_cell_shift(e.dom, sd.gauge);
    for (std::size_t i = 0; i < e.m.size(); ++i) sd.field.v[i] += e.m[i] ? s : -s;
}

// Multi-source Dijkstra. Sources are cells with src[i] set; costs relax
// from p to q = p + dir*step with weight w(step).
std::vector<double> dijkstra(const GridDomain& dom, const std::vector<std::uint8_t>& src,
                             const std::vector<std::uint8_t>& target, const std::vector<std::array<int, 3>>& steps,
                             const std::vector<double>& w, int dir, double cutoff)
{
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(dom.size(), inf);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (std::size_t i = 0; i < dom.size(); ++i)
        if (src[i]) {
            dist[i] = 0;
            pq.push({0.0, i});
        }
    while (!pq.empty()) {
        auto [dcur, p] = pq.top();
        pq.pop();
        if (dcur > dist[p]) continue;
        if (dcur > cutoff) break;
        auto c = dom.coords(p);
        for (std::size_t s = 0; s < steps.size(); ++s) {
            int i = c[0] + dir * steps[s][0], j = c[1] + dir * steps[s][1], k = c[2] + dir * steps[s][2];
            if (!dom.contains(i, j, k)) continue;
            std::size_t q = dom.index(i, j, k);
            if (!target[q]) continue;
            double nd = dcur + w[s];
            if (nd < dist[q]) {
                dist[q] = nd;
                pq.push({nd, q});
            }
        }
    }
    return dist;
}

// Interface pieces of the smoothed indicator: segments in 2D, points in 3D.
struct Feature {
    std::array<double, 3> p{0, 0, 0}, q{0, 0, 0};
    bool segment = false;
};

std::vector<double> smooth_indicator(const IndicatorField& e)
{
    const auto& dom = e.dom;
    constexpr int R = 4;  // sigma is one cell
    std::array<double, 2 * R + 1> k{};
    double sum = 0;
    for (int i = -R; i <= R; ++i) sum += k[i + R] = std::exp(-0.5 * i * i);
    for (double& v : k) v /= sum;
    std::vector<double> a(e.m.begin(), e.m.end()), b(a.size());
    for (int axis = 0; axis < dom.dim; ++axis) {
        std::array<int, 3> off{0, 0, 0};
        off[axis] = 1;
        const std::ptrdiff_t st = dom.stride(off);
        for (std::size_t i = 0; i < dom.size(); ++i) {
            const int c = dom.coords(i)[axis];
            double acc = 0;
            for (int t = std::max(-R, -c); t <= R && c + t < dom.cells[axis]; ++t) acc += k[t + R] * a[i + t * st];
            b[i] = acc;
        }
        std::swap(a, b);
    }
    return a;
}

class Features {
public:
    Features(const IndicatorField& e, const Anisotropy& metric) : dom_(e.dom), metric_(metric), x_(e.dom.dim)
    {
        s_ = smooth_indicator(e);
        fast_ = metric.kind() == Anisotropy::Kind::Euclidean;
        if (dom_.dim == 2) build_segments();
        else build_points();
    }

    bool inside(std::size_t cell) const { return s_[cell] > 0.5; }
    const std::vector<Feature>& list() const { return f_; }
    // cells next to each feature, in feature order
    const std::vector<std::vector<std::size_t>>& seeds() const { return seeds_; }

    // g(x - y) outside, g(y - x) inside, minimized over y in the feature.
    double distance(std::size_t cell, int feature)
    {
        const Feature& f = f_[feature];
        const Vec c = dom_.center(cell);
        const double sgn = inside(cell) ? -1 : 1;
        auto at = [&](double t) {
            for (int a = 0; a < dom_.dim; ++a) x_[a] = sgn * (c[a] - (f.p[a] + t * (f.q[a] - f.p[a])));
            return metric_.eval(x_);
        };
        if (!f.segment) return at(0);
        if (fast_) {
            double num = 0, den = 0;
            for (int a = 0; a < dom_.dim; ++a) {
                num += (c[a] - f.p[a]) * (f.q[a] - f.p[a]);
                den += (f.q[a] - f.p[a]) * (f.q[a] - f.p[a]);
            }
            return at(den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0);
        }
        // golden section on a convex function of t
        const double r = 0.5 * (std::sqrt(5.0) - 1);
        double lo = 0, hi = 1;
        double t1 = hi - r * (hi - lo), t2 = lo + r * (hi - lo);
        double f1 = at(t1), f2 = at(t2);
        for (int it = 0; it < 40; ++it) {
            if (f1 <= f2) {
                hi = t2;
                t2 = t1;
                f2 = f1;
                t1 = hi - r * (hi - lo);
                f1 = at(t1);
            } else {
                lo = t1;
                t1 = t2;
                f1 = f2;
                t2 = lo + r * (hi - lo);
                f2 = at(t2);
            }
        }
        return std::min({f1, f2, at(0), at(1)});
    }

private:
    std::array<double, 3> crossing(std::size_t a, std::size_t b) const
    {
        const double t = (0.5 - s_[a]) / (s_[b] - s_[a]);
        const Vec ca = dom_.center(a), cb = dom_.center(b);
        std::array<double, 3> p{0, 0, 0};
        for (int k = 0; k < dom_.dim; ++k) p[k] = ca[k] + t * (cb[k] - ca[k]);
        return p;
    }

    void build_segments()
    {
        for (int j = 0; j + 1 < dom_.cells[1]; ++j)
            for (int i = 0; i + 1 < dom_.cells[0]; ++i) {
                // corners counter-clockwise, edge k joins corner k and k+1
                const std::array<std::size_t, 4> c{dom_.index(i, j), dom_.index(i + 1, j), dom_.index(i + 1, j + 1),
                                                   dom_.index(i, j + 1)};
                std::array<bool, 4> in{};
                int n_in = 0;
                for (int k = 0; k < 4; ++k) n_in += in[k] = inside(c[k]);
                if (n_in == 0 || n_in == 4) continue;
                std::array<std::array<double, 3>, 4> pt{};
                std::vector<int> cut;
                for (int k = 0; k < 4; ++k)
                    if (in[k] != in[(k + 1) % 4]) {
                        pt[k] = crossing(c[k], c[(k + 1) % 4]);
                        cut.push_back(k);
                    }
                auto add = [&](int e0, int e1) {
                    f_.push_back(Feature{pt[e0], pt[e1], true});
                    seeds_.push_back({c[0], c[1], c[2], c[3]});
                };
                if (cut.size() == 2) {
                    add(cut[0], cut[1]);
                } else {
                    const bool centre = 0.25 * (s_[c[0]] + s_[c[1]] + s_[c[2]] + s_[c[3]]) > 0.5;
                    // cut off the corners whose state differs from the block centre
                    if (in[0] != centre) {
                        add(3, 0);
                        add(1, 2);
                    } else {
                        add(0, 1);
                        add(2, 3);
                    }
                }
            }
    }

    void build_points()
    {
        for (std::size_t i = 0; i < dom_.size(); ++i) {
            const auto c = dom_.coords(i);
            for (int a = 0; a < 3; ++a) {
                std::array<int, 3> n = c;
                ++n[a];
                if (!dom_.contains(n[0], n[1], n[2])) continue;
                const std::size_t q = dom_.index(n[0], n[1], n[2]);
                if (inside(i) == inside(q)) continue;
                const auto p = crossing(i, q);
                f_.push_back(Feature{p, p, false});
                seeds_.push_back({i, q});
            }
        }
    }

    const GridDomain& dom_;
    const Anisotropy& metric_;
    std::vector<double> s_;
    std::vector<Feature> f_;
    std::vector<std::vector<std::size_t>> seeds_;
    bool fast_ = false;
    Vec x_;
};

SignedDistance subcell_bruteforce(const IndicatorField& e, const Anisotropy& metric)
{
    Features feats(e, metric);
    SignedDistance sd{ScalarField(e.dom), metric, DistanceConvention::Subcell};
    if (feats.list().empty()) return signed_distance_bruteforce(e, metric, DistanceConvention::HalfCell);
    for (std::size_t i = 0; i < e.dom.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int f = 0; f < int(feats.list().size()); ++f) best = std::min(best, feats.distance(i, f));
        sd.field.v[i] = feats.inside(i) ? -best : best;
    }
    return sd;
}

// Nearest-feature propagation: every cell inherits candidate features from
// settled neighbours and keeps the closest one.
SignedDistance subcell_sweep(const IndicatorField& e, const Anisotropy& metric, double cutoff)
{
    const auto& dom = e.dom;
    Features feats(e, metric);
    if (feats.list().empty()) return signed_distance_sweep(e, metric, DistanceConvention::HalfCell, cutoff);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(dom.size(), inf);
    std::vector<int> owner(dom.size(), -1);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (int f = 0; f < int(feats.list().size()); ++f)
        for (std::size_t c : feats.seeds()[f]) {
            const double v = feats.distance(c, f);
            if (v < dist[c]) {
                dist[c] = v;
                owner[c] = f;
            }
        }
    for (std::size_t i = 0; i < dom.size(); ++i)
        if (owner[i] >= 0) pq.push({dist[i], i});
    const auto steps = neighbour_steps(dom.dim);
    while (!pq.empty()) {
        auto [dcur, p] = pq.top();
        pq.pop();
        if (dcur > dist[p]) continue;
        if (dcur > cutoff) break;
        const auto c = dom.coords(p);
        for (const auto& s : steps) {
            const int i = c[0] + s[0], j = c[1] + s[1], k = c[2] + s[2];
            if (!dom.contains(i, j, k)) continue;
            const std::size_t q = dom.index(i, j, k);
            if (owner[q] == owner[p]) continue;
            const double v = feats.distance(q, owner[p]);
            if (v < dist[q]) {
                dist[q] = v;
                owner[q] = owner[p];
                pq.push({v, q});
            }
        }
    }
    SignedDistance sd{ScalarField(dom), metric, DistanceConvention::Subcell};
    for (std::size_t i = 0; i < dom.size(); ++i) {
        const double v = std::min(dist[i], cutoff);
        sd.field.v[i] = feats.inside(i) ? -v : v;
    }
    return sd;
}

}  // namespace

double half_cell_shift(const GridDomain& dom, const Anisotropy& metric)
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : neighbour_steps(dom.dim)) m = std::min(m, metric.eval(step_vec(s, dom)));
    return 0.5 * m;
}

SignedDistance signed_distance_bruteforce(const IndicatorField& e, const Anisotropy& metric, DistanceConvention conv)
{
    require_nontrivial(e);
    const auto& dom = e.dom;
    if (metric.dim() != dom.dim) throw std::invalid_argument("signed distance: metric dimension mismatch");
    if (conv == DistanceConvention::Subcell) return subcell_bruteforce(e, metric);
    IndicatorField inner_b = boundary_cells(e);
    IndicatorField comp(dom);
    for (std::size_t i = 0; i < comp.m.size(); ++i) comp.m[i] = !e.m[i];
    IndicatorField outer_b = boundary_cells(comp);
    std::vector<Vec> in_pts, out_pts;
    for (std::size_t i = 0; i < dom.size(); ++i) {
        if (inner_b.m[i]) in_pts.push_back(dom.center(i));
        if (outer_b.m[i]) out_pts.push_back(dom.center(i));
    }
    SignedDistance sd{ScalarField(dom), metric, conv};
    for (std::size_t i = 0; i < dom.size(); ++i) {
        const Vec x = dom.center(i);
        double best = std::numeric_limits<double>::infinity();
        if (!e.m[i]) {
            for (const auto& y : in_pts) best = std::min(best, metric.eval(x - y));
            sd.field.v[i] = best;
        } else {
            for (const auto& y : out_pts) best = std::min(best, metric.eval(y - x));
            sd.field.v[i] = -best;
        }
    }
    apply_convention(sd, e);
    return sd;
}

SignedDistance signed_distance_sweep(const IndicatorField& e, const Anisotropy& metric, DistanceConvention conv,
                                     double cutoff)
{
    require_nontrivial(e);
    const auto& dom = e.dom;
    if (metric.dim() != dom.dim) throw std::invalid_argument("signed distance: metric dimension mismatch");
    if (conv == DistanceConvention::Subcell) return subcell_sweep(e, metric, cutoff);
    const auto steps = neighbour_steps(dom.dim);
    std::vector<double> w;
    for (const auto& s : steps) w.push_back(metric.eval(step_vec(s, dom)));

    std::vector<std::uint8_t> in_src(dom.size(), 0), out_src(dom.size(), 0), not_e(dom.size(), 0);
    IndicatorField inner_b = boundary_cells(e);
    IndicatorField comp(dom);
    for (std::size_t i = 0; i < comp.m.size(); ++i) comp.m[i] = not_e[i] = !e.m[i];
    IndicatorField outer_b = boundary_cells(comp);

    // Outside: path from a member y to x accumulates x - y, steps taken forward.
    auto dout = dijkstra(dom, inner_b.m, not_e, steps, w, +1, cutoff);
    // Inside: the path from x to an outside y accumulates y - x; searching
    // backwards from y means stepping by -s with cost g(s).
    auto din = dijkstra(dom, outer_b.m, e.m, steps, w, -1, cutoff);

    SignedDistance sd{ScalarField(dom), metric, conv};
    for (std::size_t i = 0; i < dom.size(); ++i) {
        sd.field.v[i] = e.m[i] ? -std::min(din[i], cutoff) : std::min(dout[i], cutoff);
    }
    apply_convention(sd, e);
    return sd;
}

ScalarField eikonal_residual(const SignedDistance& d, const Anisotropy& psi)
{
    const auto& dom = d.field.dom;
    VectorField g = grad_forward(d.field);
    ScalarField r(dom);
    const double band = 2 * std::sqrt(double(dom.dim)) * dom.min_spacing();
    for (std::size_t i = 0; i < dom.size(); ++i) {
        auto c = dom.coords(i);
        bool interior = true;
        for (int a = 0; a < dom.dim; ++a)
            if (c[a] + 1 >= dom.cells[a]) interior = false;
        if (!interior || std::abs(d.field.v[i]) <= band) continue;
        // the forward stencil must not straddle the zero level
        bool same_side = true;
        for (int a = 0; a < dom.dim; ++a) {
            std::array<int, 3> off{0, 0, 0};
            off[a] = 1;
            if ((d.field.v[i + dom.stride(off)] > 0) != (d.field.v[i] > 0)) same_side = false;
        }
        if (!same_side) continue;
        r.v[i] = std::abs(psi.eval(g.get(i)) - 1);
    }
    return r;
}

}  // namespace atw

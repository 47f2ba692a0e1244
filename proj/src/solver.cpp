#include "atwflow/solver.hpp"

#include "atwflow/mincut.hpp"
#include "atwflow/tv1d.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace atw {

namespace {

struct Chain {
    std::size_t start;   // local index of the first cell
    int length;
    std::ptrdiff_t pre;  // global index of the fixed cell before the chain, -1 if off-grid
    std::ptrdiff_t post; // same after the chain
};

// Lattice lines of one direction inside the local box.
struct Direction {
    std::ptrdiff_t stride = 0;
    double a = 0, b = 0;
    std::vector<Chain> chains;
    std::vector<double> y_pre;  // dual of the edge entering each chain
    int longest = 0;
};

struct LocalGrid {
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> n{1, 1, 1};
    std::size_t size() const { return std::size_t(n[0]) * n[1] * n[2]; }
    bool contains(int i, int j, int k) const
    {
        return i >= 0 && j >= 0 && k >= 0 && i < n[0] && j < n[1] && k < n[2];
    }
    std::size_t index(int i, int j, int k) const { return (std::size_t(k) * n[1] + j) * n[0] + i; }
};

Direction make_direction(const LocalGrid& g, const GridDomain& dom, const StencilEdge& e)
{
    Direction d;
    d.stride = (std::ptrdiff_t(e.off[2]) * g.n[1] + e.off[1]) * g.n[0] + e.off[0];
    d.a = e.a;
    d.b = e.b;
    auto global = [&](int i, int j, int k) -> std::ptrdiff_t {
        i += g.lo[0];
        j += g.lo[1];
        k += g.lo[2];
        return dom.contains(i, j, k) ? std::ptrdiff_t(dom.index(i, j, k)) : -1;
    };
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                if (g.contains(i - e.off[0], j - e.off[1], k - e.off[2])) continue;
                int len = 0;
                int ci = i, cj = j, ck = k;
                while (g.contains(ci, cj, ck)) {
                    ++len;
                    ci += e.off[0];
                    cj += e.off[1];
                    ck += e.off[2];
                }
                d.chains.push_back({g.index(i, j, k), len, global(i - e.off[0], j - e.off[1], k - e.off[2]),
                                    global(ci, cj, ck)});
                d.longest = std::max(d.longest, len);
            }
    d.y_pre.assign(d.chains.size(), 0.0);
    return d;
}

struct Workspace {
    Tv1d prox;
    std::vector<double> v, x;
    void reserve(int m)
    {
        if (int(v.size()) < m) {
            v.resize(m);
            x.resize(m);
        }
    }
};

// Duals of one chain from its exact solution x. S_t = sum_{s<=t} (x_s - v_s)
// gives y_t = y_pre + S_t / h; y_pre is pinned by any edge with a nonzero
// difference, or else by the absent end edges.
void chain_duals(const Direction& dir, const Chain& ch, std::size_t c, double h, const double* v, const double* x,
                 double left, double right, std::vector<double>& y, Direction& out)
{
    const int m = ch.length;
    const bool has_pre = ch.pre >= 0, has_post = ch.post >= 0;
    auto pinned = [&](double D) { return D > 0 ? dir.a : -dir.b; };
    double S = 0;
    double y0 = 0;
    bool fixed = !has_pre;
    if (!fixed && x[0] != left) {
        y0 = pinned(x[0] - left);
        fixed = true;
    }
    double lo = -dir.b, hi = dir.a;  // feasible interval for y_pre
    for (int t = 0; t < m && !fixed; ++t) {
        S += x[t] - v[t];
        const bool last = t == m - 1;
        if (last && !has_post) {
            y0 = -S / h;
            fixed = true;
        } else {
            const double D = last ? right - x[t] : x[t + 1] - x[t];
            if (D != 0) {
                y0 = pinned(D) - S / h;
                fixed = true;
            } else {
                lo = std::max(lo, -dir.b - S / h);
                hi = std::min(hi, dir.a - S / h);
            }
        }
    }
    if (!fixed) y0 = std::clamp(out.y_pre[c], lo, std::max(lo, hi));
    out.y_pre[c] = has_pre ? std::clamp(y0, -dir.b, dir.a) : 0.0;
    S = 0;
    std::size_t p = ch.start;
    for (int t = 0; t < m; ++t, p += dir.stride) {
        S += x[t] - v[t];
        y[p] = (t < m - 1 || has_post) ? std::clamp(y0 + S / h, -dir.b, dir.a) : 0.0;
    }
}

// Exact minimization of the dual objective over the duals of one direction,
// everything else fixed. Updates w and y in place.
void sweep_direction(Direction& dir, double h, const std::vector<double>& dfull, std::vector<double>& w,
                     std::vector<double>& y, int workers, std::vector<Workspace>& ws)
{
    parallel_for(workers, dir.chains.size(), [&](std::size_t c0, std::size_t c1, int t) {
        Workspace& s = ws[t];
        s.reserve(dir.longest);
        for (std::size_t c = c0; c < c1; ++c) {
            const Chain& ch = dir.chains[c];
            const int m = ch.length;
            double prev = ch.pre >= 0 ? dir.y_pre[c] : 0.0;
            std::size_t p = ch.start;
            for (int k = 0; k < m; ++k, p += dir.stride) {
                const double cur = (k < m - 1 || ch.post >= 0) ? y[p] : 0.0;
                s.v[k] = w[p] - h * (cur - prev);
                prev = cur;
            }
            const double left = ch.pre >= 0 ? dfull[ch.pre] : 0.0;
            const double right = ch.post >= 0 ? dfull[ch.post] : 0.0;
            s.prox.solve(m, s.v.data(), h, dir.a, dir.b, ch.pre >= 0 ? &left : nullptr,
                         ch.post >= 0 ? &right : nullptr, s.x.data());
            p = ch.start;
            for (int k = 0; k < m; ++k, p += dir.stride) w[p] = s.x[k];
            chain_duals(dir, ch, c, h, s.v.data(), s.x.data(), left, right, y, dir);
        }
    });
}

}  // namespace

int auto_crop_margin(double h, const TvStencil& st)
{
    int reach = 0;
    for (const auto& e : st.edges)
        for (int a = 0; a < 3; ++a) reach = std::max(reach, std::abs(e.off[a]));
    return reach + 2 + int(std::ceil(3 * std::sqrt(h) / st.dom.min_spacing()));
}

RofSolution solve_w(const ScalarField& d, double h, const TvStencil& st, const SolverConfig& cfg, const Box& crop,
                    const DualState* warm)
{
    const GridDomain& dom = d.dom;
    if (!(st.dom == dom)) throw std::invalid_argument("solve_w: stencil built for another grid");
    if (!(h > 0)) throw std::invalid_argument("solve_w: h must be positive");
    if (!crop.valid()) throw std::invalid_argument("solve_w: empty crop box");
    const int workers = std::max(1, cfg.workers);
    const std::size_t K = st.edges.size();

    // Unknowns live on the crop minus the frame; every other cell is held at d.
    LocalGrid g;
    for (int a = 0; a < 3; ++a) {
        const int f = a < dom.dim ? 2 : 0;
        g.lo[a] = std::max(crop.lo[a], f);
        g.n[a] = std::min(crop.hi[a], dom.cells[a] - f) - g.lo[a];
        if (g.n[a] <= 0) throw std::invalid_argument("solve_w: crop box lies inside the frame");
    }
    const std::size_t N = g.size();
    std::vector<std::size_t> gidx(N);
    for (std::size_t l = 0; l < N; ++l) {
        const int i = int(l % g.n[0]), j = int((l / g.n[0]) % g.n[1]), k = int(l / (std::size_t(g.n[0]) * g.n[1]));
        gidx[l] = dom.index(i + g.lo[0], j + g.lo[1], k + g.lo[2]);
    }

    std::vector<Direction> dirs;
    for (const auto& e : st.edges) dirs.push_back(make_direction(g, dom, e));

    std::vector<double> dl(N);
    for (std::size_t l = 0; l < N; ++l) dl[l] = d.v[gidx[l]];

    std::vector<std::vector<double>> y(K, std::vector<double>(N, 0.0));
    if (warm && warm->y.size() == K) {
        for (std::size_t k = 0; k < K; ++k) {
            if (warm->y[k].size() != dom.size()) continue;
            Direction& dir = dirs[k];
            for (std::size_t l = 0; l < N; ++l) y[k][l] = std::clamp(warm->y[k][gidx[l]], -dir.b, dir.a);
            for (std::size_t c = 0; c < dir.chains.size(); ++c) {
                const Chain& ch = dir.chains[c];
                if (ch.post < 0) y[k][ch.start + (ch.length - 1) * dir.stride] = 0;
                if (ch.pre >= 0) dir.y_pre[c] = std::clamp(warm->y[k][ch.pre], -dir.b, dir.a);
            }
        }
    }

    auto divergence = [&](std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            const Direction& dir = dirs[k];
            for (std::size_t c = 0; c < dir.chains.size(); ++c) {
                const Chain& ch = dir.chains[c];
                double prev = ch.pre >= 0 ? dir.y_pre[c] : 0.0;
                std::size_t p = ch.start;
                for (int t = 0; t < ch.length; ++t, p += dir.stride) {
                    out[p] += y[k][p] - prev;
                    prev = y[k][p];
                }
            }
        }
    };

    std::vector<double> w(N), div(N);
    divergence(div);
    for (std::size_t l = 0; l < N; ++l) w[l] = dl[l] + h * div[l];

    // Relative duality gap h sum_e [phi_e(Dw) - y_e Dw] / P(w), with the
    // edges to held cells included.
    auto relative_gap = [&]() {
        double gap = 0, tv = 0;
        for (std::size_t k = 0; k < K; ++k) {
            const Direction& dir = dirs[k];
            const auto& yk = y[k];
            auto cost = [&](double D) { return D > 0 ? dir.a * D : -dir.b * D; };
            auto chain_terms = [&](std::size_t c, bool with_dual) {
                const Chain& ch = dir.chains[c];
                double s = 0;
                std::size_t p = ch.start;
                if (ch.pre >= 0) {
                    const double D = w[p] - d.v[ch.pre];
                    s += cost(D) - (with_dual ? dir.y_pre[c] * D : 0.0);
                }
                for (int t = 0; t < ch.length; ++t, p += dir.stride) {
                    double D;
                    if (t + 1 < ch.length) D = w[p + dir.stride] - w[p];
                    else if (ch.post >= 0) D = d.v[ch.post] - w[p];
                    else break;
                    s += cost(D) - (with_dual ? yk[p] * D : 0.0);
                }
                return s;
            };
            gap += parallel_sum(workers, dir.chains.size(), [&](std::size_t c) { return chain_terms(c, true); });
            tv += parallel_sum(workers, dir.chains.size(), [&](std::size_t c) { return chain_terms(c, false); });
        }
        const double fid = parallel_sum(workers, N, [&](std::size_t l) {
            const double r = w[l] - dl[l];
            return 0.5 * r * r;
        });
        const double P = h * tv + fid;
        gap = std::max(0.0, h * gap);
        return P > 0 ? gap / P : gap;
    };

    std::vector<Workspace> ws(workers);
    RofSolution sol;
    const int every = std::max(1, cfg.check_every);
    double rel = relative_gap();
    int it = 0;
    while (rel > cfg.tol_gap && it < cfg.max_iters) {
        for (std::size_t k = 0; k < K; ++k) sweep_direction(dirs[k], h, d.v, w, y[k], workers, ws);
        ++it;
        if (it % every == 0 || it == cfg.max_iters) rel = relative_gap();
    }

    divergence(div);
    double el = 0;
    for (std::size_t l = 0; l < N; ++l) {
        const double wf = dl[l] + h * div[l];
        el = std::max(el, std::abs(wf - w[l]));
        w[l] = wf;
    }

    sol.w = d;
    sol.div = ScalarField(dom);
    sol.z = VectorField(dom);
    sol.dual.y.assign(K, std::vector<double>(dom.size(), 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        const Direction& dir = dirs[k];
        auto& yk = sol.dual.y[k];
        for (std::size_t l = 0; l < N; ++l) yk[gidx[l]] = y[k][l];
        for (std::size_t c = 0; c < dir.chains.size(); ++c)
            if (dir.chains[c].pre >= 0) yk[dir.chains[c].pre] = dir.y_pre[c];
        for (std::size_t i = 0; i < dom.size(); ++i)
            if (yk[i] != 0)
                for (int a = 0; a < dom.dim; ++a) sol.z.at(i, a) += yk[i] * st.edges[k].g[a];
    }
    for (std::size_t l = 0; l < N; ++l) {
        sol.w.v[gidx[l]] = w[l];
        sol.div.v[gidx[l]] = div[l];
    }
    sol.residual = rel;
    sol.el_residual = el;
    sol.iterations = it;
    sol.certified = rel <= cfg.tol_gap;
    sol.crop = crop;
    return sol;
}

RofSolution solve_w(const SignedDistance& d, double h, const Anisotropy& phi, const SolverConfig& cfg)
{
    TvStencil st = build_stencil(phi, d.field.dom, cfg.stencil_radius);
    return solve_w(d.field, h, st, cfg, full_box(d.field.dom));
}

IndicatorField threshold_set(const ScalarField& w, const SolverConfig& cfg)
{
    IndicatorField e(w.dom);
    for (std::size_t i = 0; i < w.v.size(); ++i)
        e.m[i] = cfg.smallest_minimizer ? w.v[i] < -cfg.level_tol : w.v[i] <= cfg.level_tol;
    require_compact(e, "next set");
    return e;
}

SignedDistance compute_distance(const IndicatorField& e, const Anisotropy& psi_dual, const SolverConfig& cfg,
                                double cutoff)
{
    return cfg.distance == DistanceMethod::BruteForce ? signed_distance_bruteforce(e, psi_dual, cfg.convention)
                                                      : signed_distance_sweep(e, psi_dual, cfg.convention, cutoff);
}

double delta_certificate(const IndicatorField& set, const ScalarField& div)
{
    IndicatorField inner = erode(set, 2);
    double m = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < inner.m.size(); ++i)
        if (inner.m[i]) {
            m = std::min(m, div.v[i]);
            any = true;
        }
    return any ? m : std::numeric_limits<double>::quiet_NaN();
}

double atw_energy(const IndicatorField& f, const ScalarField& d, double h, const TvStencil& st)
{
    double s = 0;
    for (std::size_t i = 0; i < f.m.size(); ++i)
        if (f.m[i]) s += d.v[i];
    return perimeter_phi(f, st) + s * f.dom.cell_volume() / h;
}

double atw_energy(const IndicatorField& f, const SignedDistance& d, double h, const Anisotropy& phi)
{
    return atw_energy(f, d.field, h, build_stencil(phi, f.dom));
}

namespace {

int stencil_reach(const TvStencil& st)
{
    int reach = 0;
    for (const auto& edge : st.edges)
        for (int a = 0; a < 3; ++a) reach = std::max(reach, std::abs(edge.off[a]));
    return reach;
}

AtwStepResult atw_step_cut(const IndicatorField& e, double h, const TvStencil& st, const Anisotropy& psi_dual,
                           const SolverConfig& cfg)
{
    const GridDomain& dom = e.dom;
    const double dx = dom.min_spacing();
    const double band = (cfg.band_cells > 0 ? cfg.band_cells : auto_crop_margin(h, st)) * dx;
    double cutoff = cfg.truncate_distance && cfg.distance == DistanceMethod::Sweep
                        ? 4 * band
                        : std::numeric_limits<double>::infinity();
    while (true) {
        SignedDistance sd = compute_distance(e, psi_dual, cfg, cutoff);
        CutResult cut = min_cut_set(sd.field, h, st, band, cfg.smallest_minimizer);
        // held cells beyond the cutoff only carry their sign; widen if the band got there
        if (std::isfinite(cutoff) && cut.band > cutoff / 2) {
            cutoff *= 4;
            continue;
        }
        require_compact(cut.set, "next set");
        AtwStepResult r;
        r.next_set = std::move(cut.set);
        r.d = std::move(sd.field);
        r.w = r.d;
        r.z = VectorField(dom);
        r.div = ScalarField(dom, 0);
        r.residual = cut.cut > 0 ? std::abs(cut.cut - cut.flow) / cut.cut : std::abs(cut.cut - cut.flow);
        r.certified = r.residual <= 1e-9;
        r.crop = full_box(dom);
        r.delta_certificate = std::numeric_limits<double>::quiet_NaN();
        r.perimeter = perimeter_phi(r.next_set, st);
        r.energy = atw_energy(r.next_set, r.d, h, st);
        return r;
    }
}

}  // namespace

AtwStepResult atw_step(const IndicatorField& e, double h, const Anisotropy& phi, const Anisotropy& psi_dual,
                       const SolverConfig& cfg)
{
    return atw_step(e, h, build_stencil(phi, e.dom, cfg.stencil_radius), psi_dual, cfg);
}

AtwStepResult atw_step(const IndicatorField& e, double h, const TvStencil& st, const Anisotropy& psi_dual,
                       const SolverConfig& cfg, const DualState* warm)
{
    require_compact(e, "input set");
    const GridDomain& dom = e.dom;
    if (e.empty()) {
        AtwStepResult r;
        r.next_set = e;
        r.d = ScalarField(dom, std::numeric_limits<double>::infinity());
        r.w = r.d;
        r.z = VectorField(dom);
        r.div = ScalarField(dom, 0);
        r.certified = true;
        r.crop = full_box(dom);
        r.delta_certificate = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    if (cfg.set_solver == SetSolver::MinCut) return atw_step_cut(e, h, st, psi_dual, cfg);
    SignedDistance sd = compute_distance(e, psi_dual, cfg);

    const int reach = stencil_reach(st);
    int margin = cfg.crop_margin >= 0 ? cfg.crop_margin : auto_crop_margin(h, st);
    const Box whole = full_box(dom);

    RofSolution sol;
    IndicatorField next;
    DualState carry;
    const DualState* start = warm;
    while (true) {
        const Box crop = grow(bounding_box(e), margin, dom);
        sol = solve_w(sd.field, h, st, cfg, crop, start);
        next = threshold_set(sol.w, cfg);
        if (crop == whole) break;
        // The next set must keep clear of crop faces that are not grid faces.
        bool clear = true;
        const Box nb = bounding_box(next);
        if (nb.valid())
            for (int a = 0; a < dom.dim; ++a) {
                if (crop.lo[a] > 0 && nb.lo[a] - crop.lo[a] < reach + 2) clear = false;
                if (crop.hi[a] < dom.cells[a] && crop.hi[a] - nb.hi[a] < reach + 2) clear = false;
            }
        if (clear) break;
        margin *= 2;
        carry = sol.dual;
        start = &carry;
    }

    AtwStepResult r;
    r.next_set = std::move(next);
    r.d = sd.field;
    r.w = std::move(sol.w);
    r.z = std::move(sol.z);
    r.div = std::move(sol.div);
    r.dual = std::move(sol.dual);
    r.residual = sol.residual;
    r.iterations = sol.iterations;
    r.certified = sol.certified;
    r.crop = sol.crop;
    r.delta_certificate = delta_certificate(r.next_set, r.div);
    r.perimeter = perimeter_phi(r.next_set, st);
    r.energy = atw_energy(r.next_set, r.d, h, st);
    return r;
}

}  // namespace atw

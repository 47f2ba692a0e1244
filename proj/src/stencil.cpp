#include "atwflow/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace atw {

Vec nnls(const Mat& A, const Vec& b, int max_iter)
{
    const int n = static_cast<int>(A.cols());
    Vec x = Vec::Zero(n);
    std::vector<bool> passive(n, false);
    Vec wgrad = A.transpose() * (b - A * x);
    const double tol = 1e-12 * (1 + A.norm() * b.norm());

    auto solve_passive = [&]() {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j)
            if (passive[j]) idx.push_back(j);
        Mat Ap(A.rows(), idx.size());
        for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(c) = A.col(idx[c]);
        Vec zp = Ap.colPivHouseholderQr().solve(b);
        Vec z = Vec::Zero(n);
        for (std::size_t c = 0; c < idx.size(); ++c) z[idx[c]] = zp[c];
        return z;
    };

    for (int outer = 0; outer < max_iter; ++outer) {
        int jmax = -1;
        double best = tol;
        for (int j = 0; j < n; ++j)
            if (!passive[j] && wgrad[j] > best) { best = wgrad[j]; jmax = j; }
        if (jmax < 0) break;
        passive[jmax] = true;
        Vec z = solve_passive();
        for (int inner = 0; inner < 4 * n; ++inner) {
            bool ok = true;
            for (int j = 0; j < n; ++j)
                if (passive[j] && z[j] <= 0) ok = false;
            if (ok) break;
            double alpha = 1;
            for (int j = 0; j < n; ++j)
                if (passive[j] && z[j] <= 0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
            x += alpha * (z - x);
            for (int j = 0; j < n; ++j)
                if (passive[j] && x[j] <= 1e-14) { passive[j] = false; x[j] = 0; }
            z = solve_passive();
        }
        x = z;
        wgrad = A.transpose() * (b - A * x);
    }
    return x;
}

namespace {

std::vector<std::array<int, 3>> lattice_directions(int dim, int radius)
{
    std::vector<std::array<int, 3>> out;
    const int rz = dim == 3 ? radius : 0;
    for (int k = -rz; k <= rz; ++k)
        for (int j = -radius; j <= radius; ++j)
            for (int i = -radius; i <= radius; ++i) {
                if (i == 0 && j == 0 && k == 0) continue;
                if (std::gcd(std::gcd(std::abs(i), std::abs(j)), std::abs(k)) != 1) continue;
                // keep one representative of +-off: first nonzero component positive
                int first = i != 0 ? i : (j != 0 ? j : k);
                if (first < 0) continue;
                out.push_back({i, j, k});
            }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        int na = std::abs(a[0]) + std::abs(a[1]) + std::abs(a[2]);
        int nb = std::abs(b[0]) + std::abs(b[1]) + std::abs(b[2]);
        if (na != nb) return na < nb;
        return a < b;
    });
    return out;
}

Vec physical(const std::array<int, 3>& off, const GridDomain& dom)
{
    Vec g(dom.dim);
    for (int a = 0; a < dom.dim; ++a) g[a] = off[a] * dom.spacing(a);
    return g;
}

std::vector<Vec> sample_dirs(int dim, int n)
{
    std::vector<Vec> out;
    if (dim == 2) {
        for (int i = 0; i < n; ++i) {
            double t = 2 * std::numbers::pi * (i + 0.25) / n;
            Vec u(2);
            u << std::cos(t), std::sin(t);
            out.push_back(u);
        }
    } else {
        const double ga = std::numbers::pi * (3 - std::sqrt(5.0));
        for (int i = 0; i < n; ++i) {
            double z = 1 - 2 * (i + 0.5) / n;
            double r = std::sqrt(std::max(0.0, 1 - z * z));
            Vec u(3);
            u << r * std::cos(ga * i), r * std::sin(ga * i), z;
            out.push_back(u);
        }
    }
    return out;
}

// Directions p, one inside every open region of the arrangement {p.g_k = 0}.
std::vector<Vec> zonotope_probe_dirs(const std::vector<StencilEdge>& edges, int dim)
{
    std::vector<Vec> out;
    if (dim == 2) {
        std::vector<double> ang;
        for (const auto& e : edges) {
            double t = std::atan2(e.g[1], e.g[0]) + std::numbers::pi / 2;
            for (double s : {t, t + std::numbers::pi}) ang.push_back(std::fmod(s + 4 * std::numbers::pi, 2 * std::numbers::pi));
        }
        std::sort(ang.begin(), ang.end());
        for (std::size_t i = 0; i < ang.size(); ++i) {
            double a0 = ang[i];
            double a1 = i + 1 < ang.size() ? ang[i + 1] : ang[0] + 2 * std::numbers::pi;
            if (a1 - a0 < 1e-12) continue;
            double t = 0.5 * (a0 + a1);
            Vec u(2);
            u << std::cos(t), std::sin(t);
            out.push_back(u);
        }
        return out;
    }
    const int ring = 360;
    for (std::size_t k = 0; k < edges.size(); ++k)
        for (std::size_t l = k + 1; l < edges.size(); ++l) {
            Eigen::Vector3d gk = edges[k].g, gl = edges[l].g;
            Eigen::Vector3d q = gk.cross(gl);
            if (q.norm() < 1e-12 * gk.norm() * gl.norm()) continue;
            q.normalize();
            Eigen::Vector3d e1 = gk.normalized();
            Eigen::Vector3d e2 = q.cross(e1);
            for (double s : {1.0, -1.0})
                for (int j = 0; j < ring; ++j) {
                    double t = 2 * std::numbers::pi * (j + 0.5) / ring;
                    Eigen::Vector3d p = s * q + 1e-4 * (std::cos(t) * e1 + std::sin(t) * e2);
                    out.push_back(Vec(p.normalized()));
                }
        }
    return out;
}

Vec support_point(const std::vector<StencilEdge>& edges, const Vec& p)
{
    Vec v = Vec::Zero(p.size());
    for (const auto& e : edges) {
        double s = p.dot(e.g);
        if (s > 0) v += e.a * e.g;
        else if (s < 0) v -= e.b * e.g;
    }
    return v;
}

}  // namespace

double stencil_eval(const TvStencil& s, const Vec& p)
{
    double r = 0;
    for (const auto& e : s.edges) {
        double t = p.dot(e.g);
        r += t > 0 ? e.a * t : -e.b * t;
    }
    return r;
}

double stencil_max_dual(const TvStencil& s, const Anisotropy& phi)
{
    double m = 0;
    for (const auto& p : zonotope_probe_dirs(s.edges, s.dom.dim)) m = std::max(m, phi.dual_eval(support_point(s.edges, p)));
    return m;
}

TvStencil build_stencil(const Anisotropy& phi, const GridDomain& dom, int radius)
{
    if (phi.dim() != dom.dim) throw std::invalid_argument("stencil: anisotropy dimension does not match the domain");
    if (radius < 1) throw std::invalid_argument("stencil: radius must be >= 1");
    TvStencil s;
    s.dom = dom;
    const bool square = dom.dim == 2 && std::abs(dom.spacing(0) - dom.spacing(1)) <= 1e-14 * dom.spacing(0);

    if (phi.kind() == Anisotropy::Kind::WeightedL1) {
        for (int a = 0; a < dom.dim; ++a) {
            StencilEdge e;
            e.off = {0, 0, 0};
            e.off[a] = 1;
            e.g = physical(e.off, dom);
            e.a = e.b = phi.weights()[a] / dom.spacing(a);
            s.edges.push_back(e);
        }
        s.exact = true;
    } else if (phi.kind() == Anisotropy::Kind::LInfinity && square) {
        // max(|x|,|y|) = (|x+y| + |x-y|) / 2
        for (int sgn : {1, -1}) {
            StencilEdge e;
            e.off = {1, sgn, 0};
            e.g = physical(e.off, dom);
            e.a = e.b = 0.5 / dom.spacing(0);
            s.edges.push_back(e);
        }
        s.exact = true;
    } else {
        auto offs = lattice_directions(dom.dim, dom.dim == 3 ? std::min(radius, 1) : radius);
        std::vector<Vec> gs;
        for (const auto& o : offs) gs.push_back(physical(o, dom));
        auto dirs = sample_dirs(dom.dim, dom.dim == 2 ? 1440 : 3000);
        const int K = static_cast<int>(offs.size());
        const int R = static_cast<int>(dirs.size());
        // Even part: phi_S(p) + phi_S(-p) only sees the symmetric weights, so
        // fit those first; the fit is relative, rows scaled by 1/phi.
        Mat A(R, K);
        Vec rhs = Vec::Ones(R);
        Vec even(R), odd(R);
        for (int r = 0; r < R; ++r) {
            const double fp = phi.eval(dirs[r]), fm = phi.eval(Vec(-dirs[r]));
            even[r] = 0.5 * (fp + fm);
            odd[r] = 0.5 * (fp - fm);
            for (int k = 0; k < K; ++k) A(r, k) = std::abs(dirs[r].dot(gs[k])) / even[r];
        }
        Vec sym = nnls(A, rhs);
        // Odd part of phi_S is the linear map p -> sum_k c_k p.g_k with
        // c_k = (a_k - b_k) / 2. Fit the best linear l, then spread it over
        // the active edges with the smallest weighted norm.
        Vec c = Vec::Zero(K);
        if (!phi.symmetric()) {
            Mat P(R, dom.dim);
            Vec rw(R);
            for (int r = 0; r < R; ++r) {
                P.row(r) = dirs[r].transpose() / even[r];
                rw[r] = odd[r] / even[r];
            }
            Vec l = P.colPivHouseholderQr().solve(rw);
            Mat G(dom.dim, K);
            for (int k = 0; k < K; ++k) G.col(k) = gs[k];
            Mat GW = G * sym.asDiagonal();
            Vec mu = (GW * G.transpose()).ldlt().solve(l);
            c = sym.asDiagonal() * (G.transpose() * mu);
            double scale = 1;
            for (int k = 0; k < K; ++k)
                if (std::abs(c[k]) > sym[k] && c[k] != 0) scale = std::min(scale, sym[k] / std::abs(c[k]));
            c *= scale;
        }
        for (int k = 0; k < K; ++k) {
            if (sym[k] <= 0) continue;
            StencilEdge e;
            e.off = offs[k];
            e.g = gs[k];
            e.a = sym[k] + c[k];
            e.b = sym[k] - c[k];
            s.edges.push_back(e);
        }
        const double m = stencil_max_dual(s, phi);
        for (auto& e : s.edges) {
            e.a /= m;
            e.b /= m;
        }
    }

    s.min_ratio = 1e300;
    s.max_ratio = 0;
    for (const auto& u : sample_dirs(dom.dim, dom.dim == 2 ? 3600 : 4000)) {
        double r = stencil_eval(s, u) / phi.eval(u);
        s.min_ratio = std::min(s.min_ratio, r);
        s.max_ratio = std::max(s.max_ratio, r);
    }
    if (!(s.min_ratio > 0)) throw std::runtime_error("stencil: fitted perimeter is degenerate");
    return s;
}

double total_variation(const ScalarField& u, const TvStencil& s)
{
    const auto& d = u.dom;
    double total = 0;
    for (const auto& e : s.edges) {
        const auto st = d.stride(e.off);
        double acc = 0;
        for (int k = 0; k < d.cells[2]; ++k)
            for (int j = 0; j < d.cells[1]; ++j)
                for (int i = 0; i < d.cells[0]; ++i) {
                    const std::size_t c = d.index(i, j, k);
                    const bool fwd = d.contains(i + e.off[0], j + e.off[1], k + e.off[2]);
                    const bool bwd = d.contains(i - e.off[0], j - e.off[1], k - e.off[2]);
                    const double D = (fwd ? u.v[c + st] : 0.0) - u.v[c];
                    acc += D > 0 ? e.a * D : -e.b * D;
                    if (!bwd) {
                        // pair (outside, c) with the outside value 0
                        const double Db = u.v[c];
                        acc += Db > 0 ? e.a * Db : -e.b * Db;
                    }
                }
        total += acc;
    }
    return total * d.cell_volume();
}

double perimeter_phi(const IndicatorField& e, const TvStencil& s)
{
    const auto& d = e.dom;
    double total = 0;
    for (const auto& ed : s.edges) {
        const auto st = d.stride(ed.off);
        double acc = 0;
        for (int k = 0; k < d.cells[2]; ++k)
            for (int j = 0; j < d.cells[1]; ++j)
                for (int i = 0; i < d.cells[0]; ++i) {
                    const std::size_t c = d.index(i, j, k);
                    if (!e.m[c]) continue;
                    const bool fwd = d.contains(i + ed.off[0], j + ed.off[1], k + ed.off[2]);
                    const bool bwd = d.contains(i - ed.off[0], j - ed.off[1], k - ed.off[2]);
                    if (!fwd || !e.m[c + st]) acc += ed.a;
                    if (!bwd || !e.m[c - st]) acc += ed.b;
                }
        total += acc;
    }
    return total * d.cell_volume();
}

double perimeter_phi(const IndicatorField& e, const Anisotropy& phi)
{
    return perimeter_phi(e, build_stencil(phi, e.dom));
}

}  // namespace atw

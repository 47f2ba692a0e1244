#include "atwflow/anisotropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace atw {

namespace {

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

bool lex_less(const Vec& a, const Vec& b)
{
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

// Vertices of {x : g.x <= 1 for all rows g}.
std::vector<Vec> enumerate_vertices(const std::vector<Vec>& rows, int dim)
{
    const int m = static_cast<int>(rows.size());
    double scale = 0;
    for (const auto& g : rows) scale = std::max(scale, g.norm());
    std::vector<Vec> out;
    auto consider = [&](const Mat& G) {
        Eigen::FullPivLU<Mat> lu(G);
        if (lu.rank() < dim) return;
        Vec x = lu.solve(Vec::Ones(dim));
        for (const auto& g : rows)
            if (g.dot(x) > 1 + 1e-9) return;
        for (const auto& v : out)
            if ((v - x).norm() <= 1e-9 * (1 + x.norm())) return;
        out.push_back(x);
    };
    Mat G(dim, dim);
    if (dim == 2) {
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) {
                G.row(0) = rows[a].transpose();
                G.row(1) = rows[b].transpose();
                consider(G);
            }
    } else {
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b)
                for (int c = b + 1; c < m; ++c) {
                    G.row(0) = rows[a].transpose();
                    G.row(1) = rows[b].transpose();
                    G.row(2) = rows[c].transpose();
                    consider(G);
                }
    }
    (void)scale;
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

// Unit directions used to check positivity of polyhedral gauges.
std::vector<Vec> sample_sphere(int dim, int n)
{
    std::vector<Vec> out;
    if (dim == 2) {
        for (int i = 0; i < n; ++i) {
            double t = 2 * std::numbers::pi * (i + 0.5) / n;
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

}  // namespace

void Anisotropy::check_dim(const Vec& v) const
{
    if (v.size() != dim_)
        throw std::invalid_argument("anisotropy: dimension mismatch (expected " + std::to_string(dim_) +
                                    ", got " + std::to_string(v.size()) + ")");
}

static void require_dim(int dim)
{
    if (dim != 2 && dim != 3) throw std::invalid_argument("anisotropy: dimension must be 2 or 3");
}

Anisotropy Anisotropy::euclidean(int dim)
{
    require_dim(dim);
    Anisotropy a;
    a.kind_ = Kind::Euclidean;
    a.impl_ = Impl::Ellipsoid;
    a.dim_ = dim;
    a.A_ = Mat::Identity(dim, dim);
    a.Ainv_ = a.A_;
    a.c_ = Vec::Zero(dim);
    a.y0_ = Vec::Zero(dim);
    a.identity_ = true;
    return a;
}

Anisotropy Anisotropy::weighted_l1(const Vec& weights)
{
    require_dim(static_cast<int>(weights.size()));
    if ((weights.array() <= 0).any() || !weights.allFinite())
        throw std::invalid_argument("weighted-l1: weights must be positive");
    Anisotropy a;
    a.kind_ = Kind::WeightedL1;
    a.impl_ = Impl::L1;
    a.dim_ = static_cast<int>(weights.size());
    a.w_ = weights;
    return a;
}

Anisotropy Anisotropy::l_infinity(int dim)
{
    require_dim(dim);
    Anisotropy a;
    a.kind_ = Kind::LInfinity;
    a.impl_ = Impl::LInf;
    a.dim_ = dim;
    return a;
}

Anisotropy Anisotropy::p_norm(double p, int dim)
{
    require_dim(dim);
    if (!(p > 1) || !std::isfinite(p)) throw std::invalid_argument("p-norm: p must satisfy 1 < p < inf");
    Anisotropy a;
    a.kind_ = Kind::PNorm;
    a.impl_ = Impl::PNorm;
    a.dim_ = dim;
    a.p_ = p;
    a.q_ = p / (p - 1);
    return a;
}

Anisotropy Anisotropy::ellipse(const Mat& A)
{
    require_dim(static_cast<int>(A.rows()));
    if (A.rows() != A.cols() || (A - A.transpose()).norm() > 1e-12 * (1 + A.norm()))
        throw std::invalid_argument("ellipse: matrix must be square and symmetric");
    Eigen::LLT<Mat> llt(A);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("ellipse: matrix must be positive definite");
    Anisotropy a;
    a.kind_ = Kind::Ellipse;
    a.impl_ = Impl::Ellipsoid;
    a.dim_ = static_cast<int>(A.rows());
    a.A_ = 0.5 * (A + A.transpose());
    a.Ainv_ = a.A_.inverse();
    a.Ainv_ = 0.5 * (a.Ainv_ + a.Ainv_.transpose());
    a.c_ = Vec::Zero(a.dim_);
    a.identity_ = false;
    a.y0_ = Vec::Zero(a.dim_);
    a.rho_ = 1;
    Eigen::SelfAdjointEigenSolver<Mat> es(a.Ainv_);
    a.Qval_ = es.eigenvalues();
    a.Qvec_ = es.eigenvectors();
    return a;
}

Anisotropy Anisotropy::polyhedral(const std::vector<Vec>& directions, const Vec& weights)
{
    if (directions.empty() || static_cast<int>(directions.size()) != weights.size())
        throw std::invalid_argument("polyhedral: need one weight per support direction");
    const int dim = static_cast<int>(directions[0].size());
    require_dim(dim);
    Anisotropy a;
    a.kind_ = Kind::Polyhedral;
    a.impl_ = Impl::Polytope;
    a.dim_ = dim;
    for (std::size_t k = 0; k < directions.size(); ++k) {
        if (directions[k].size() != dim) throw std::invalid_argument("polyhedral: dimension mismatch");
        if (!(weights[k] > 0)) throw std::invalid_argument("polyhedral: weights must be positive");
        a.rows_.push_back(weights[k] * directions[k]);
    }
    a.build_polytope();
    return a;
}

void Anisotropy::build_polytope()
{
    for (const auto& u : sample_sphere(dim_, dim_ == 2 ? 4096 : 20000)) {
        double m = -1e300;
        for (const auto& g : rows_) m = std::max(m, g.dot(u));
        if (!(m > 1e-12))
            throw std::invalid_argument("polyhedral: gauge is not positive (0 must be interior to the hull of the weighted directions)");
    }
    verts_ = enumerate_vertices(rows_, dim_);
    dual_verts_ = enumerate_vertices(verts_, dim_);
    symmetric_ = true;
    for (const auto& v : verts_) {
        bool found = false;
        for (const auto& u : verts_)
            if ((u + v).norm() <= 1e-10 * (1 + v.norm())) found = true;
        if (!found) symmetric_ = false;
    }
}

Anisotropy Anisotropy::shifted(const Anisotropy& base, const Vec& offset)
{
    base.check_dim(offset);
    Vec neg = -offset;
    if (!(base.eval(neg) < 1)) throw std::invalid_argument("shifted: offset must satisfy base(-offset) < 1");
    Anisotropy a;
    a.kind_ = Kind::Shifted;
    a.dim_ = base.dim_;
    a.symmetric_ = offset.norm() == 0 && base.symmetric_;
    switch (base.impl_) {
    case Impl::Ellipsoid: {
        a.impl_ = Impl::Ellipsoid;
        a.A_ = base.A_;
        a.Ainv_ = base.Ainv_;
        a.c_ = base.c_ + offset;
        a.identity_ = false;
        Mat Q = a.Ainv_ - a.c_ * a.c_.transpose();
        Q = 0.5 * (Q + Q.transpose());
        Eigen::LLT<Mat> llt(Q);
        if (llt.info() != Eigen::Success) throw std::invalid_argument("shifted: offset leaves the body");
        Vec Qinv_c = llt.solve(a.c_);
        a.y0_ = -Qinv_c;
        a.rho_ = 1 + a.c_.dot(Qinv_c);
        Eigen::SelfAdjointEigenSolver<Mat> es(Q);
        a.Qval_ = es.eigenvalues();
        a.Qvec_ = es.eigenvectors();
        return a;
    }
    case Impl::PNorm:
        throw std::invalid_argument("shifted: p-norm bodies are not supported");
    case Impl::L1: {
        std::vector<Vec> rows;
        const int n = 1 << base.dim_;
        for (int s = 0; s < n; ++s) {
            Vec g(base.dim_);
            for (int i = 0; i < base.dim_; ++i) g[i] = ((s >> i) & 1 ? -1.0 : 1.0) * base.w_[i];
            rows.push_back(g);
        }
        a.rows_ = rows;
        break;
    }
    case Impl::LInf:
        for (int i = 0; i < base.dim_; ++i)
            for (double s : {1.0, -1.0}) {
                Vec g = Vec::Zero(base.dim_);
                g[i] = s;
                a.rows_.push_back(g);
            }
        break;
    case Impl::Polytope:
        a.rows_ = base.rows_;
        break;
    }
    a.impl_ = Impl::Polytope;
    for (auto& g : a.rows_) g /= (1 + g.dot(offset));
    a.build_polytope();
    a.symmetric_ = a.symmetric_ && offset.norm() == 0;
    a.c_ = offset;
    return a;
}

std::string Anisotropy::name() const
{
    switch (kind_) {
    case Kind::Euclidean: return "euclidean";
    case Kind::WeightedL1: return "weighted-l1";
    case Kind::LInfinity: return "l-infinity";
    case Kind::PNorm: return "p-norm";
    case Kind::Ellipse: return "ellipse";
    case Kind::Polyhedral: return "polyhedral";
    case Kind::Shifted: return "shifted";
    }
    return "unknown";
}

double Anisotropy::eval(const Vec& x) const
{
    check_dim(x);
    switch (impl_) {
    case Impl::Ellipsoid: {
        if (identity_) return x.norm();
        const double q = x.dot(A_ * x);
        if (q <= 0) return 0;
        if (c_.isZero(0)) return std::sqrt(q);
        const double b = x.dot(A_ * c_);
        const double a = 1 - c_.dot(A_ * c_);
        const double s = std::sqrt(b * b + a * q);
        return b >= 0 ? q / (b + s) : (s - b) / a;
    }
    case Impl::L1: return (w_.array() * x.array().abs()).sum();
    case Impl::LInf: return x.cwiseAbs().maxCoeff();
    case Impl::PNorm: {
        const double m = x.cwiseAbs().maxCoeff();
        if (m == 0) return 0;
        double s = 0;
        for (int i = 0; i < dim_; ++i) s += std::pow(std::abs(x[i]) / m, p_);
        return m * std::pow(s, 1 / p_);
    }
    case Impl::Polytope: {
        if (x.isZero(0)) return 0;
        double m = -1e300;
        for (const auto& g : rows_) m = std::max(m, g.dot(x));
        return m;
    }
    }
    return 0;
}

double Anisotropy::dual_eval(const Vec& y) const
{
    check_dim(y);
    switch (impl_) {
    case Impl::Ellipsoid:
        if (identity_) return y.norm();
        return std::sqrt(std::max(0.0, y.dot(Ainv_ * y))) + c_.dot(y);
    case Impl::L1: return (y.array().abs() / w_.array()).maxCoeff();
    case Impl::LInf: return y.cwiseAbs().sum();
    case Impl::PNorm: {
        const double m = y.cwiseAbs().maxCoeff();
        if (m == 0) return 0;
        double s = 0;
        for (int i = 0; i < dim_; ++i) s += std::pow(std::abs(y[i]) / m, q_);
        return m * std::pow(s, 1 / q_);
    }
    case Impl::Polytope: {
        if (y.isZero(0)) return 0;
        double m = -1e300;
        for (const auto& v : verts_) m = std::max(m, v.dot(y));
        return m;
    }
    }
    return 0;
}

Vec Anisotropy::subgradient(const Vec& x) const
{
    check_dim(x);
    if (x.isZero(0)) throw std::invalid_argument("subgradient: zero input");
    Vec z(dim_);
    switch (impl_) {
    case Impl::Ellipsoid: {
        if (c_.isZero(0)) {
            Vec Ax = A_ * x;
            return Ax / std::sqrt(x.dot(Ax));
        }
        const double lam = eval(x);
        Vec r = x - lam * c_;
        Vec Ar = A_ * r;
        return Ar / (lam + c_.dot(Ar));
    }
    case Impl::L1:
        for (int i = 0; i < dim_; ++i) z[i] = w_[i] * sgn(x[i]);
        return z;
    case Impl::LInf: {
        const double m = x.cwiseAbs().maxCoeff();
        int n = 0;
        for (int i = 0; i < dim_; ++i) n += std::abs(x[i]) == m;
        for (int i = 0; i < dim_; ++i) z[i] = std::abs(x[i]) == m ? sgn(x[i]) / n : 0.0;
        return z;
    }
    case Impl::PNorm: {
        const double nrm = eval(x);
        for (int i = 0; i < dim_; ++i) z[i] = sgn(x[i]) * std::pow(std::abs(x[i]) / nrm, p_ - 1);
        return z;
    }
    case Impl::Polytope: {
        const double m = eval(x);
        double gmax = 0;
        for (const auto& g : rows_) gmax = std::max(gmax, g.norm());
        const double tol = 1e-13 * gmax * x.norm();
        bool have = false;
        for (const auto& g : rows_) {
            if (g.dot(x) < m - tol) continue;
            if (!have || lex_less(g, z)) z = g;
            have = true;
        }
        return z;
    }
    }
    return z;
}

Vec Anisotropy::project_ellipsoid(const Vec& y) const
{
    Vec q = Qvec_.transpose() * (y - y0_);
    auto lhs = [&](double mu) {
        double s = 0;
        for (int i = 0; i < dim_; ++i) {
            double t = q[i] / (1 + mu * Qval_[i]);
            s += Qval_[i] * t * t;
        }
        return s;
    };
    if (lhs(0) <= rho_ * (1 + 4e-15)) return y;
    // f(mu) = lhs(mu) - rho is convex and decreasing; Newton from the left is monotone.
    double mu = 0;
    for (int it = 0; it < 200; ++it) {
        double f = -rho_, df = 0;
        for (int i = 0; i < dim_; ++i) {
            double den = 1 + mu * Qval_[i];
            double t2 = q[i] * q[i] / (den * den);
            f += Qval_[i] * t2;
            df += -2 * Qval_[i] * Qval_[i] * t2 / den;
        }
        if (f <= 1e-15 * rho_ || df == 0) break;
        double next = mu - f / df;
        if (!(next > mu)) break;
        mu = next;
    }
    Vec u(dim_);
    for (int i = 0; i < dim_; ++i) u[i] = q[i] / (1 + mu * Qval_[i]);
    return y0_ + Qvec_ * u;
}

Vec Anisotropy::project_qball(const Vec& y) const
{
    if (dual_eval(y) <= 1) return y;
    const Vec a = y.cwiseAbs();
    auto t_of = [&](double mu, double ai) {
        double lo = 0, hi = ai;
        for (int it = 0; it < 100; ++it) {
            double t = 0.5 * (lo + hi);
            if (t + mu * q_ * std::pow(t, q_ - 1) > ai) hi = t; else lo = t;
        }
        return 0.5 * (lo + hi);
    };
    auto excess = [&](double mu) {
        double s = 0;
        for (int i = 0; i < dim_; ++i) s += std::pow(t_of(mu, a[i]), q_);
        return s - 1;
    };
    double lo = 0, hi = 1;
    while (excess(hi) > 0) hi *= 2;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0) lo = mid; else hi = mid;
    }
    Vec z(dim_);
    for (int i = 0; i < dim_; ++i) z[i] = sgn(y[i]) * t_of(hi, a[i]);
    return z;
}

Vec Anisotropy::project_polytope(const Vec& y) const
{
    auto violation = [&](const Vec& p) {
        double m = -1e300;
        for (const auto& v : verts_) m = std::max(m, v.dot(p));
        return m - 1;
    };
    if (violation(y) <= 1e-14) return y;
    Vec best = dual_verts_.front();
    double bestd = 1e300;
    auto consider = [&](const Vec& p) {
        if (violation(p) > 1e-11) return;
        double dd = (p - y).squaredNorm();
        if (dd < bestd) { bestd = dd; best = p; }
    };
    for (const auto& v : dual_verts_) consider(v);
    for (const auto& v : verts_) consider(y - (v.dot(y) - 1) / v.squaredNorm() * v);
    if (dim_ == 3) {
        for (std::size_t j = 0; j < verts_.size(); ++j)
            for (std::size_t l = j + 1; l < verts_.size(); ++l) {
                Mat V(3, 2);
                V.col(0) = verts_[j];
                V.col(1) = verts_[l];
                Mat G = V.transpose() * V;
                if (std::abs(G.determinant()) < 1e-14 * G.norm() * G.norm()) continue;
                Vec r = V.transpose() * y - Vec::Ones(2);
                consider(y - V * G.ldlt().solve(r));
            }
    }
    return best;
}

Vec Anisotropy::project_dual_ball(const Vec& y) const
{
    check_dim(y);
    switch (impl_) {
    case Impl::Ellipsoid: {
        if (identity_) {
            double n = y.norm();
            return n <= 1 ? y : Vec(y / n);
        }
        return project_ellipsoid(y);
    }
    case Impl::L1: return y.cwiseMax(-w_).cwiseMin(w_);
    case Impl::LInf: {
        if (y.cwiseAbs().sum() <= 1) return y;
        std::vector<double> u(dim_);
        for (int i = 0; i < dim_; ++i) u[i] = std::abs(y[i]);
        std::sort(u.begin(), u.end(), std::greater<>());
        double cum = 0, theta = 0;
        for (int i = 0; i < dim_; ++i) {
            cum += u[i];
            double t = (cum - 1) / (i + 1);
            if (u[i] > t) theta = t;
        }
        Vec z(dim_);
        for (int i = 0; i < dim_; ++i) z[i] = sgn(y[i]) * std::max(0.0, std::abs(y[i]) - theta);
        return z;
    }
    case Impl::PNorm: return project_qball(y);
    case Impl::Polytope: return project_polytope(y);
    }
    return y;
}

Anisotropy Anisotropy::dual() const
{
    switch (impl_) {
    case Impl::Ellipsoid: {
        if (identity_) return euclidean(dim_);
        if (c_.isZero(0)) return ellipse(Ainv_);
        Mat Q = Qvec_ * Qval_.asDiagonal() * Qvec_.transpose();
        return shifted(ellipse(Q / rho_), y0_);
    }
    case Impl::L1: {
        std::vector<Vec> dirs;
        Vec wts(2 * dim_);
        for (int i = 0; i < dim_; ++i)
            for (int s = 0; s < 2; ++s) {
                Vec e = Vec::Zero(dim_);
                e[i] = s == 0 ? 1.0 : -1.0;
                wts[static_cast<int>(dirs.size())] = 1 / w_[i];
                dirs.push_back(e);
            }
        return polyhedral(dirs, wts);
    }
    case Impl::LInf: return weighted_l1(Vec::Ones(dim_));
    case Impl::PNorm: return p_norm(q_, dim_);
    case Impl::Polytope: {
        std::vector<Vec> dirs;
        Vec wts(static_cast<int>(verts_.size()));
        for (std::size_t j = 0; j < verts_.size(); ++j) {
            wts[static_cast<int>(j)] = verts_[j].norm();
            dirs.push_back(verts_[j] / verts_[j].norm());
        }
        return polyhedral(dirs, wts);
    }
    }
    return *this;
}

}  // namespace atw

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace atw {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Convex, positively one-homogeneous gauge in dimension 2 or 3.
//
// The object stores the primal gauge phi. dual_eval() is the polar
// phi°(y) = sup{x.y : phi(x) <= 1}. Non-symmetric gauges are the gauge
// of a convex body with 0 in its interior, built with shifted().
class Anisotropy {
public:
    enum class Kind { Euclidean, WeightedL1, LInfinity, PNorm, Ellipse, Polyhedral, Shifted };

    Anisotropy() = default;

    static Anisotropy euclidean(int dim);
    static Anisotropy weighted_l1(const Vec& weights);
    static Anisotropy l_infinity(int dim);
    static Anisotropy p_norm(double p, int dim);
    static Anisotropy ellipse(const Mat& A);
    // phi(x) = max_k weights[k] * directions[k].x
    static Anisotropy polyhedral(const std::vector<Vec>& directions, const Vec& weights);
    // gauge of (unit ball of base) + offset; base(-offset) must be < 1
    static Anisotropy shifted(const Anisotropy& base, const Vec& offset);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool symmetric() const { return symmetric_; }
    std::string name() const;

    double eval(const Vec& x) const;
    double dual_eval(const Vec& y) const;
    // Element of the subdifferential of phi at x != 0.
    Vec subgradient(const Vec& x) const;
    // Euclidean projection onto {dual_eval <= 1}.
    Vec project_dual_ball(const Vec& y) const;
    // The polar gauge phi° as an Anisotropy.
    Anisotropy dual() const;

    // Raw parameters, mainly for serialization.
    const Vec& weights() const { return w_; }
    double p() const { return p_; }
    const Mat& matrix() const { return A_; }
    const Vec& offset() const { return c_; }
    const std::vector<Vec>& rows() const { return rows_; }
    const std::vector<Vec>& vertices() const { return verts_; }

private:
    enum class Impl { Ellipsoid, L1, LInf, PNorm, Polytope };

    void check_dim(const Vec& v) const;
    void build_polytope();
    Vec project_ellipsoid(const Vec& y) const;
    Vec project_polytope(const Vec& y) const;
    Vec project_qball(const Vec& y) const;

    Kind kind_ = Kind::Euclidean;
    Impl impl_ = Impl::Ellipsoid;
    int dim_ = 2;
    bool symmetric_ = true;
    bool identity_ = true;  // ellipsoid with A = I and no offset

    Vec w_;       // weighted l1 weights
    double p_ = 2, q_ = 2;
    Mat A_, Ainv_;
    Vec c_;       // body offset (ellipsoid impl); zero when centered

    // Dual ball of the ellipsoid impl: {(y-y0)^T Q (y-y0) <= rho}
    Vec y0_;
    double rho_ = 1;
    Mat Qvec_;
    Vec Qval_;

    // Polytope impl: phi(x) = max_k rows_[k].x, phi°(y) = max_j verts_[j].y
    std::vector<Vec> rows_;
    std::vector<Vec> verts_;
    std::vector<Vec> dual_verts_;  // extreme rows
};

}  // namespace atw

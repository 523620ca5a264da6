#include "asbf/basis.hpp"

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>

#include "asbf/errors.hpp"

namespace asbf {

namespace {

// Appends every exponent tuple of total degree `degree` in descending
// lexicographic order (first coordinate greediest).
void enumerate_degree(int d, int degree, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
    const int pos = static_cast<int>(current.size());
    if (pos == d - 1) {
        current.push_back(degree);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int e = degree; e >= 0; --e) {
        current.push_back(e);
        enumerate_degree(d, degree - e, current, out);
        current.pop_back();
    }
}

}  // namespace

PolyBasis::PolyBasis(int d, int q) : d_(d), q_(q) {
    if (d < 1) throw ValidationError("basis dimension d must be >= 1");
    if (q < 0) throw ValidationError("basis order q must be >= 0");
    std::vector<int> current;
    for (int degree = 0; degree <= q; ++degree) {
        enumerate_degree(d, degree, current, monomials_);
    }
}

int PolyBasis::dim_of_order(int sub_order) const {
    if (sub_order >= q_) return dim();
    if (sub_order < 0) return 0;
    return basis_dim(d_, sub_order);
}

Eigen::VectorXd PolyBasis::eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return eval_truncated(x, q_);
}

Eigen::VectorXd PolyBasis::eval_truncated(const Eigen::Ref<const Eigen::VectorXd>& x,
                                          int sub_order) const {
    if (x.size() != d_) throw ValidationError("point dimension does not match basis");
    const int m = dim_of_order(sub_order);
    Eigen::VectorXd out(m);
    for (int t = 0; t < m; ++t) {
        double v = 1.0;
        const auto& gamma = monomials_[t];
        for (int j = 0; j < d_; ++j) {
            for (int e = 0; e < gamma[j]; ++e) v *= x(j);
        }
        out(t) = v;
    }
    return out;
}

int basis_dim(int d, int q) {
    if (d < 1 || q < 0) throw ValidationError("basis_dim requires d >= 1 and q >= 0");
    // sum_{j=0}^{q} C(d+j-1, j), accumulated without overflow for sane d,q.
    long long total = 0;
    long long binom = 1;  // C(d-1, 0)
    for (int j = 0; j <= q; ++j) {
        if (j > 0) binom = binom * (d + j - 1) / j;
        total += binom;
    }
    return static_cast<int>(total);
}

KappaResult kappa_diagnostic(const Eigen::Ref<const Eigen::VectorXd>& weights,
                             const Eigen::Ref<const Eigen::MatrixXd>& centered_rows) {
    if (weights.size() != centered_rows.rows()) {
        throw ValidationError("kappa_diagnostic: weights/rows size mismatch");
    }
    const int p = static_cast<int>(centered_rows.cols());
    if (p == 0) return {1.0, false};  // constant-only basis: no collinearity possible

    Eigen::VectorXd dvec = centered_rows.transpose() * weights;
    Eigen::MatrixXd s = centered_rows.transpose() * weights.asDiagonal() * centered_rows;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
    if (!lu.isInvertible()) {
        return {std::numeric_limits<double>::infinity(), true};
    }
    const double t = dvec.dot(lu.solve(dvec));
    if (!(t < 1.0 - 1e-12)) {
        return {std::numeric_limits<double>::infinity(), true};
    }
    return {1.0 / (1.0 - t), false};
}

}  // namespace asbf

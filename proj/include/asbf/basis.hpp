#pragma once
#include <Eigen/Core>
#include <vector>

namespace asbf {

/// Multi-index polynomial feature map of total degree <= q on R^d.
///
/// The monomial list holds each distinct multi-index gamma with |gamma| <= q
/// exactly once, in graded order: degree 0, then degree 1 in coordinate
/// order, then within each higher degree the exponent tuples in descending
/// lexicographic order (x1^2, x1*x2, ..., xd^2). This order is part of the
/// file format: coefficient vectors serialize positionally against it, and
/// the order-(q-1) basis is always a prefix of the order-q basis.
class PolyBasis {
public:
    PolyBasis(int d, int q);

    int dim() const { return static_cast<int>(monomials_.size()); }
    int d() const { return d_; }
    int order() const { return q_; }
    const std::vector<std::vector<int>>& monomials() const { return monomials_; }

    /// Number of leading monomials with total degree <= sub_order.
    int dim_of_order(int sub_order) const;

    /// Evaluates every monomial at x; the first entry is always 1.
    Eigen::VectorXd eval(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// As eval() but only the leading dim_of_order(sub_order) monomials.
    Eigen::VectorXd eval_truncated(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   int sub_order) const;

private:
    int d_;
    int q_;
    std::vector<std::vector<int>> monomials_;
};

/// Count of distinct monomials of total degree <= q in d variables:
/// sum_{j=0}^{q} C(d+j-1, j).
int basis_dim(int d, int q);

struct KappaResult {
    double kappa = 1.0;
    bool singular = false;  // S(x) numerically singular (kappa reported +inf)
};

/// Leaf-level multicollinearity diagnostic kappa = [1 - d'S^{-1}d]^{-1} for
/// weighted, centered basis rows (the constant column excluded). Weights must
/// be nonnegative and sum to 1.
KappaResult kappa_diagnostic(const Eigen::Ref<const Eigen::VectorXd>& weights,
                             const Eigen::Ref<const Eigen::MatrixXd>& centered_rows);

}  // namespace asbf

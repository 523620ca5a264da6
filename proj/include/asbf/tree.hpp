#pragma once
#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "asbf/basis.hpp"
#include "asbf/dataset.hpp"
#include "asbf/rng.hpp"
#include "asbf/split.hpp"

namespace asbf {

/// Disjoint structure/estimation (I) and split-criterion (J) index sets.
struct HonestPartition {
    std::vector<int> i_idx;
    std::vector<int> j_idx;
};

/// Uniform random subset of size floor(w*n) as the I-sample.
HonestPartition honest_split(int n, double w, RngStream& rng);

enum NodeFlag : std::uint32_t {
    kFlagDegenerate = 1u << 0,       // no direction admitted a feasible cut
    kFlagJFallback = 1u << 1,        // no J-samples: split at the I median
    kFlagSingularFallback = 1u << 2, // leaf model dropped to a lower order
};

/// Per-leaf fitted model: the arithmetic I-member mean when order == 0, or
/// least-squares coefficients against the leading dim_of_order(order)
/// monomials. `order` can sit below the configured q after a rank-deficiency
/// fallback, in which case singular_fallback is set.
struct LeafModel {
    int order = 0;
    Eigen::VectorXd beta;
    double kappa = 1.0;
    bool singular_fallback = false;

    double value_at(const PolyBasis& basis,
                    const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Fits the leaf model on the I-member rows. If the degree-q design is
/// numerically rank-deficient the order drops until it is not (order 0 always
/// succeeds). kappa is evaluated at kappa_center with uniform member weights.
LeafModel fit_leaf_model(const Eigen::Ref<const Eigen::MatrixXd>& x_rows,
                         const Eigen::Ref<const Eigen::VectorXd>& y_rows, int q,
                         const PolyBasis& basis,
                         const Eigen::Ref<const Eigen::VectorXd>& kappa_center);

/// Arena node. left < 0 marks a leaf; children partition the parent box along
/// `dir` at `threshold`, with coordinates <= threshold going left.
struct TreeNode {
    int dir = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int depth = 0;
    std::vector<int> dir_counts;  // splits per direction on the path to here

    std::vector<int> i_members;   // leaf only; indices into the training data
    int i_count = 0;
    Eigen::VectorXd box_lo, box_hi;
    LeafModel model;
    std::uint32_t flags = 0;

    bool is_leaf() const { return left < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    HonestPartition part;
    int n_leaves = 0;
    std::uint32_t flags = 0;  // OR of node flags

    const TreeNode& root() const { return nodes[0]; }
};

/// Grows one (alpha,k)-regular tree per the configured direction rule.
/// Splitting continues while a node holds >= 2k I-samples; the criterion uses
/// raw J responses when q == 0 and parent-node polynomial residuals when
/// q >= 1. basis_rows, when non-null, caches eval_basis for every training
/// row (N x basis.dim()).
Tree grow_tree(const Dataset& data, HonestPartition part, const ForestConfig& cfg,
               const PolyBasis& basis, RngStream rng,
               const Eigen::MatrixXd* basis_rows = nullptr);

/// Index of the unique leaf whose box contains x. Throws ValidationError for
/// x outside [0,1]^d.
int locate_leaf(const Tree& tree, const Eigen::Ref<const Eigen::VectorXd>& x);

double tree_predict(const Tree& tree, const Eigen::Ref<const Eigen::VectorXd>& x,
                    const PolyBasis& basis);

/// Re-fits every leaf model from the stored I members, leaving the partition
/// untouched.
void refit_leaf_models(Tree& tree, const Dataset& data, const ForestConfig& cfg,
                       const PolyBasis& basis);

}  // namespace asbf

#pragma once
#include <Eigen/Core>
#include <vector>

#include "asbf/basis.hpp"
#include "asbf/dataset.hpp"
#include "asbf/tree.hpp"

namespace asbf {

/// Ensemble of B independently grown trees sharing a config and master seed.
/// Tree b consumes only the stream derived from (seed, b), so fits are
/// bit-identical for any thread count.
struct Forest {
    ForestConfig cfg;
    int d = 0;
    int n_train = 0;
    PolyBasis basis{1, 0};
    std::vector<Tree> trees;

    int n_trees() const { return static_cast<int>(trees.size()); }
};

Forest fit_forest(const Dataset& data, ForestConfig cfg, int n_threads = 1);

/// Mean of the tree predictions at x.
double predict(const Forest& f, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Row-wise predictions for a query matrix.
Eigen::VectorXd predict_all(const Forest& f, const Eigen::Ref<const Eigen::MatrixXd>& xs,
                            int n_threads = 1);

/// Forest weights at a query point: per-tree vectors are uniform over the
/// I-members of the leaf containing x and zero elsewhere; `average` is their
/// mean over trees. Requires a fitted (in-memory) forest with stored members.
struct WeightVector {
    std::vector<Eigen::VectorXd> per_tree;
    Eigen::VectorXd average;
};

WeightVector weights_at(const Forest& f, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Single-tree weight vector (length n_train).
Eigen::VectorXd tree_weights(const Forest& f, int b,
                             const Eigen::Ref<const Eigen::VectorXd>& x);

struct DiameterSummary {
    int leaves = 0;
    double mean_diam = 0.0;
    double mean_diam2 = 0.0;
    double max_diam = 0.0;
    double max_diam2 = 0.0;
    double vol_weighted_mean_diam2 = 0.0;  // estimates E_x[diam^2(L(x))]
};

struct LeafGeometry {
    int tree = 0;
    Eigen::VectorXd sides;  // diam_j per coordinate
    double diam = 0.0;      // Euclidean diagonal
    double volume = 0.0;
    int i_count = 0;
    std::uint32_t flags = 0;
};

struct DiameterReport {
    int n = 0, d = 0, k = 0;
    double alpha = 0.0;
    std::vector<DiameterSummary> per_tree;
    DiameterSummary pooled;
    std::vector<LeafGeometry> leaves;  // every terminal leaf box, all trees
};

DiameterReport diameter_report(const Forest& f);

}  // namespace asbf

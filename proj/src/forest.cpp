#include "asbf/forest.hpp"

#include <cmath>

#include "asbf/errors.hpp"
#include "asbf/parallel.hpp"

namespace asbf {

Forest fit_forest(const Dataset& data, ForestConfig cfg, int n_threads) {
    cfg.validate(data.n(), data.dim());
    Forest f;
    f.cfg = cfg;
    f.d = data.dim();
    f.n_train = data.n();
    f.basis = PolyBasis(f.d, cfg.q);
    f.trees.resize(cfg.b_trees);

    // Algorithm 3 step 1: the polynomial features of every training row are
    // computed once and shared read-only across trees.
    Eigen::MatrixXd basis_rows;
    const Eigen::MatrixXd* basis_ptr = nullptr;
    if (cfg.q >= 1) {
        basis_rows.resize(data.n(), f.basis.dim());
        for (int i = 0; i < data.n(); ++i) {
            basis_rows.row(i) = f.basis.eval(data.x.row(i).transpose());
        }
        basis_ptr = &basis_rows;
    }

    parallel_for(cfg.b_trees, n_threads, [&](int b) {
        RngStream stream = derive_stream(cfg.seed, static_cast<std::uint64_t>(b));
        HonestPartition part = honest_split(data.n(), cfg.w, stream);
        f.trees[b] = grow_tree(data, std::move(part), cfg, f.basis, stream, basis_ptr);
    });
    return f;
}

double predict(const Forest& f, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != f.d) throw ValidationError("query dimension does not match forest");
    double sum = 0.0;
    for (const auto& tree : f.trees) sum += tree_predict(tree, x, f.basis);
    return sum / f.n_trees();
}

Eigen::VectorXd predict_all(const Forest& f, const Eigen::Ref<const Eigen::MatrixXd>& xs,
                            int n_threads) {
    Eigen::VectorXd out(xs.rows());
    parallel_for(static_cast<int>(xs.rows()), n_threads,
                 [&](int i) { out(i) = predict(f, xs.row(i).transpose()); });
    return out;
}

Eigen::VectorXd tree_weights(const Forest& f, int b,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Tree& tree = f.trees.at(b);
    const TreeNode& leaf = tree.nodes[locate_leaf(tree, x)];
    if (leaf.i_members.empty()) {
        throw ValidationError("weights require a fitted forest with stored leaf members");
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(f.n_train);
    const double unit = 1.0 / static_cast<double>(leaf.i_members.size());
    for (int idx : leaf.i_members) w(idx) = unit;
    return w;
}

WeightVector weights_at(const Forest& f, const Eigen::Ref<const Eigen::VectorXd>& x) {
    WeightVector wv;
    wv.per_tree.reserve(f.n_trees());
    wv.average = Eigen::VectorXd::Zero(f.n_train);
    for (int b = 0; b < f.n_trees(); ++b) {
        wv.per_tree.push_back(tree_weights(f, b, x));
        wv.average += wv.per_tree.back();
    }
    wv.average /= f.n_trees();
    return wv;
}

namespace {

DiameterSummary summarize(const std::vector<LeafGeometry>& leaves, std::size_t begin,
                          std::size_t end) {
    DiameterSummary s;
    double vol = 0.0;
    double vol_diam2 = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const auto& leaf = leaves[i];
        const double d2 = leaf.diam * leaf.diam;
        s.leaves += 1;
        s.mean_diam += leaf.diam;
        s.mean_diam2 += d2;
        s.max_diam = std::max(s.max_diam, leaf.diam);
        s.max_diam2 = std::max(s.max_diam2, d2);
        vol += leaf.volume;
        vol_diam2 += leaf.volume * d2;
    }
    if (s.leaves > 0) {
        s.mean_diam /= s.leaves;
        s.mean_diam2 /= s.leaves;
        s.vol_weighted_mean_diam2 = vol > 0.0 ? vol_diam2 / vol : 0.0;
    }
    return s;
}

}  // namespace

DiameterReport diameter_report(const Forest& f) {
    DiameterReport report;
    report.n = f.n_train;
    report.d = f.d;
    report.k = f.cfg.k;
    report.alpha = f.cfg.alpha;
    std::size_t cursor = 0;
    for (int b = 0; b < f.n_trees(); ++b) {
        for (const auto& node : f.trees[b].nodes) {
            if (!node.is_leaf()) continue;
            LeafGeometry g;
            g.tree = b;
            g.sides = node.box_hi - node.box_lo;
            g.diam = g.sides.norm();
            g.volume = g.sides.prod();
            g.i_count = node.i_count;
            g.flags = node.flags;
            report.leaves.push_back(std::move(g));
        }
        report.per_tree.push_back(summarize(report.leaves, cursor, report.leaves.size()));
        cursor = report.leaves.size();
    }
    report.pooled = summarize(report.leaves, 0, report.leaves.size());
    return report;
}

}  // namespace asbf

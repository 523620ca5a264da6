#include "asbf/tree.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "asbf/errors.hpp"

namespace asbf {

HonestPartition honest_split(int n, double w, RngStream& rng) {
    const int i_size = static_cast<int>(std::floor(w * n));
    if (i_size < 1) throw ConfigError("honest fraction leaves an empty I-sample");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    HonestPartition part;
    part.i_idx.assign(perm.begin(), perm.begin() + i_size);
    part.j_idx.assign(perm.begin() + i_size, perm.end());
    std::sort(part.i_idx.begin(), part.i_idx.end());
    std::sort(part.j_idx.begin(), part.j_idx.end());
    return part;
}

double LeafModel::value_at(const PolyBasis& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (order == 0) return beta(0);
    return beta.dot(basis.eval_truncated(x, order));
}

LeafModel fit_leaf_model(const Eigen::Ref<const Eigen::MatrixXd>& x_rows,
                         const Eigen::Ref<const Eigen::VectorXd>& y_rows, int q,
                         const PolyBasis& basis,
                         const Eigen::Ref<const Eigen::VectorXd>& kappa_center) {
    const int m_rows = static_cast<int>(x_rows.rows());
    if (m_rows < 1) throw ValidationError("fit_leaf_model requires at least one member");

    LeafModel model;
    for (int order = q; order >= 1; --order) {
        const int p = basis.dim_of_order(order);
        if (p > m_rows) continue;
        Eigen::MatrixXd design(m_rows, p);
        for (int i = 0; i < m_rows; ++i) {
            design.row(i) = basis.eval_truncated(x_rows.row(i).transpose(), order);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        if (qr.rank() < p) continue;
        model.order = order;
        model.beta = qr.solve(y_rows);
        model.singular_fallback = order < q;

        Eigen::MatrixXd centered(m_rows, p - 1);
        for (int i = 0; i < m_rows; ++i) {
            Eigen::VectorXd delta = x_rows.row(i).transpose() - kappa_center;
            centered.row(i) = basis.eval_truncated(delta, order).tail(p - 1);
        }
        Eigen::VectorXd weights = Eigen::VectorXd::Constant(m_rows, 1.0 / m_rows);
        model.kappa = kappa_diagnostic(weights, centered).kappa;
        return model;
    }
    model.order = 0;
    model.beta = Eigen::VectorXd::Constant(1, y_rows.mean());
    model.kappa = 1.0;
    model.singular_fallback = q > 0;
    return model;
}

namespace {

struct Grower {
    const Dataset& data;
    const ForestConfig& cfg;
    const PolyBasis& basis;
    const Eigen::MatrixXd* basis_rows;
    RngStream& rng;
    int d;
    int mtry;
    std::vector<TreeNode>& nodes;
    std::uint32_t tree_flags = 0;
    int n_leaves = 0;

    // Residuals of the J members against the parent-node least-squares fit
    // (the raw responses when q == 0).
    std::vector<double> node_residuals(const std::vector<int>& j_idx) const {
        std::vector<double> res(j_idx.size());
        if (cfg.q == 0 || j_idx.empty()) {
            for (std::size_t t = 0; t < j_idx.size(); ++t) res[t] = data.y(j_idx[t]);
            return res;
        }
        const int nj = static_cast<int>(j_idx.size());
        const int p = basis.dim();
        Eigen::MatrixXd design(nj, p);
        Eigen::VectorXd yj(nj);
        for (int t = 0; t < nj; ++t) {
            if (basis_rows != nullptr) {
                design.row(t) = basis_rows->row(j_idx[t]);
            } else {
                design.row(t) = basis.eval(data.x.row(j_idx[t]).transpose());
            }
            yj(t) = data.y(j_idx[t]);
        }
        // Rank deficiency is fine here: fitted values are the projection onto
        // the design's column space, so the residuals are still well defined.
        Eigen::VectorXd beta = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(design).solve(yj);
        Eigen::VectorXd r = yj - design * beta;
        for (int t = 0; t < nj; ++t) res[t] = r(t);
        return res;
    }

    std::optional<SplitDecision> try_direction(int dir, const std::vector<int>& i_idx,
                                               const std::vector<int>& j_idx,
                                               const std::vector<double>& residuals) const {
        std::vector<double> i_vals(i_idx.size());
        for (std::size_t t = 0; t < i_idx.size(); ++t) i_vals[t] = data.x(i_idx[t], dir);
        std::sort(i_vals.begin(), i_vals.end());
        const FeasibleRange range = feasible_range(i_vals, cfg.alpha, cfg.k);
        std::vector<std::pair<double, double>> j_pairs;
        j_pairs.reserve(j_idx.size());
        for (std::size_t t = 0; t < j_idx.size(); ++t) {
            j_pairs.emplace_back(data.x(j_idx[t], dir), residuals[t]);
        }
        return best_split(dir, std::move(j_pairs), i_vals, range);
    }

    int make_leaf(std::vector<int>&& i_idx, Eigen::VectorXd&& lo, Eigen::VectorXd&& hi,
                  std::vector<int>&& counts, int depth, std::uint32_t flags) {
        TreeNode leaf;
        leaf.depth = depth;
        leaf.dir_counts = std::move(counts);
        leaf.i_count = static_cast<int>(i_idx.size());
        leaf.box_lo = std::move(lo);
        leaf.box_hi = std::move(hi);
        leaf.flags = flags;

        const int m_rows = leaf.i_count;
        if (cfg.q == 0) {
            double mean = 0.0;
            for (int idx : i_idx) mean += data.y(idx);
            leaf.model.order = 0;
            leaf.model.beta = Eigen::VectorXd::Constant(1, mean / m_rows);
        } else {
            Eigen::MatrixXd xr(m_rows, d);
            Eigen::VectorXd yr(m_rows);
            for (int t = 0; t < m_rows; ++t) {
                xr.row(t) = data.x.row(i_idx[t]);
                yr(t) = data.y(i_idx[t]);
            }
            Eigen::VectorXd center = 0.5 * (leaf.box_lo + leaf.box_hi);
            leaf.model = fit_leaf_model(xr, yr, cfg.q, basis, center);
            if (leaf.model.singular_fallback) leaf.flags |= kFlagSingularFallback;
        }
        leaf.i_members = std::move(i_idx);
        tree_flags |= leaf.flags;
        ++n_leaves;
        nodes.push_back(std::move(leaf));
        return static_cast<int>(nodes.size()) - 1;
    }

    int grow(std::vector<int> i_idx, std::vector<int> j_idx, Eigen::VectorXd lo,
             Eigen::VectorXd hi, std::vector<int> counts, int depth,
             MtrySchedule sched) {
        const int n_i = static_cast<int>(i_idx.size());
        if (n_i < 2 * cfg.k) {
            return make_leaf(std::move(i_idx), std::move(lo), std::move(hi),
                             std::move(counts), depth, 0);
        }

        const std::vector<double> residuals = node_residuals(j_idx);

        std::optional<SplitDecision> decision;
        MtrySchedule child_sched_left, child_sched_right;
        if (cfg.rule == DirectionRule::mtry_sets) {
            for (int attempt = 0; attempt < d && !decision; ++attempt) {
                if (sched.exhausted()) sched = build_mtry_schedule(d, mtry, rng);
                const std::vector<int> candidates = advance_schedule(sched, rng);
                for (int dir : candidates) {
                    auto dec = try_direction(dir, i_idx, j_idx, residuals);
                    if (!dec) continue;
                    if (!decision || dec->criterion < decision->criterion ||
                        (dec->criterion == decision->criterion &&
                         counts[dir] < counts[decision->direction])) {
                        decision = dec;
                    }
                }
            }
            if (decision) {
                if (sched.exhausted()) {
                    child_sched_left = build_mtry_schedule(d, mtry, rng);
                    child_sched_right = build_mtry_schedule(d, mtry, rng);
                } else {
                    child_sched_left = sched;
                    child_sched_right = sched;
                }
            }
        } else {
            std::vector<int> order;
            if (cfg.rule == DirectionRule::balanced) {
                order = balanced_direction_order(counts, rng);
            } else {
                order.resize(d);
                std::iota(order.begin(), order.end(), 0);
                rng.shuffle(order);
            }
            for (int dir : order) {
                decision = try_direction(dir, i_idx, j_idx, residuals);
                if (decision) break;
            }
        }

        if (!decision) {
            // Every direction is degenerate in this node; terminal regardless
            // of size.
            return make_leaf(std::move(i_idx), std::move(lo), std::move(hi),
                             std::move(counts), depth, kFlagDegenerate);
        }

        const int dir = decision->direction;
        const double thr = decision->threshold;

        std::vector<int> i_left, i_right, j_left, j_right;
        for (int idx : i_idx) {
            (data.x(idx, dir) <= thr ? i_left : i_right).push_back(idx);
        }
        for (int idx : j_idx) {
            (data.x(idx, dir) <= thr ? j_left : j_right).push_back(idx);
        }
        assert(static_cast<int>(i_left.size()) == decision->left_i_count);
        assert(static_cast<int>(i_right.size()) == decision->right_i_count);

        const int self = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[self].dir = dir;
        nodes[self].threshold = thr;
        nodes[self].depth = depth;
        nodes[self].dir_counts = counts;
        nodes[self].box_lo = lo;
        nodes[self].box_hi = hi;
        if (decision->j_fallback) {
            nodes[self].flags |= kFlagJFallback;
            tree_flags |= kFlagJFallback;
        }

        std::vector<int> child_counts = counts;
        child_counts[dir] += 1;

        Eigen::VectorXd left_hi = hi;
        left_hi(dir) = thr;
        Eigen::VectorXd right_lo = lo;
        right_lo(dir) = thr;

        const int left = grow(std::move(i_left), std::move(j_left), std::move(lo),
                              std::move(left_hi), child_counts, depth + 1,
                              std::move(child_sched_left));
        const int right = grow(std::move(i_right), std::move(j_right),
                               std::move(right_lo), std::move(hi), child_counts,
                               depth + 1, std::move(child_sched_right));
        nodes[self].left = left;
        nodes[self].right = right;
        return self;
    }
};

}  // namespace

Tree grow_tree(const Dataset& data, HonestPartition part, const ForestConfig& cfg,
               const PolyBasis& basis, RngStream rng,
               const Eigen::MatrixXd* basis_rows) {
    const int d = data.dim();
    if (static_cast<int>(part.i_idx.size()) < cfg.k) {
        throw ConfigError("tree I-sample smaller than the minimum leaf size k");
    }
    Tree tree;
    Grower grower{data, cfg, basis, basis_rows, rng, d, cfg.resolved_mtry(d), tree.nodes};
    MtrySchedule sched;
    if (cfg.rule == DirectionRule::mtry_sets) {
        sched = build_mtry_schedule(d, grower.mtry, grower.rng);
    }
    grower.grow(part.i_idx, part.j_idx, Eigen::VectorXd::Zero(d),
                Eigen::VectorXd::Ones(d), std::vector<int>(d, 0), 0, std::move(sched));
    tree.part = std::move(part);
    tree.n_leaves = grower.n_leaves;
    tree.flags = grower.tree_flags;
    return tree;
}

int locate_leaf(const Tree& tree, const Eigen::Ref<const Eigen::VectorXd>& x) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (!(x(j) >= 0.0 && x(j) <= 1.0)) {
            throw ValidationError("query point outside [0,1]^d (use clamping upstream)");
        }
    }
    int idx = 0;
    while (!tree.nodes[idx].is_leaf()) {
        const TreeNode& node = tree.nodes[idx];
        idx = (x(node.dir) <= node.threshold) ? node.left : node.right;
    }
    return idx;
}

double tree_predict(const Tree& tree, const Eigen::Ref<const Eigen::VectorXd>& x,
                    const PolyBasis& basis) {
    return tree.nodes[locate_leaf(tree, x)].model.value_at(basis, x);
}

void refit_leaf_models(Tree& tree, const Dataset& data, const ForestConfig& cfg,
                       const PolyBasis& basis) {
    for (auto& node : tree.nodes) {
        if (!node.is_leaf()) continue;
        const int m_rows = static_cast<int>(node.i_members.size());
        if (m_rows == 0) throw ValidationError("cannot refit a tree without stored members");
        if (cfg.q == 0) {
            double mean = 0.0;
            for (int idx : node.i_members) mean += data.y(idx);
            node.model.order = 0;
            node.model.beta = Eigen::VectorXd::Constant(1, mean / m_rows);
            node.model.kappa = 1.0;
            node.model.singular_fallback = false;
        } else {
            Eigen::MatrixXd xr(m_rows, data.dim());
            Eigen::VectorXd yr(m_rows);
            for (int t = 0; t < m_rows; ++t) {
                xr.row(t) = data.x.row(node.i_members[t]);
                yr(t) = data.y(node.i_members[t]);
            }
            Eigen::VectorXd center = 0.5 * (node.box_lo + node.box_hi);
            node.model = fit_leaf_model(xr, yr, cfg.q, basis, center);
        }
    }
}

}  // namespace asbf

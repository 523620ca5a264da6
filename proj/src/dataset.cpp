#include "asbf/dataset.hpp"

#include <cmath>
#include <sstream>

namespace asbf {

Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y,
                     std::optional<Eigen::VectorXi> treat) {
    const auto n = x.rows();
    const auto d = x.cols();
    if (n < 1 || d < 1) {
        throw ValidationError("dataset must have at least one row and one covariate");
    }
    if (y.size() != n) {
        std::ostringstream msg;
        msg << "response length " << y.size() << " does not match " << n << " rows";
        throw ValidationError(msg.str());
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double v = x(i, j);
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                std::ostringstream msg;
                msg << "covariate out of [0,1] at row " << i << ", column " << j
                    << " (value " << v << ")";
                throw ValidationError(msg.str());
            }
        }
        if (!std::isfinite(y(i))) {
            std::ostringstream msg;
            msg << "non-finite response at row " << i;
            throw ValidationError(msg.str());
        }
    }
    if (treat) {
        if (treat->size() != n) {
            throw ValidationError("treatment length does not match number of rows");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const int a = (*treat)(i);
            if (a != 0 && a != 1) {
                std::ostringstream msg;
                msg << "treatment indicator not in {0,1} at row " << i;
                throw ValidationError(msg.str());
            }
        }
    }
    return Dataset{std::move(x), std::move(y), std::move(treat)};
}

Dataset dataset_from_rows(const std::vector<std::vector<double>>& rows,
                          bool has_treatment) {
    if (rows.empty()) throw ValidationError("no data rows");
    const std::size_t width = rows.front().size();
    const std::size_t extra = has_treatment ? 2 : 1;
    if (width < extra + 1) {
        throw ValidationError("rows must contain at least one covariate plus response");
    }
    const std::size_t d = width - extra;
    Eigen::MatrixXd x(rows.size(), d);
    Eigen::VectorXd y(rows.size());
    Eigen::VectorXi a(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != width) {
            std::ostringstream msg;
            msg << "inconsistent width at row " << i << ": expected " << width
                << " values, got " << rows[i].size();
            throw ValidationError(msg.str());
        }
        for (std::size_t j = 0; j < d; ++j) x(i, j) = rows[i][j];
        y(i) = rows[i][d];
        if (has_treatment) {
            const double av = rows[i][d + 1];
            if (av != 0.0 && av != 1.0) {
                std::ostringstream msg;
                msg << "treatment indicator not in {0,1} at row " << i;
                throw ValidationError(msg.str());
            }
            a(i) = static_cast<int>(av);
        }
    }
    return make_dataset(std::move(x), std::move(y),
                        has_treatment ? std::optional<Eigen::VectorXi>(std::move(a))
                                      : std::nullopt);
}

Eigen::MatrixXd minmax_rescale(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double lo = x.col(j).minCoeff();
        const double hi = x.col(j).maxCoeff();
        if (hi > lo) {
            out.col(j) = (x.col(j).array() - lo) / (hi - lo);
        } else {
            out.col(j).setConstant(0.5);
        }
    }
    return out;
}

std::string to_string(DirectionRule rule) {
    switch (rule) {
        case DirectionRule::balanced: return "balanced";
        case DirectionRule::mtry_sets: return "mtry";
        case DirectionRule::random_uniform: return "random";
    }
    return "balanced";
}

DirectionRule direction_rule_from_string(const std::string& s) {
    if (s == "balanced") return DirectionRule::balanced;
    if (s == "mtry") return DirectionRule::mtry_sets;
    if (s == "random") return DirectionRule::random_uniform;
    throw ValidationError("unknown direction rule: " + s);
}

void ForestConfig::validate(int n, int d) const {
    if (b_trees < 1) throw ConfigError("b_trees must be >= 1");
    if (!(alpha > 0.0 && alpha <= 0.5)) throw ConfigError("alpha must lie in (0, 0.5]");
    if (!(w > 0.0 && w <= 1.0)) throw ConfigError("w must lie in (0, 1]");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (q < 0) throw ConfigError("q must be >= 0");
    if (mtry != 0 && (mtry < 1 || mtry > d)) {
        std::ostringstream msg;
        msg << "mtry " << mtry << " outside {1.." << d << "}";
        throw ConfigError(msg.str());
    }
    const int i_size = static_cast<int>(std::floor(w * n));
    if (k > i_size) {
        std::ostringstream msg;
        msg << "infeasible config: k = " << k << " exceeds floor(w*N) = " << i_size;
        throw ConfigError(msg.str());
    }
}

bool operator==(const ForestConfig& a, const ForestConfig& b) {
    return a.b_trees == b.b_trees && a.alpha == b.alpha && a.w == b.w && a.k == b.k &&
           a.mtry == b.mtry && a.q == b.q && a.seed == b.seed && a.rule == b.rule;
}

}  // namespace asbf

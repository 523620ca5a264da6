#pragma once
#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asbf/errors.hpp"

namespace asbf {

/// Covariates on [0,1]^d, a real response, and an optional binary treatment.
/// Immutable after construction; shareable across threads.
struct Dataset {
    Eigen::MatrixXd x;  // N x d
    Eigen::VectorXd y;  // N
    std::optional<Eigen::VectorXi> treat;  // entries in {0,1}; ATE workflows only

    int n() const { return static_cast<int>(x.rows()); }
    int dim() const { return static_cast<int>(x.cols()); }
    bool has_treatment() const { return treat.has_value(); }
};

/// Validates the Dataset invariants and returns the assembled value.
/// Throws ValidationError naming the offending row/column.
Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y,
                     std::optional<Eigen::VectorXi> treat = std::nullopt);

/// Builds a Dataset from raw rectangular rows laid out as
/// [x_1 .. x_d, y] or [x_1 .. x_d, y, a] when has_treatment is set.
Dataset dataset_from_rows(const std::vector<std::vector<double>>& rows,
                          bool has_treatment = false);

/// Per-column min-max rescaling onto [0,1]; constant columns map to 0.5.
Eigen::MatrixXd minmax_rescale(const Eigen::MatrixXd& x);

enum class DirectionRule {
    balanced,        // least-split direction, random tie-break
    mtry_sets,       // rotated candidate index sets of size mtry
    random_uniform,  // baseline: direction drawn uniformly each split
};

std::string to_string(DirectionRule rule);
DirectionRule direction_rule_from_string(const std::string& s);

/// All forest hyperparameters. `mtry == 0` means "all d directions" and is
/// resolved against the data dimension at fit time.
struct ForestConfig {
    int b_trees = 200;
    double alpha = 0.5;          // in (0, 0.5]
    double w = 0.5;              // honest fraction, in (0, 1]
    int k = 20;                  // min leaf size on the I-sample
    int mtry = 0;                // in {1..d} when direction_rule == mtry_sets
    int q = 0;                   // leaf polynomial order; 0 = local averaging
    std::uint64_t seed = 0;
    DirectionRule rule = DirectionRule::balanced;

    /// Throws ConfigError if the configuration is infeasible for an
    /// n-row, d-column dataset (e.g. k > floor(w*n)).
    void validate(int n, int d) const;

    int resolved_mtry(int d) const { return mtry == 0 ? d : mtry; }
};

bool operator==(const ForestConfig& a, const ForestConfig& b);

}  // namespace asbf

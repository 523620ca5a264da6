#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "asbf/dataset.hpp"
#include "asbf/forest.hpp"
#include "asbf/rng.hpp"

namespace asbf {

/// Fold id (0..K-1) per row; fold sizes differ by at most one.
std::vector<int> kfold(int n, int K, RngStream& rng);

/// Doubly robust (AIPW) score psi(W; eta). Requires pi in (0,1).
double aipw_score(double y, int a, double mu1, double mu0, double pi);

/// Cartesian tuning grid over (alpha, k, mtry, q); empty vectors inherit the
/// corresponding base-config field.
struct TuneGrid {
    std::vector<double> alphas;
    std::vector<int> ks;
    std::vector<int> mtrys;
    std::vector<int> qs;

    bool is_empty() const {
        return alphas.empty() && ks.empty() && mtrys.empty() && qs.empty();
    }
    std::vector<ForestConfig> expand(const ForestConfig& base) const;
    static TuneGrid default_grid(int d);
    static TuneGrid default_sparse_grid(int d);  // adds mtry in {1, ceil(d/3), d}
};

/// Picks the grid config minimizing validation MSE (identically the Brier
/// score when responses are 0/1 propensity labels) on a seeded train/val
/// split; ties break toward smaller k, then larger alpha. Infeasible
/// candidates (k too large for the inner training set) are skipped.
ForestConfig tune_config(const Dataset& train, const TuneGrid& grid,
                         double val_fraction, const ForestConfig& base,
                         int tune_trees, std::uint64_t seed, int n_threads = 1);

struct NuisanceSpec {
    ForestConfig base;
    TuneGrid grid;  // empty -> base used as-is
};

struct AteOptions {
    int folds = 5;
    double level = 0.95;
    double val_fraction = 0.2;
    int tune_trees = 50;
    double overlap_eps = 0.01;
    double pi_clip = 0.0;  // 0 disables clipping; otherwise clip to [c, 1-c]
    std::uint64_t seed = 0;
    int n_threads = 1;
    NuisanceSpec mu1, mu0, pi;
};

struct OverlapReport {
    double min_pi = 1.0;
    double max_pi = 0.0;
    std::vector<int> flagged;  // indices with pi outside (eps, 1-eps)
    double eps = 0.01;
    bool clean() const { return flagged.empty(); }
};

/// Diagnostic only: reports min/max and flags values outside (eps, 1-eps).
/// No truncation is applied here.
OverlapReport overlap_check(const std::vector<double>& pi_hats, double eps = 0.01);

struct FoldDiagnostics {
    int fold = 0;
    int n_eval = 0;
    double score_mean = 0.0;
    double pi_min = 1.0;
    double pi_max = 0.0;
    int n_overlap_flags = 0;
    ForestConfig mu1_cfg, mu0_cfg, pi_cfg;
    std::vector<int> train_rows;  // complement rows used to fit this fold's nuisances
};

struct AteResult {
    double theta_hat = 0.0;
    double sigma_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.95;
    int n = 0;
    int folds = 0;
    std::vector<double> scores;  // per-row psi, original row order
    std::vector<int> fold_of;    // fold assignment per row
    std::vector<FoldDiagnostics> fold_diag;
    OverlapReport overlap;
};

/// Cross-fitted AIPW estimate with per-fold ASBF nuisances, validation-based
/// tuning, variance estimate, and normal confidence interval.
AteResult estimate_ate(const Dataset& data, const AteOptions& opt);

using NuisanceFn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Plug-in variant evaluating fixed nuisance functions (no fitting); used for
/// oracle and double-robustness checks.
AteResult estimate_ate_with_nuisances(const Dataset& data, const NuisanceFn& mu1,
                                      const NuisanceFn& mu0, const NuisanceFn& pi,
                                      double level = 0.95);

}  // namespace asbf

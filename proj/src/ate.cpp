#include "asbf/ate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "asbf/stats.hpp"

namespace asbf {

namespace {

// Purpose tags for stream derivation inside the ATE pipeline.
enum : std::uint64_t { kTagFolds = 1u << 20, kTagTune = 2u << 20, kTagNuisance = 3u << 20 };

Dataset subset_rows(const Dataset& data, const std::vector<int>& rows,
                    bool keep_treatment, bool response_is_treatment = false) {
    Eigen::MatrixXd x(rows.size(), data.dim());
    Eigen::VectorXd y(rows.size());
    Eigen::VectorXi a(rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
        x.row(t) = data.x.row(rows[t]);
        y(t) = response_is_treatment ? static_cast<double>((*data.treat)(rows[t]))
                                     : data.y(rows[t]);
        if (keep_treatment) a(t) = (*data.treat)(rows[t]);
    }
    return make_dataset(std::move(x), std::move(y),
                        keep_treatment ? std::optional<Eigen::VectorXi>(std::move(a))
                                       : std::nullopt);
}

}  // namespace

std::vector<int> kfold(int n, int K, RngStream& rng) {
    if (K < 2) throw ConfigError("cross-fitting requires K >= 2");
    if (K > n) throw ConfigError("more folds than samples");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<int> fold_of(n);
    const int base = n / K;
    const int remainder = n % K;
    int cursor = 0;
    for (int f = 0; f < K; ++f) {
        const int size = base + (f < remainder ? 1 : 0);
        for (int t = 0; t < size; ++t) fold_of[perm[cursor++]] = f;
    }
    return fold_of;
}

double aipw_score(double y, int a, double mu1, double mu0, double pi) {
    if (!(pi > 0.0 && pi < 1.0)) {
        std::ostringstream msg;
        msg << "propensity " << pi << " outside (0,1); raise k for the propensity "
               "forest or enable clipping";
        throw ValidationError(msg.str());
    }
    return mu1 - mu0 + a * (y - mu1) / pi - (1 - a) * (y - mu0) / (1.0 - pi);
}

std::vector<ForestConfig> TuneGrid::expand(const ForestConfig& base) const {
    const std::vector<double> as = alphas.empty() ? std::vector<double>{base.alpha} : alphas;
    const std::vector<int> ks_ = ks.empty() ? std::vector<int>{base.k} : ks;
    const std::vector<int> ms = mtrys.empty() ? std::vector<int>{base.mtry} : mtrys;
    const std::vector<int> qs_ = qs.empty() ? std::vector<int>{base.q} : qs;
    std::vector<ForestConfig> out;
    for (double a : as)
        for (int k : ks_)
            for (int m : ms)
                for (int q : qs_) {
                    ForestConfig cfg = base;
                    cfg.alpha = a;
                    cfg.k = k;
                    cfg.mtry = m;
                    cfg.q = q;
                    out.push_back(cfg);
                }
    return out;
}

TuneGrid TuneGrid::default_grid(int d) {
    TuneGrid g;
    g.alphas = {0.1, 0.25, 0.5};
    g.ks = {5, 10, 20, 40, 80};
    // mtry candidates only matter under the mtry_sets rule; callers tuning a
    // sparse forest add {1, ceil(d/3), d}.
    (void)d;
    return g;
}

TuneGrid TuneGrid::default_sparse_grid(int d) {
    TuneGrid g = default_grid(d);
    g.mtrys = {1, (d + 2) / 3, d};
    std::sort(g.mtrys.begin(), g.mtrys.end());
    g.mtrys.erase(std::unique(g.mtrys.begin(), g.mtrys.end()), g.mtrys.end());
    return g;
}

ForestConfig tune_config(const Dataset& train, const TuneGrid& grid,
                         double val_fraction, const ForestConfig& base,
                         int tune_trees, std::uint64_t seed, int n_threads) {
    std::vector<ForestConfig> candidates = grid.expand(base);
    if (candidates.empty()) throw ConfigError("empty tuning grid");
    if (candidates.size() == 1) return candidates.front();

    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw ConfigError("validation fraction must lie in (0,1)");
    }
    const int n = train.n();
    const int n_val = std::max(1, static_cast<int>(std::floor(val_fraction * n)));
    if (n_val >= n) throw ConfigError("validation split leaves no training rows");

    RngStream split_rng = derive_stream(seed, kTagTune);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    split_rng.shuffle(perm);
    std::vector<int> val_rows(perm.begin(), perm.begin() + n_val);
    std::vector<int> fit_rows(perm.begin() + n_val, perm.end());
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(fit_rows.begin(), fit_rows.end());

    Dataset fit_data = subset_rows(train, fit_rows, false);
    Eigen::MatrixXd val_x(n_val, train.dim());
    Eigen::VectorXd val_y(n_val);
    for (int t = 0; t < n_val; ++t) {
        val_x.row(t) = train.x.row(val_rows[t]);
        val_y(t) = train.y(val_rows[t]);
    }

    const ForestConfig* best = nullptr;
    double best_mse = 0.0;
    for (const auto& cand : candidates) {
        if (cand.k > static_cast<int>(std::floor(cand.w * fit_data.n()))) continue;
        ForestConfig cfg = cand;
        cfg.b_trees = tune_trees;
        cfg.seed = derive_seed(seed, kTagTune + 1);
        Forest forest = fit_forest(fit_data, cfg, n_threads);
        const Eigen::VectorXd pred = predict_all(forest, val_x, n_threads);
        const double mse = (pred - val_y).squaredNorm() / n_val;
        const bool better =
            best == nullptr || mse < best_mse ||
            (mse == best_mse && (cand.k < best->k ||
                                 (cand.k == best->k && cand.alpha > best->alpha)));
        if (better) {
            best = &cand;
            best_mse = mse;
        }
    }
    if (best == nullptr) {
        throw ConfigError("no feasible tuning candidate for the given training size");
    }
    return *best;
}

OverlapReport overlap_check(const std::vector<double>& pi_hats, double eps) {
    OverlapReport report;
    report.eps = eps;
    for (std::size_t i = 0; i < pi_hats.size(); ++i) {
        const double p = pi_hats[i];
        report.min_pi = std::min(report.min_pi, p);
        report.max_pi = std::max(report.max_pi, p);
        if (!(p > eps && p < 1.0 - eps)) report.flagged.push_back(static_cast<int>(i));
    }
    return report;
}

namespace {

void finalize_result(AteResult& res) {
    const int n = static_cast<int>(res.scores.size());
    double sum = 0.0;
    for (double s : res.scores) sum += s;
    res.theta_hat = sum / n;
    double ss = 0.0;
    for (double s : res.scores) ss += (s - res.theta_hat) * (s - res.theta_hat);
    res.sigma_hat = std::sqrt(ss / n);
    const double z = normal_quantile(1.0 - (1.0 - res.level) / 2.0);
    const double half = z * res.sigma_hat / std::sqrt(static_cast<double>(n));
    res.ci_low = res.theta_hat - half;
    res.ci_high = res.theta_hat + half;
    res.n = n;
}

}  // namespace

AteResult estimate_ate(const Dataset& data, const AteOptions& opt) {
    if (!data.has_treatment()) {
        throw ValidationError("ATE estimation requires a treatment column");
    }
    const int n = data.n();
    const Eigen::VectorXi& a = *data.treat;
    if (a.sum() == 0 || a.sum() == n) {
        throw ValidationError("degenerate data: a single treatment arm");
    }

    RngStream fold_rng = derive_stream(opt.seed, kTagFolds);
    std::vector<int> fold_of = kfold(n, opt.folds, fold_rng);

    AteResult res;
    res.level = opt.level;
    res.folds = opt.folds;
    res.fold_of = fold_of;
    res.scores.assign(n, 0.0);
    res.fold_diag.resize(opt.folds);
    std::vector<double> all_pi;
    all_pi.reserve(n);

    for (int fold = 0; fold < opt.folds; ++fold) {
        std::vector<int> eval_rows, train_rows, treated_rows, control_rows;
        for (int i = 0; i < n; ++i) {
            if (fold_of[i] == fold) {
                eval_rows.push_back(i);
            } else {
                train_rows.push_back(i);
                (a(i) == 1 ? treated_rows : control_rows).push_back(i);
            }
        }
        if (treated_rows.empty() || control_rows.empty()) {
            std::ostringstream msg;
            msg << "fold " << fold << ": a treatment arm is empty in the training complement";
            throw ValidationError(msg.str());
        }

        Dataset d_mu1 = subset_rows(data, treated_rows, false);
        Dataset d_mu0 = subset_rows(data, control_rows, false);
        Dataset d_pi = subset_rows(data, train_rows, false, /*response_is_treatment=*/true);

        auto fit_nuisance = [&](const Dataset& train, const NuisanceSpec& spec,
                                std::uint64_t tag) {
            ForestConfig cfg = spec.base;
            const std::uint64_t sub_seed = derive_seed(opt.seed, kTagNuisance + tag);
            if (!spec.grid.is_empty()) {
                cfg = tune_config(train, spec.grid, opt.val_fraction, spec.base,
                                  opt.tune_trees, sub_seed, opt.n_threads);
            }
            cfg.b_trees = spec.base.b_trees;
            cfg.seed = derive_seed(sub_seed, 0xf17);
            return fit_forest(train, cfg, opt.n_threads);
        };

        const std::uint64_t fold_tag = static_cast<std::uint64_t>(fold) * 8;
        Forest f_mu1 = fit_nuisance(d_mu1, opt.mu1, fold_tag + 0);
        Forest f_mu0 = fit_nuisance(d_mu0, opt.mu0, fold_tag + 1);
        Forest f_pi = fit_nuisance(d_pi, opt.pi, fold_tag + 2);

        FoldDiagnostics& diag = res.fold_diag[fold];
        diag.fold = fold;
        diag.n_eval = static_cast<int>(eval_rows.size());
        diag.mu1_cfg = f_mu1.cfg;
        diag.mu0_cfg = f_mu0.cfg;
        diag.pi_cfg = f_pi.cfg;
        diag.train_rows = train_rows;

        std::vector<double> fold_pi(eval_rows.size());
        double score_sum = 0.0;
        for (std::size_t t = 0; t < eval_rows.size(); ++t) {
            const int i = eval_rows[t];
            const Eigen::VectorXd xi = data.x.row(i).transpose();
            const double mu1 = predict(f_mu1, xi);
            const double mu0 = predict(f_mu0, xi);
            double pi = predict(f_pi, xi);
            if (opt.pi_clip > 0.0) {
                pi = std::clamp(pi, opt.pi_clip, 1.0 - opt.pi_clip);
            }
            fold_pi[t] = pi;
            const double score = aipw_score(data.y(i), a(i), mu1, mu0, pi);
            res.scores[i] = score;
            score_sum += score;
            diag.pi_min = std::min(diag.pi_min, pi);
            diag.pi_max = std::max(diag.pi_max, pi);
        }
        diag.score_mean = score_sum / diag.n_eval;
        diag.n_overlap_flags =
            static_cast<int>(overlap_check(fold_pi, opt.overlap_eps).flagged.size());
        all_pi.insert(all_pi.end(), fold_pi.begin(), fold_pi.end());
    }

    res.overlap = overlap_check(all_pi, opt.overlap_eps);
    finalize_result(res);
    return res;
}

AteResult estimate_ate_with_nuisances(const Dataset& data, const NuisanceFn& mu1,
                                      const NuisanceFn& mu0, const NuisanceFn& pi,
                                      double level) {
    if (!data.has_treatment()) {
        throw ValidationError("ATE estimation requires a treatment column");
    }
    const int n = data.n();
    AteResult res;
    res.level = level;
    res.folds = 0;
    res.scores.resize(n);
    std::vector<double> pis(n);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd xi = data.x.row(i).transpose();
        pis[i] = pi(xi);
        res.scores[i] = aipw_score(data.y(i), (*data.treat)(i), mu1(xi), mu0(xi), pis[i]);
    }
    res.overlap = overlap_check(pis);
    finalize_result(res);
    return res;
}

}  // namespace asbf

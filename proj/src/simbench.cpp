#include "asbf/simbench.hpp"

#include <cmath>
#include <numbers>

#include "asbf/parallel.hpp"
#include "asbf/rng.hpp"

namespace asbf {

std::string to_string(DgpKind kind) {
    switch (kind) {
        case DgpKind::friedman_a: return "friedman_a";
        case DgpKind::exp_sparse_b: return "exp_sparse_b";
        case DgpKind::ate_a: return "ate_a";
        case DgpKind::ate_b: return "ate_b";
    }
    return "friedman_a";
}

DgpKind dgp_kind_from_string(const std::string& s) {
    if (s == "friedman_a" || s == "a") return DgpKind::friedman_a;
    if (s == "exp_sparse_b" || s == "b") return DgpKind::exp_sparse_b;
    if (s == "ate_a") return DgpKind::ate_a;
    if (s == "ate_b") return DgpKind::ate_b;
    throw ValidationError("unknown DGP: " + s);
}

void DgpSpec::validate() const {
    if (n < 1 || d < 1) throw ValidationError("DGP needs n >= 1 and d >= 1");
    if (noise_sd < 0.0) throw ValidationError("noise_sd must be nonnegative");
    if (which == DgpKind::friedman_a && d < 5) {
        throw ValidationError("friedman_a requires d >= 5");
    }
    if (which == DgpKind::exp_sparse_b && (s < 1 || s > d)) {
        throw ValidationError("exp_sparse_b requires 1 <= s <= d");
    }
}

namespace {

// Circular pairwise interaction sum_{j<d} x_j x_{j+1} + x_d x_1 shared by the
// ATE outcome models.
double ring_sum(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const int d = static_cast<int>(x.size());
    double s = 0.0;
    for (int j = 0; j + 1 < d; ++j) s += x(j) * x(j + 1);
    s += x(d - 1) * x(0);
    return s;
}

}  // namespace

SimData generate(const DgpSpec& spec) {
    spec.validate();
    RngStream rng = derive_stream(spec.seed, 0xd9b);
    const int n = spec.n;
    const int d = spec.d;

    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = rng.next_double();
    }

    SimData sim;
    switch (spec.which) {
        case DgpKind::friedman_a: {
            const double c = spec.friedman_center;
            sim.mean_fn = [c](const Eigen::Ref<const Eigen::VectorXd>& p) {
                return 10.0 * std::sin(std::numbers::pi * p(0) * p(1)) +
                       20.0 * (p(2) - c) * (p(2) - c) + 10.0 * p(3) + 5.0 * p(4);
            };
            break;
        }
        case DgpKind::exp_sparse_b: {
            const int s = spec.s;
            sim.mean_fn = [s](const Eigen::Ref<const Eigen::VectorXd>& p) {
                double acc = 0.0;
                for (int j = 0; j < s; ++j) acc += p(j);
                return 20.0 * std::exp((acc - 0.5 * s) / std::sqrt(static_cast<double>(s)));
            };
            break;
        }
        case DgpKind::ate_a: {
            const double dd = static_cast<double>(d);
            sim.pi_fn = [](const Eigen::Ref<const Eigen::VectorXd>& p) {
                const double mean_x = p.mean();
                return (mean_x + 1.1) / (mean_x + 2.0);
            };
            sim.mu1_fn = [dd](const Eigen::Ref<const Eigen::VectorXd>& p) {
                return ring_sum(p) / dd;
            };
            sim.mu0_fn = [dd](const Eigen::Ref<const Eigen::VectorXd>& p) {
                return -ring_sum(p) / dd;
            };
            // E[ring_sum] = d/4 for iid Uniform[0,1], so theta = 2(d/4)/d.
            sim.theta_true = 0.5;
            break;
        }
        case DgpKind::ate_b: {
            const double dd = static_cast<double>(d);
            sim.pi_fn = [dd](const Eigen::Ref<const Eigen::VectorXd>& p) {
                const double sum_x = p.sum();
                return sum_x / (sum_x + dd);
            };
            sim.mu1_fn = [](const Eigen::Ref<const Eigen::VectorXd>& p) {
                return 2.0 * ring_sum(p);
            };
            sim.mu0_fn = [](const Eigen::Ref<const Eigen::VectorXd>& p) {
                return -2.0 * ring_sum(p);
            };
            sim.theta_true = dd;  // 4 * E[ring_sum] = 4 * d/4
            break;
        }
    }

    Eigen::VectorXd y(n);
    if (spec.which == DgpKind::friedman_a || spec.which == DgpKind::exp_sparse_b) {
        for (int i = 0; i < n; ++i) {
            y(i) = sim.mean_fn(x.row(i).transpose()) + spec.noise_sd * rng.next_normal();
        }
        sim.data = make_dataset(std::move(x), std::move(y));
    } else {
        Eigen::VectorXi a(n);
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd xi = x.row(i).transpose();
            a(i) = rng.next_bernoulli(sim.pi_fn(xi)) ? 1 : 0;
            const double eps = spec.noise_sd * rng.next_normal();
            const double base = a(i) == 1 ? sim.mu1_fn(xi) : sim.mu0_fn(xi);
            y(i) = base + eps;
        }
        sim.data = make_dataset(std::move(x), std::move(y), std::move(a));
    }
    return sim;
}

double rmse(const Eigen::Ref<const Eigen::VectorXd>& predictions,
            const Eigen::Ref<const Eigen::VectorXd>& truths) {
    if (predictions.size() != truths.size() || predictions.size() == 0) {
        throw ValidationError("rmse requires equal nonzero lengths");
    }
    return std::sqrt((predictions - truths).squaredNorm() / predictions.size());
}

Forest baseline_random_direction_fit(const Dataset& data, ForestConfig cfg,
                                     int n_threads) {
    cfg.rule = DirectionRule::random_uniform;
    return fit_forest(data, cfg, n_threads);
}

RateFit fit_rate_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4) throw ValidationError("rate fit needs at least 4 grid points");
    std::vector<double> lx, ly;
    for (const auto& [ratio, stat] : points) {
        if (!(ratio > 0.0)) throw ValidationError("rate fit: nonpositive ratio");
        if (!(stat > 0.0)) throw ValidationError("rate fit: nonpositive statistic");
        lx.push_back(std::log(ratio));
        ly.push_back(std::log(stat));
    }
    const SlopeFit fit = ols_slope(lx, ly);
    return RateFit{fit.slope, fit.stderr_slope, fit.intercept, fit.n_points};
}

std::vector<double> RmseExperiment::values_for(const std::string& method) const {
    std::vector<double> out;
    for (const auto& cell : cells) {
        if (cell.method == method) out.push_back(cell.rmse);
    }
    return out;
}

RmseExperiment run_rmse_experiment(const RmseExperimentOptions& opt) {
    if (opt.methods.empty()) throw ConfigError("no methods configured");
    RmseExperiment exp;
    for (const auto& m : opt.methods) exp.method_names.push_back(m.name);
    const int n_methods = static_cast<int>(opt.methods.size());
    exp.cells.resize(static_cast<std::size_t>(opt.reps) * n_methods);

    parallel_for(opt.reps, opt.n_threads, [&](int rep) {
        DgpSpec spec = opt.dgp;
        spec.seed = derive_seed(opt.seed, 2 * rep);
        const SimData sim = generate(spec);

        RngStream test_rng = derive_stream(opt.seed, 2 * rep + 1);
        Eigen::MatrixXd test_x(opt.n_test, spec.d);
        Eigen::VectorXd truth(opt.n_test);
        for (int i = 0; i < opt.n_test; ++i) {
            for (int j = 0; j < spec.d; ++j) test_x(i, j) = test_rng.next_double();
            truth(i) = sim.mean_fn(test_x.row(i).transpose());
        }

        // One tuning seed per replicate: every method sees the same
        // train/validation split.
        const std::uint64_t tune_seed = derive_seed(opt.seed, 0x70000 + rep);
        for (int m = 0; m < n_methods; ++m) {
            const MethodSpec& method = opt.methods[m];
            ForestConfig cfg = method.base;
            if (!method.grid.is_empty()) {
                cfg = tune_config(sim.data, method.grid, opt.val_fraction, method.base,
                                  opt.tune_trees, tune_seed, 1);
                cfg.b_trees = method.base.b_trees;
            }
            cfg.seed = derive_seed(opt.seed, 0x90000 + rep * 64 + m);
            const Forest forest = fit_forest(sim.data, cfg, 1);
            const Eigen::VectorXd pred = predict_all(forest, test_x, 1);
            exp.cells[static_cast<std::size_t>(rep) * n_methods + m] =
                RmseCell{rep, method.name, rmse(pred, truth)};
        }
    });
    return exp;
}

DiamRateResult run_diam_rate(const DiamRateOptions& opt) {
    if (opt.n_grid.size() < 4) throw ConfigError("diam rate needs >= 4 grid sizes");
    DiamRateResult result;
    result.points.resize(opt.n_grid.size());

    for (std::size_t g = 0; g < opt.n_grid.size(); ++g) {
        const int n = opt.n_grid[g];
        std::vector<double> means(opt.reps), maxes(opt.reps);
        parallel_for(opt.reps, opt.n_threads, [&](int rep) {
            RngStream rng = derive_stream(opt.seed, 0xd100 + g * 1000 + rep);
            Eigen::MatrixXd x(n, opt.d);
            Eigen::VectorXd y(n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < opt.d; ++j) x(i, j) = rng.next_double();
                y(i) = rng.next_normal();
            }
            const Dataset data = make_dataset(std::move(x), std::move(y));
            ForestConfig cfg;
            cfg.b_trees = 1;
            cfg.alpha = opt.alpha;
            cfg.w = opt.w;
            cfg.k = opt.k;
            cfg.q = opt.q;
            cfg.seed = rng.next_u64();
            const Forest forest = fit_forest(data, cfg, 1);
            const DiameterReport report = diameter_report(forest);
            means[rep] = report.pooled.vol_weighted_mean_diam2;
            maxes[rep] = report.pooled.max_diam2;
        });
        double mean_sum = 0.0, max_sum = 0.0;
        for (int r = 0; r < opt.reps; ++r) {
            mean_sum += means[r];
            max_sum += maxes[r];
        }
        result.points[g] = DiamRatePoint{n, static_cast<double>(n) / opt.k,
                                         mean_sum / opt.reps, max_sum / opt.reps};
    }

    std::vector<std::pair<double, double>> mean_pts, max_pts;
    for (const auto& p : result.points) {
        mean_pts.emplace_back(p.ratio, p.mean_diam2);
        max_pts.emplace_back(p.ratio, p.max_diam2);
    }
    result.fit_mean = fit_rate_slope(mean_pts);
    result.fit_max = fit_rate_slope(max_pts);
    return result;
}

ImseRateResult run_imse_rate(const ImseRateOptions& opt) {
    if (opt.n_grid.size() < 4) throw ConfigError("IMSE rate needs >= 4 grid sizes");
    const auto target = [&](const Eigen::Ref<const Eigen::VectorXd>& p) {
        return p.sum() / opt.d;
    };

    ImseRateResult result;
    result.points.resize(opt.n_grid.size());
    for (std::size_t g = 0; g < opt.n_grid.size(); ++g) {
        const int n = opt.n_grid[g];
        const int k = std::max(
            2, static_cast<int>(std::lround(opt.k_scale * std::pow(n, opt.k_exponent))));
        std::vector<double> imses(opt.reps);
        parallel_for(opt.reps, opt.n_threads, [&](int rep) {
            RngStream rng = derive_stream(opt.seed, 0x1a000 + g * 1000 + rep);
            Eigen::MatrixXd x(n, opt.d);
            Eigen::VectorXd y(n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < opt.d; ++j) x(i, j) = rng.next_double();
                y(i) = target(x.row(i).transpose()) + opt.noise_sd * rng.next_normal();
            }
            const Dataset data = make_dataset(std::move(x), std::move(y));
            ForestConfig cfg;
            cfg.b_trees = opt.trees;
            cfg.alpha = opt.alpha;
            cfg.w = opt.w;
            cfg.k = k;
            cfg.q = opt.q;
            cfg.seed = rng.next_u64();
            const Forest forest = fit_forest(data, cfg, 1);
            double acc = 0.0;
            Eigen::VectorXd point(opt.d);
            for (int t = 0; t < opt.n_eval; ++t) {
                for (int j = 0; j < opt.d; ++j) point(j) = rng.next_double();
                const double err = predict(forest, point) - target(point);
                acc += err * err;
            }
            imses[rep] = acc / opt.n_eval;
        });
        double sum = 0.0;
        for (double v : imses) sum += v;
        result.points[g] = ImseRatePoint{n, k, sum / opt.reps};
    }

    std::vector<std::pair<double, double>> pts;
    for (const auto& p : result.points) {
        pts.emplace_back(static_cast<double>(p.n), p.imse);
    }
    result.fit = fit_rate_slope(pts);
    return result;
}

AteExperimentResult run_ate_experiment(const AteExperimentOptions& opt) {
    if (opt.dgp.which != DgpKind::ate_a && opt.dgp.which != DgpKind::ate_b) {
        throw ConfigError("ATE experiment requires an ATE data-generating process");
    }
    AteExperimentResult result;
    result.cells.resize(opt.reps);
    result.theta_true = generate([&] {
                            DgpSpec probe = opt.dgp;
                            probe.n = 1;
                            return probe;
                        }())
                            .theta_true;

    parallel_for(opt.reps, opt.n_threads, [&](int rep) {
        DgpSpec spec = opt.dgp;
        spec.seed = derive_seed(opt.seed, 0xa7e0000 + rep);
        const SimData sim = generate(spec);

        AteOptions ate;
        ate.folds = opt.run.folds;
        ate.level = opt.run.level;
        ate.val_fraction = opt.run.val_fraction;
        ate.tune_trees = opt.run.tune_trees;
        ate.pi_clip = opt.run.pi_clip;
        ate.seed = derive_seed(opt.seed, 0xb7e0000 + rep);
        ate.n_threads = 1;

        TuneGrid grid;
        grid.alphas = opt.run.grid_alphas;
        grid.ks = opt.run.grid_ks;
        ForestConfig base;
        base.b_trees = opt.run.final_trees;
        base.w = opt.run.w;
        base.k = opt.run.grid_ks.empty() ? 20 : opt.run.grid_ks.front();
        base.q = opt.run.q_mu;
        ate.mu1 = NuisanceSpec{base, grid};
        ate.mu0 = NuisanceSpec{base, grid};
        ForestConfig pi_base = base;
        pi_base.q = opt.run.q_pi;
        ate.pi = NuisanceSpec{pi_base, grid};

        const AteResult r = estimate_ate(sim.data, ate);
        AteCell cell;
        cell.rep = rep;
        cell.theta_hat = r.theta_hat;
        cell.ci_low = r.ci_low;
        cell.ci_high = r.ci_high;
        cell.covered = r.ci_low <= sim.theta_true && sim.theta_true <= r.ci_high;
        cell.error = r.theta_hat - sim.theta_true;
        result.cells[rep] = cell;
    });

    std::vector<double> errors, abs_errors;
    double ci_len = 0.0;
    int covered = 0;
    for (const auto& cell : result.cells) {
        errors.push_back(cell.error);
        abs_errors.push_back(std::abs(cell.error));
        ci_len += cell.ci_high - cell.ci_low;
        covered += cell.covered ? 1 : 0;
    }
    result.median_bias = median(errors);
    result.median_abs_error = median(abs_errors);
    result.coverage = static_cast<double>(covered) / opt.reps;
    result.mean_ci_length = ci_len / opt.reps;
    return result;
}

}  // namespace asbf

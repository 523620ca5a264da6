#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "asbf/ate.hpp"
#include "asbf/simbench.hpp"
#include "asbf/stats.hpp"

using namespace asbf;

TEST_CASE("kfold partitions with near-equal sizes, deterministically") {
    {
        RngStream rng = derive_stream(1, 0);
        const std::vector<int> fold = kfold(100, 5, rng);
        std::vector<int> sizes(5, 0);
        for (int f : fold) sizes[f] += 1;
        for (int s : sizes) CHECK(s == 20);
    }
    {
        RngStream rng = derive_stream(1, 1);
        const std::vector<int> fold = kfold(101, 5, rng);
        std::vector<int> sizes(5, 0);
        for (int f : fold) sizes[f] += 1;
        std::sort(sizes.begin(), sizes.end());
        CHECK(sizes == std::vector<int>{20, 20, 20, 20, 21});
    }
    {
        RngStream a = derive_stream(9, 9), b = derive_stream(9, 9);
        CHECK(kfold(57, 4, a) == kfold(57, 4, b));
    }
    RngStream rng = derive_stream(1, 2);
    CHECK_THROWS_AS(kfold(3, 5, rng), ConfigError);
    CHECK_THROWS_AS(kfold(10, 1, rng), ConfigError);
}

TEST_CASE("aipw score on the documented examples") {
    CHECK(aipw_score(1.0, 1, 0.5, 0.2, 0.5) == doctest::Approx(1.3));
    CHECK(aipw_score(0.5, 1, 0.5, 0.2, 0.37) == doctest::Approx(0.3));
    CHECK(aipw_score(0.2, 0, 0.5, 0.2, 0.37) == doctest::Approx(0.3));
    CHECK_THROWS_AS(aipw_score(1.0, 1, 0.5, 0.2, 0.0), ValidationError);
    CHECK_THROWS_AS(aipw_score(1.0, 1, 0.5, 0.2, 1.0), ValidationError);
}

TEST_CASE("tune_config: singleton grid short-circuits") {
    DgpSpec spec;
    spec.which = DgpKind::friedman_a;
    spec.n = 120;
    spec.d = 5;
    spec.seed = 3;
    const SimData sim = generate(spec);
    ForestConfig base;
    base.k = 13;
    base.alpha = 0.4;
    TuneGrid grid;  // empty -> expands to exactly the base
    const ForestConfig chosen = tune_config(sim.data, grid, 0.2, base, 10, 7);
    CHECK(chosen.k == 13);
    CHECK(chosen.alpha == 0.4);
}

TEST_CASE("tune_config picks q=1 on noiseless linear data and is deterministic") {
    RngStream rng = derive_stream(5, 0);
    const int n = 400;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x.row(i) << rng.next_double(), rng.next_double();
        y(i) = 1.0 + 4.0 * x(i, 0) - 2.0 * x(i, 1);
    }
    const Dataset data = make_dataset(x, y);
    ForestConfig base;
    base.k = 20;
    base.w = 0.5;
    base.b_trees = 20;
    TuneGrid grid;
    grid.qs = {0, 1};
    const ForestConfig a = tune_config(data, grid, 0.2, base, 20, 11);
    CHECK(a.q == 1);
    const ForestConfig b = tune_config(data, grid, 0.2, base, 20, 11);
    CHECK(a == b);
}

TEST_CASE("tune_config skips infeasible k and honors the tie order") {
    DgpSpec spec;
    spec.which = DgpKind::friedman_a;
    spec.n = 100;
    spec.d = 5;
    spec.seed = 4;
    const SimData sim = generate(spec);
    ForestConfig base;
    base.w = 0.5;
    base.b_trees = 5;
    TuneGrid grid;
    grid.ks = {10, 4000};  // the second cannot fit floor(w * n_fit)
    const ForestConfig chosen = tune_config(sim.data, grid, 0.2, base, 5, 13);
    CHECK(chosen.k == 10);
}

TEST_CASE("overlap_check flags and reports extremes") {
    const OverlapReport clean = overlap_check({0.3, 0.5, 0.7});
    CHECK(clean.clean());
    CHECK(clean.min_pi == doctest::Approx(0.3));
    CHECK(clean.max_pi == doctest::Approx(0.7));

    const OverlapReport flagged = overlap_check({0.3, 0.005, 0.7});
    REQUIRE(flagged.flagged.size() == 1);
    CHECK(flagged.flagged[0] == 1);
}

TEST_CASE("estimate_ate_with_nuisances: oracle nuisances recover theta") {
    DgpSpec spec;
    spec.which = DgpKind::ate_a;
    spec.n = 4000;
    spec.d = 5;
    spec.seed = 17;
    const SimData sim = generate(spec);
    const AteResult res = estimate_ate_with_nuisances(sim.data, sim.mu1_fn, sim.mu0_fn,
                                                      sim.pi_fn);
    const double se = res.sigma_hat / std::sqrt(static_cast<double>(res.n));
    CHECK(std::abs(res.theta_hat - sim.theta_true) <= 3.0 * se);
    // theta and sigma re-derive from the stored scores.
    double mean = 0.0;
    for (double s : res.scores) mean += s;
    mean /= res.scores.size();
    CHECK(mean == doctest::Approx(res.theta_hat));
    // CI width identity.
    const double z = normal_quantile(1.0 - 0.05 / 2.0);
    CHECK(res.ci_high - res.ci_low ==
          doctest::Approx(2.0 * z * res.sigma_hat / std::sqrt(1.0 * res.n)));
}

TEST_CASE("double robustness: one correct nuisance suffices") {
    DgpSpec spec;
    spec.which = DgpKind::ate_a;
    spec.n = 4000;
    spec.d = 5;
    spec.seed = 23;
    const SimData sim = generate(spec);
    const NuisanceFn wrong_pi = [](const Eigen::Ref<const Eigen::VectorXd>&) {
        return 0.3;
    };
    const NuisanceFn wrong_mu = [](const Eigen::Ref<const Eigen::VectorXd>&) {
        return 0.7;
    };
    {
        const AteResult res =
            estimate_ate_with_nuisances(sim.data, sim.mu1_fn, sim.mu0_fn, wrong_pi);
        const double se = res.sigma_hat / std::sqrt(1.0 * res.n);
        CHECK(std::abs(res.theta_hat - sim.theta_true) <= 3.0 * se);
    }
    {
        const AteResult res =
            estimate_ate_with_nuisances(sim.data, wrong_mu, wrong_mu, sim.pi_fn);
        const double se = res.sigma_hat / std::sqrt(1.0 * res.n);
        CHECK(std::abs(res.theta_hat - sim.theta_true) <= 3.0 * se);
    }
}

namespace {
AteOptions small_options(std::uint64_t seed) {
    AteOptions opt;
    opt.folds = 3;
    opt.seed = seed;
    opt.tune_trees = 10;
    ForestConfig base;
    base.b_trees = 30;
    base.w = 0.5;
    base.k = 15;
    base.q = 0;
    opt.mu1 = {base, {}};
    opt.mu0 = {base, {}};
    opt.pi = {base, {}};
    return opt;
}
}  // namespace

TEST_CASE("estimate_ate recovers a constant effect under randomization") {
    RngStream rng = derive_stream(31, 0);
    const int n = 900;
    const double tau = 2.0;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    Eigen::VectorXi a(n);
    for (int i = 0; i < n; ++i) {
        x.row(i) << rng.next_double(), rng.next_double();
        a(i) = rng.next_bernoulli(0.5) ? 1 : 0;
        y(i) = std::sin(3 * x(i, 0)) + a(i) * tau + 0.5 * rng.next_normal();
    }
    const Dataset data = make_dataset(x, y, a);
    const AteResult res = estimate_ate(data, small_options(3));
    CHECK(std::abs(res.theta_hat - tau) < 0.2);
    CHECK(res.ci_low < res.ci_high);
}

TEST_CASE("cross-fitting hygiene: no eval row trains its own fold") {
    DgpSpec spec;
    spec.which = DgpKind::ate_a;
    spec.n = 300;
    spec.d = 3;
    spec.seed = 41;
    const SimData sim = generate(spec);
    const AteResult res = estimate_ate(sim.data, small_options(7));
    REQUIRE(res.fold_diag.size() == 3);
    for (const auto& diag : res.fold_diag) {
        std::set<int> train(diag.train_rows.begin(), diag.train_rows.end());
        int eval_count = 0;
        for (int i = 0; i < res.n; ++i) {
            if (res.fold_of[i] == diag.fold) {
                ++eval_count;
                CHECK(train.count(i) == 0);
            } else {
                CHECK(train.count(i) == 1);
            }
        }
        CHECK(eval_count == diag.n_eval);
    }
}

TEST_CASE("sigma and CI identities hold exactly as computed") {
    DgpSpec spec;
    spec.which = DgpKind::ate_a;
    spec.n = 250;
    spec.d = 3;
    spec.seed = 43;
    const SimData sim = generate(spec);
    AteOptions opt = small_options(11);
    opt.level = 0.9;
    const AteResult res = estimate_ate(sim.data, opt);
    double ss = 0.0;
    for (double s : res.scores) ss += (s - res.theta_hat) * (s - res.theta_hat);
    CHECK(res.sigma_hat == doctest::Approx(std::sqrt(ss / res.n)));
    const double z = normal_quantile(0.95);
    CHECK(res.ci_high - res.ci_low ==
          doctest::Approx(2 * z * res.sigma_hat / std::sqrt(1.0 * res.n)));

    AteOptions wide = small_options(11);
    wide.level = 0.95;
    const AteResult res95 = estimate_ate(sim.data, wide);
    CHECK(res95.ci_high - res95.ci_low > res.ci_high - res.ci_low);
    CHECK(res95.theta_hat == doctest::Approx(res.theta_hat));  // same seed, same fit
}

TEST_CASE("single-arm data and single-arm complements are rejected") {
    Eigen::MatrixXd x(20, 1);
    Eigen::VectorXd y(20);
    Eigen::VectorXi a = Eigen::VectorXi::Ones(20);
    RngStream rng = derive_stream(51, 0);
    for (int i = 0; i < 20; ++i) {
        x(i, 0) = rng.next_double();
        y(i) = rng.next_normal();
    }
    const Dataset data = make_dataset(x, y, a);
    CHECK_THROWS_AS(estimate_ate(data, small_options(1)), ValidationError);
}

TEST_CASE("estimate_ate is deterministic under a fixed seed") {
    DgpSpec spec;
    spec.which = DgpKind::ate_b;
    spec.n = 260;
    spec.d = 3;
    spec.seed = 61;
    const SimData sim = generate(spec);
    AteOptions opt = small_options(21);
    opt.n_threads = 1;
    const AteResult a = estimate_ate(sim.data, opt);
    opt.n_threads = 4;
    const AteResult b = estimate_ate(sim.data, opt);
    CHECK(a.theta_hat == b.theta_hat);
    CHECK(a.sigma_hat == b.sigma_hat);
    CHECK(a.ci_low == b.ci_low);
}

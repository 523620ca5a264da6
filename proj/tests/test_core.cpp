#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "asbf/basis.hpp"
#include "asbf/csv.hpp"
#include "asbf/dataset.hpp"
#include "asbf/rng.hpp"
#include "asbf/serialize.hpp"
#include "asbf/split.hpp"
#include "asbf/stats.hpp"

using namespace asbf;

TEST_CASE("streams are deterministic and tag-separated") {
    RngStream a = derive_stream(42, 0);
    RngStream b = derive_stream(42, 0);
    RngStream c = derive_stream(42, 1);
    bool any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("bounded draws and shuffles behave") {
    RngStream rng = derive_stream(7, 3);
    for (int i = 0; i < 1000; ++i) {
        const int v = rng.next_int(13);
        CHECK(v >= 0);
        CHECK(v < 13);
    }
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    rng.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);

    double mean = 0.0, m2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.next_normal();
        mean += z;
        m2 += z * z;
    }
    mean /= n;
    m2 /= n;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(m2 - 1.0) < 0.05);
}

TEST_CASE("dataset validation accepts well-formed input") {
    Eigen::MatrixXd x(2, 2);
    x << 0.1, 0.9, 0.4, 0.5;
    Eigen::VectorXd y(2);
    y << 1.0, -2.0;
    const Dataset d = make_dataset(x, y);
    CHECK(d.n() == 2);
    CHECK(d.dim() == 2);
}

TEST_CASE("dataset validation names the offending entry") {
    Eigen::MatrixXd x(2, 2);
    x << 0.1, 1.5, 0.4, 0.5;
    Eigen::VectorXd y(2);
    y << 1.0, 2.0;
    try {
        make_dataset(x, y);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 0") != std::string::npos);
        CHECK(msg.find("column 1") != std::string::npos);
    }
    x(0, 1) = 0.2;
    y(1) = std::nan("");
    CHECK_THROWS_AS(make_dataset(x, y), ValidationError);
}

TEST_CASE("dataset_from_rows checks rectangularity and treatment coding") {
    CHECK_THROWS_AS(dataset_from_rows({}), ValidationError);
    CHECK_THROWS_AS(dataset_from_rows({{0.1, 0.2, 1.0}, {0.1, 2.0}}), ValidationError);
    const Dataset d = dataset_from_rows({{0.1, 0.2, 1.0, 1.0}, {0.3, 0.4, 2.0, 0.0}}, true);
    CHECK(d.has_treatment());
    CHECK((*d.treat)(0) == 1);
    CHECK_THROWS_AS(dataset_from_rows({{0.1, 0.2, 1.0, 0.5}}, true), ValidationError);
}

TEST_CASE("minmax rescale maps onto [0,1] and handles constants") {
    Eigen::MatrixXd x(3, 2);
    x << 2.0, 7.0, 4.0, 7.0, 6.0, 7.0;
    const Eigen::MatrixXd r = minmax_rescale(x);
    CHECK(r(0, 0) == doctest::Approx(0.0));
    CHECK(r(1, 0) == doctest::Approx(0.5));
    CHECK(r(2, 0) == doctest::Approx(1.0));
    CHECK(r(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("config validation enforces the fit-time invariants") {
    ForestConfig cfg;
    cfg.k = 60;
    cfg.w = 0.5;
    CHECK_THROWS_AS(cfg.validate(100, 3), ConfigError);  // k > floor(w*N) = 50
    cfg.k = 10;
    CHECK_NOTHROW(cfg.validate(100, 3));
    cfg.alpha = 0.6;
    CHECK_THROWS_AS(cfg.validate(100, 3), ConfigError);
    cfg.alpha = 0.5;
    cfg.mtry = 4;
    CHECK_THROWS_AS(cfg.validate(100, 3), ConfigError);
    cfg.mtry = 3;
    CHECK_NOTHROW(cfg.validate(100, 3));
}

// --- basis ---------------------------------------------------------------

TEST_CASE("basis dimensions") {
    CHECK(basis_dim(2, 0) == 1);
    CHECK(basis_dim(2, 2) == 6);
    CHECK(basis_dim(5, 1) == 6);
    CHECK(basis_dim(1, 4) == 5);
}

TEST_CASE("basis_dim recurrence") {
    auto binom = [](int n, int r) {
        double v = 1.0;
        for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
        return static_cast<int>(std::lround(v));
    };
    for (int d = 1; d <= 6; ++d) {
        for (int q = 1; q <= 4; ++q) {
            CHECK(basis_dim(d, q) == basis_dim(d, q - 1) + binom(d + q - 1, q));
        }
    }
}

TEST_CASE("monomial order is graded with the documented within-degree order") {
    const PolyBasis basis(2, 2);
    const std::vector<std::vector<int>> expected = {{0, 0}, {1, 0}, {0, 1},
                                                    {2, 0}, {1, 1}, {0, 2}};
    REQUIRE(basis.monomials() == expected);
    std::set<std::vector<int>> unique(basis.monomials().begin(), basis.monomials().end());
    CHECK(unique.size() == basis.monomials().size());
}

TEST_CASE("basis evaluation on the documented examples") {
    {
        const PolyBasis basis(2, 2);
        Eigen::VectorXd x(2);
        x << 0.0, 0.0;
        const Eigen::VectorXd g = basis.eval(x);
        CHECK(g(0) == 1.0);
        for (int i = 1; i < 6; ++i) CHECK(g(i) == 0.0);
    }
    {
        const PolyBasis basis(2, 1);
        Eigen::VectorXd x(2);
        x << 0.5, 0.25;
        const Eigen::VectorXd g = basis.eval(x);
        CHECK(g(0) == 1.0);
        CHECK(g(1) == doctest::Approx(0.5));
        CHECK(g(2) == doctest::Approx(0.25));
    }
    {
        const PolyBasis basis(1, 2);
        Eigen::VectorXd x(1);
        x << 0.5;
        const Eigen::VectorXd g = basis.eval(x);
        CHECK(g(0) == 1.0);
        CHECK(g(1) == doctest::Approx(0.5));
        CHECK(g(2) == doctest::Approx(0.25));
    }
}

TEST_CASE("monomial entries are exactly multiplicative") {
    RngStream rng = derive_stream(11, 0);
    const PolyBasis basis(3, 3);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd x(3);
        for (int j = 0; j < 3; ++j) x(j) = rng.next_double();
        const Eigen::VectorXd g = basis.eval(x);
        for (int t = 0; t < basis.dim(); ++t) {
            double expected = 1.0;
            for (int j = 0; j < 3; ++j) {
                for (int e = 0; e < basis.monomials()[t][j]; ++e) expected *= x(j);
            }
            CHECK(g(t) == expected);
        }
    }
}

TEST_CASE("degree-q polynomials are reproduced by coefficient inner products") {
    RngStream rng = derive_stream(12, 0);
    const PolyBasis basis(2, 3);
    Eigen::VectorXd coef(basis.dim());
    for (int t = 0; t < basis.dim(); ++t) coef(t) = rng.next_normal();
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd x(2);
        x << rng.next_double(), rng.next_double();
        double direct = 0.0;
        for (int t = 0; t < basis.dim(); ++t) {
            direct += coef(t) * std::pow(x(0), basis.monomials()[t][0]) *
                      std::pow(x(1), basis.monomials()[t][1]);
        }
        CHECK(coef.dot(basis.eval(x)) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("kappa diagnostic: bounds, singularity, and a dense oracle") {
    RngStream rng = derive_stream(13, 0);
    const PolyBasis basis(2, 1);

    // Random 30-point leaf, q=1, d=2, centered at the leaf mean point.
    const int m = 30;
    Eigen::MatrixXd pts(m, 2);
    for (int i = 0; i < m; ++i) pts.row(i) << rng.next_double(), rng.next_double();
    Eigen::VectorXd center = pts.colwise().mean();
    Eigen::MatrixXd rows(m, basis.dim() - 1);
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd delta = pts.row(i).transpose() - center;
        rows.row(i) = basis.eval(delta).tail(basis.dim() - 1);
    }
    Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / m);
    const KappaResult res = kappa_diagnostic(w, rows);
    CHECK_FALSE(res.singular);
    CHECK(res.kappa >= 1.0);

    // Independent dense-linear-algebra route.
    Eigen::VectorXd dvec = rows.transpose() * w;
    Eigen::MatrixXd s = rows.transpose() * w.asDiagonal() * rows;
    const double t = dvec.dot(s.inverse() * dvec);
    CHECK(res.kappa == doctest::Approx(1.0 / (1.0 - t)).epsilon(1e-9));

    // A single support point makes the q>=1 design singular.
    Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(5, 2);
    const KappaResult sing = kappa_diagnostic(Eigen::VectorXd::Constant(5, 0.2), flat);
    CHECK(sing.singular);
    CHECK(std::isinf(sing.kappa));

    // Constant-only basis has no collinearity by convention.
    const KappaResult empty = kappa_diagnostic(w, Eigen::MatrixXd(m, 0));
    CHECK(empty.kappa == 1.0);
}

// --- split scheduling ----------------------------------------------------

TEST_CASE("balanced direction pick: unique argmin and forced coverage") {
    RngStream rng = derive_stream(21, 0);
    CHECK(pick_balanced_direction({2, 1, 2}, rng) == 1);

    std::vector<int> counts{1, 1};
    const int first = pick_balanced_direction(counts, rng);
    counts[first] += 1;
    const int second = pick_balanced_direction(counts, rng);
    CHECK(second == 1 - first);
}

TEST_CASE("balanced tie-break is uniform") {
    RngStream rng = derive_stream(22, 0);
    int hits[3] = {0, 0, 0};
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits[pick_balanced_direction({0, 0, 0}, rng)] += 1;
    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(hits[j] / static_cast<double>(n) - 1.0 / 3.0) < 0.02);
    }
}

TEST_CASE("cyclic windows match the rotation scheme") {
    const auto sets = cyclic_windows({0, 1, 2, 3, 4}, 3);
    const std::vector<std::vector<int>> expected = {
        {0, 1, 2}, {1, 2, 3}, {2, 3, 4}, {3, 4, 0}, {4, 0, 1}};
    CHECK(sets == expected);
}

TEST_CASE("mtry = d gives full candidate sets") {
    RngStream rng = derive_stream(23, 0);
    const MtrySchedule s = build_mtry_schedule(4, 4, rng);
    for (const auto& set : s.round_sets) {
        std::vector<int> sorted = set;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == std::vector<int>{0, 1, 2, 3});
    }
}

TEST_CASE("each direction appears in exactly mtry sets") {
    RngStream rng = derive_stream(24, 0);
    for (int d = 1; d <= 7; ++d) {
        for (int mtry = 1; mtry <= d; ++mtry) {
            const MtrySchedule s = build_mtry_schedule(d, mtry, rng);
            std::vector<int> memb(d, 0);
            for (const auto& set : s.round_sets) {
                for (int dir : set) memb[dir] += 1;
            }
            for (int dir = 0; dir < d; ++dir) CHECK(memb[dir] == mtry);
        }
    }
}

TEST_CASE("advance_schedule consumes each set exactly once per round") {
    RngStream rng = derive_stream(25, 0);
    MtrySchedule s = build_mtry_schedule(5, 2, rng);
    std::set<std::vector<int>> seen;
    for (int i = 0; i < 5; ++i) seen.insert(advance_schedule(s, rng));
    CHECK(seen.size() == 5);
    CHECK(s.exhausted());
    CHECK_THROWS(advance_schedule(s, rng));

    MtrySchedule one = build_mtry_schedule(3, 1, rng);
    one.unused = {2};
    CHECK(advance_schedule(one, rng) == one.round_sets[2]);
}

TEST_CASE("advance_schedule picks uniformly among unused sets") {
    RngStream rng = derive_stream(26, 0);
    int hits[3] = {0, 0, 0};
    const int n = 30000;
    for (int i = 0; i < n; ++i) {
        MtrySchedule s = build_mtry_schedule(3, 1, rng);
        // Identify which round set was taken by its index in round_sets.
        const auto taken = advance_schedule(s, rng);
        for (int idx = 0; idx < 3; ++idx) {
            bool still_unused = false;
            for (int u : s.unused) still_unused |= (u == idx);
            if (!still_unused) hits[idx] += 1;
        }
    }
    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(hits[j] / static_cast<double>(n) - 1.0 / 3.0) < 0.02);
    }
}

// --- feasible range and best split ----------------------------------------

namespace {
std::vector<double> uniform_sorted(int n, RngStream& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.next_double();
    std::sort(v.begin(), v.end());
    return v;
}
}  // namespace

TEST_CASE("feasible_range on the documented examples") {
    RngStream rng = derive_stream(31, 0);
    {
        const auto v = uniform_sorted(10, rng);
        const FeasibleRange r = feasible_range(v, 0.5, 3);
        CHECK(r.lo == 5);
        CHECK(r.hi == 5);
    }
    {
        const auto v = uniform_sorted(10, rng);
        const FeasibleRange r = feasible_range(v, 0.3, 2);
        CHECK(r.lo == 3);
        CHECK(r.hi == 7);
    }
    {
        const auto v = uniform_sorted(4, rng);
        const FeasibleRange r = feasible_range(v, 0.5, 2);
        CHECK(r.lo == 2);
        CHECK(r.hi == 2);
    }
    {
        const auto v = uniform_sorted(3, rng);
        CHECK_THROWS_AS(feasible_range(v, 0.5, 2), ConfigError);
    }
    {
        // Odd node at alpha = 0.5: the alpha bound is capped at the median.
        const auto v = uniform_sorted(5, rng);
        const FeasibleRange r = feasible_range(v, 0.5, 2);
        CHECK(r.lo == 2);
        CHECK(r.hi == 3);
    }
}

TEST_CASE("best_split separates a clean two-level response") {
    const std::vector<double> i_vals = {0.1, 0.2, 0.8, 0.9};
    std::vector<std::pair<double, double>> j = {
        {0.1, 0.0}, {0.2, 0.0}, {0.8, 1.0}, {0.9, 1.0}};
    const auto dec = best_split(0, j, i_vals, FeasibleRange{1, 3});
    REQUIRE(dec.has_value());
    CHECK(dec->threshold == doctest::Approx(0.5));
    CHECK(dec->criterion == doctest::Approx(0.0));
    CHECK(dec->left_i_count == 2);
    CHECK_FALSE(dec->j_fallback);
}

TEST_CASE("best_split flat criterion resolves to the I-median cut") {
    const std::vector<double> i_vals = {0.1, 0.2, 0.8, 0.9};
    std::vector<std::pair<double, double>> j = {
        {0.15, 3.0}, {0.5, 3.0}, {0.85, 3.0}};
    const auto dec = best_split(0, j, i_vals, FeasibleRange{1, 3});
    REQUIRE(dec.has_value());
    CHECK(dec->left_i_count == 2);
    CHECK(dec->threshold == doctest::Approx(0.5));
    CHECK(dec->criterion == doctest::Approx(0.0));
}

TEST_CASE("best_split without J-samples falls back to the I median, flagged") {
    const std::vector<double> i_vals = {0.1, 0.2, 0.4, 0.8, 0.9};
    const auto dec = best_split(2, {}, i_vals, FeasibleRange{1, 4});
    REQUIRE(dec.has_value());
    CHECK(dec->j_fallback);
    CHECK(dec->left_i_count == 2);  // |2t-5| minimal at t=2 (ties go left)
    CHECK(dec->direction == 2);
}

TEST_CASE("best_split returns nothing when no distinct cut is feasible") {
    const std::vector<double> i_vals = {0.3, 0.3, 0.3, 0.3};
    const auto dec = best_split(0, {{0.3, 1.0}}, i_vals, FeasibleRange{1, 3});
    CHECK_FALSE(dec.has_value());
}

namespace {
// Exhaustive enumeration oracle with an independent two-pass SSE.
std::optional<SplitDecision> brute_force_split(
    int direction, std::vector<std::pair<double, double>> j_pairs,
    const std::vector<double>& sorted_i, const FeasibleRange& range) {
    const int n = static_cast<int>(sorted_i.size());
    std::optional<SplitDecision> best;
    auto median_distance = [n](int t) { return std::abs(2 * t - n); };
    for (int t = std::max(1, range.lo); t <= std::min(n - 1, range.hi); ++t) {
        if (!(sorted_i[t - 1] < sorted_i[t])) continue;
        const double thr = 0.5 * (sorted_i[t - 1] + sorted_i[t]);
        double crit = 0.0;
        if (!j_pairs.empty()) {
            double sum_l = 0.0, sum_r = 0.0;
            int n_l = 0, n_r = 0;
            for (const auto& [c, r] : j_pairs) {
                if (c <= thr) {
                    sum_l += r;
                    ++n_l;
                } else {
                    sum_r += r;
                    ++n_r;
                }
            }
            const double mean_l = n_l > 0 ? sum_l / n_l : 0.0;
            const double mean_r = n_r > 0 ? sum_r / n_r : 0.0;
            for (const auto& [c, r] : j_pairs) {
                const double dmean = c <= thr ? mean_l : mean_r;
                crit += (r - dmean) * (r - dmean);
            }
        }
        const bool better =
            !best || crit < best->criterion ||
            (crit == best->criterion &&
             median_distance(t) < median_distance(best->left_i_count));
        if (better) {
            SplitDecision dec;
            dec.direction = direction;
            dec.threshold = thr;
            dec.left_i_count = t;
            dec.right_i_count = n - t;
            dec.criterion = crit;
            dec.j_fallback = j_pairs.empty();
            best = dec;
        }
    }
    return best;
}
}  // namespace

TEST_CASE("best_split equals exhaustive enumeration on random nodes") {
    RngStream rng = derive_stream(33, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n_i = 10 + rng.next_int(40);
        const int k = 1 + rng.next_int(4);
        if (n_i < 2 * k) continue;
        const double alpha = 0.05 + 0.45 * rng.next_double();
        std::vector<double> i_vals = uniform_sorted(n_i, rng);
        const int n_j = rng.next_int(46);
        std::vector<std::pair<double, double>> j(n_j);
        const bool flat = trial % 10 == 0;
        for (auto& [c, r] : j) {
            c = rng.next_double();
            r = flat ? 1.25 : rng.next_normal();
        }
        const FeasibleRange range = feasible_range(i_vals, alpha, k);
        const auto got = best_split(0, j, i_vals, range);
        const auto want = brute_force_split(0, j, i_vals, range);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(got->left_i_count == want->left_i_count);
            CHECK(got->threshold == doctest::Approx(want->threshold));
            CHECK(std::abs(got->criterion - want->criterion) < 1e-10);
        }
    }
}

TEST_CASE("criterion is invariant to response shifts (q=0 collapse algebra)") {
    RngStream rng = derive_stream(34, 0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> i_vals = uniform_sorted(24, rng);
        std::vector<std::pair<double, double>> j(30), j_shifted(30);
        double mean = 0.0;
        for (auto& [c, r] : j) {
            c = rng.next_double();
            r = rng.next_normal() * 3.0 + 1.0;
            mean += r;
        }
        mean /= 30;
        for (int t = 0; t < 30; ++t) {
            j_shifted[t] = {j[t].first, j[t].second - mean};
        }
        const FeasibleRange range = feasible_range(i_vals, 0.3, 3);
        const auto a = best_split(0, j, i_vals, range);
        const auto b = best_split(0, j_shifted, i_vals, range);
        REQUIRE(a.has_value());
        REQUIRE(b.has_value());
        CHECK(a->left_i_count == b->left_i_count);
        CHECK(std::abs(a->criterion - b->criterion) < 1e-12 * (1 + std::abs(a->criterion)));
    }
}

// --- stats + serialization helpers ----------------------------------------

TEST_CASE("normal quantile and median") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-7));
    CHECK(normal_quantile(0.95) == doctest::Approx(1.644853627).epsilon(1e-7));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));
}

TEST_CASE("sign test exact tails") {
    CHECK(sign_test_p_greater(0, 10) == doctest::Approx(1.0));
    CHECK(sign_test_p_greater(3, 4) == doctest::Approx(5.0 / 16.0));
    CHECK(sign_test_p_greater(4, 4) == doctest::Approx(1.0 / 16.0));
    CHECK(sign_test_p_greater(2, 3) == doctest::Approx(0.5));
}

TEST_CASE("ols slope on an exact line") {
    const SlopeFit fit = ols_slope({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.stderr_slope == doctest::Approx(0.0));
}

TEST_CASE("hex doubles round-trip exactly") {
    RngStream rng = derive_stream(40, 0);
    for (int i = 0; i < 200; ++i) {
        double v = (rng.next_double() - 0.5) * std::pow(10.0, rng.next_int(8) - 4.0);
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(parse_double(format_double(0.0)) == 0.0);
    CHECK_THROWS_AS(parse_double("zz"), ValidationError);
}

TEST_CASE("config JSON round-trips semantically") {
    ForestConfig cfg;
    cfg.b_trees = 37;
    cfg.alpha = 0.25;
    cfg.w = 0.8;
    cfg.k = 11;
    cfg.mtry = 2;
    cfg.q = 1;
    cfg.seed = 99;
    cfg.rule = DirectionRule::mtry_sets;
    const ForestConfig back = config_from_json(config_to_json(cfg));
    CHECK(back == cfg);
}

// --- CSV -------------------------------------------------------------------

TEST_CASE("CSV parsing resolves roles in any column order") {
    std::istringstream in("x2,y,x1,a\n0.5,3.5,0.1,1\n0.6,4.5,0.2,0\n");
    const CsvTable table = read_csv(in);
    const ParsedCsv parsed = parse_dataset_csv(table);
    CHECK(parsed.d == 2);
    CHECK(parsed.x(0, 0) == doctest::Approx(0.1));
    CHECK(parsed.x(0, 1) == doctest::Approx(0.5));
    CHECK(parsed.y(1) == doctest::Approx(4.5));
    REQUIRE(parsed.a.has_value());
    CHECK((*parsed.a)(0) == 1);
}

TEST_CASE("CSV errors carry row/column diagnostics") {
    {
        std::istringstream in("x1,y\n0.1\n");
        CHECK_THROWS_AS(read_csv(in), ValidationError);
    }
    {
        std::istringstream in("x1,x3,y\n0.1,0.2,1\n");
        CHECK_THROWS_AS(parse_dataset_csv(read_csv(in)), ValidationError);
    }
    {
        std::istringstream in("x1,y\nlots,1\n");
        try {
            parse_dataset_csv(read_csv(in));
            FAIL("expected error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("row 0") != std::string::npos);
        }
    }
    {
        std::istringstream in("x1,weird,y\n0.1,0.2,1\n");
        CHECK_THROWS_AS(parse_dataset_csv(read_csv(in)), ValidationError);
    }
}

TEST_CASE("query parsing enforces dimension and supports clamping") {
    std::istringstream in("x1,x2\n1.2,0.5\n");
    const CsvTable table = read_csv(in);
    CHECK_THROWS_AS(parse_query_csv(table, 3, false), ValidationError);
    const Eigen::MatrixXd clamped = parse_query_csv(table, 2, true);
    CHECK(clamped(0, 0) == 1.0);
    const Eigen::MatrixXd raw = parse_query_csv(table, 2, false);
    CHECK(raw(0, 0) == doctest::Approx(1.2));
}

TEST_CASE("group column is carried through verbatim") {
    std::istringstream in("x1,y,grp\n0.1,1,red\n0.2,2,white\n0.3,3,red\n");
    const ParsedCsv parsed = parse_dataset_csv(read_csv(in), "grp");
    CHECK(parsed.group == std::vector<std::string>{"red", "white", "red"});
}

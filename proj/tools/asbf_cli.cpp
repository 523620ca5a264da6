// Command-line front end: fit/predict/simulate/ate/diag-diameter/report.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asbf/ate.hpp"
#include "asbf/csv.hpp"
#include "asbf/forest.hpp"
#include "asbf/serialize.hpp"
#include "asbf/simbench.hpp"
#include "asbf/stats.hpp"

namespace {

using namespace asbf;

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw ValidationError("cannot open output file: " + path);
    return file;
}

struct CommonForestFlags {
    std::string config_path;
    int trees = -1;
    double alpha = -1.0;
    double w = -1.0;
    int k = -1;
    int mtry = -1;
    int q = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string rule;

    ForestConfig resolve() const {
        ForestConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ValidationError("cannot open config file: " + config_path);
            std::stringstream buf;
            buf << in.rdbuf();
            cfg = config_from_json(buf.str());
        }
        if (trees >= 0) cfg.b_trees = trees;
        if (alpha >= 0.0) cfg.alpha = alpha;
        if (w >= 0.0) cfg.w = w;
        if (k >= 0) cfg.k = k;
        if (mtry >= 0) cfg.mtry = mtry;
        if (q >= 0) cfg.q = q;
        if (seed_set) cfg.seed = seed;
        if (!rule.empty()) cfg.rule = direction_rule_from_string(rule);
        return cfg;
    }
};

void add_forest_flags(CLI::App* cmd, CommonForestFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file");
    cmd->add_option("--trees", f.trees, "number of trees B");
    cmd->add_option("--alpha", f.alpha, "child-fraction constraint in (0,0.5]");
    cmd->add_option("--w", f.w, "honest fraction in (0,1]");
    cmd->add_option("--k", f.k, "minimum leaf size on the I-sample");
    cmd->add_option("--mtry", f.mtry, "candidate directions per split (mtry rule)");
    cmd->add_option("--q", f.q, "leaf polynomial order (0 = averaging)");
    cmd->add_option("--seed", f.seed, "master seed")->each([&](const std::string&) {
        f.seed_set = true;
    });
    cmd->add_option("--rule", f.rule, "direction rule: balanced|mtry|random");
}

void print_fit_report(std::ostream& out, const Forest& forest, const std::string& label) {
    std::map<int, int> leaf_hist;
    int n_leaves = 0, singular = 0, degenerate = 0, jfallback = 0;
    double kappa_max = 0.0, kappa_sum = 0.0;
    int kappa_n = 0;
    for (const auto& tree : forest.trees) {
        for (const auto& node : tree.nodes) {
            if (!node.is_leaf()) continue;
            ++n_leaves;
            leaf_hist[node.i_count] += 1;
            if (node.flags & kFlagSingularFallback) ++singular;
            if (node.flags & kFlagDegenerate) ++degenerate;
            if (node.flags & kFlagJFallback) ++jfallback;
            if (std::isfinite(node.model.kappa)) {
                kappa_max = std::max(kappa_max, node.model.kappa);
                kappa_sum += node.model.kappa;
                ++kappa_n;
            }
        }
    }
    const DiameterReport diam = diameter_report(forest);
    if (!label.empty()) out << "group: " << label << "\n";
    out << "trees: " << forest.n_trees() << "  leaves: " << n_leaves << "\n";
    out << "leaf I-count histogram:";
    for (const auto& [count, freq] : leaf_hist) out << ' ' << count << 'x' << freq;
    out << "\n";
    out << "kappa: mean " << fmt(kappa_n > 0 ? kappa_sum / kappa_n : 1.0) << "  max "
        << fmt(kappa_max) << "  singular-fallback leaves: " << singular << "\n";
    out << "flags: degenerate " << degenerate << "  j-fallback splits " << jfallback
        << "\n";
    out << "diameter: mean " << fmt(diam.pooled.mean_diam) << "  max "
        << fmt(diam.pooled.max_diam) << "  E_x[diam^2] "
        << fmt(diam.pooled.vol_weighted_mean_diam2) << "\n";
}

int cmd_fit(const std::string& data_path, const std::string& out_path,
            const CommonForestFlags& flags, bool rescale, const std::string& group_by,
            int threads) {
    ForestConfig cfg = flags.resolve();
    const CsvTable table = read_csv_file(data_path);
    const ParsedCsv parsed = parse_dataset_csv(table, group_by);

    if (group_by.empty()) {
        Dataset data = dataset_from_parsed(parsed, rescale);
        Forest forest = fit_forest(data, cfg, threads);
        save_forest(forest, out_path);
        print_fit_report(std::cout, forest, "");
        std::cout << "forest written to " << out_path << "\n";
        return 0;
    }

    std::vector<std::string> labels;
    for (const auto& g : parsed.group) {
        if (std::find(labels.begin(), labels.end(), g) == labels.end()) labels.push_back(g);
    }
    std::sort(labels.begin(), labels.end());
    for (const auto& label : labels) {
        std::vector<int> rows;
        for (std::size_t i = 0; i < parsed.group.size(); ++i) {
            if (parsed.group[i] == label) rows.push_back(static_cast<int>(i));
        }
        ParsedCsv sub;
        sub.d = parsed.d;
        sub.x.resize(rows.size(), parsed.d);
        sub.y.resize(rows.size());
        if (parsed.a) sub.a = Eigen::VectorXi(rows.size());
        for (std::size_t t = 0; t < rows.size(); ++t) {
            sub.x.row(t) = parsed.x.row(rows[t]);
            sub.y(t) = parsed.y(rows[t]);
            if (parsed.a) (*sub.a)(t) = (*parsed.a)(rows[t]);
        }
        Dataset data = dataset_from_parsed(sub, rescale);
        Forest forest = fit_forest(data, cfg, threads);
        const std::string path = out_path + "." + label;
        save_forest(forest, path);
        print_fit_report(std::cout, forest, label);
        std::cout << "forest written to " << path << "\n";
    }
    return 0;
}

int cmd_predict(const std::string& forest_path, const std::string& query_path,
                const std::string& out_path, bool clamp, int threads) {
    const Forest forest = load_forest(forest_path);
    const CsvTable table = read_csv_file(query_path);
    const Eigen::MatrixXd queries = parse_query_csv(table, forest.d, clamp);
    const Eigen::VectorXd pred = predict_all(forest, queries, threads);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "prediction\n";
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        out << fmt(pred(i), "%.12g") << "\n";
    }
    return 0;
}

int cmd_simulate_rmse(const DgpSpec& dgp, int reps, int n_test,
                      const std::vector<std::string>& method_names, int final_trees,
                      int tune_trees, bool tune, const std::vector<double>& grid_alphas,
                      const std::vector<int>& grid_ks, std::uint64_t seed, int threads,
                      const std::string& out_path) {
    RmseExperimentOptions opt;
    opt.dgp = dgp;
    opt.reps = reps;
    opt.n_test = n_test;
    opt.tune_trees = tune_trees;
    opt.seed = seed;
    opt.n_threads = threads;

    TuneGrid grid;
    if (tune) {
        grid.alphas = grid_alphas;
        grid.ks = grid_ks;
    }
    for (const auto& name : method_names) {
        MethodSpec m;
        m.name = name;
        m.base.b_trees = final_trees;
        m.base.w = 0.5;
        m.base.k = grid_ks.empty() ? 20 : grid_ks.front();
        m.grid = grid;
        if (name == "asbf") {
            m.base.q = 0;
        } else if (name == "ll-asbf") {
            m.base.q = 1;
        } else if (name == "lq-asbf") {
            m.base.q = 2;
        } else if (name == "random") {
            m.base.q = 0;
            m.base.rule = DirectionRule::random_uniform;
        } else if (name == "sasbf") {
            m.base.q = 0;
            m.base.rule = DirectionRule::mtry_sets;
            if (tune) m.grid.mtrys = TuneGrid::default_sparse_grid(dgp.d).mtrys;
            m.base.mtry = std::max(1, (dgp.d + 2) / 3);
        } else {
            throw ValidationError("unknown method: " + name +
                                  " (expected asbf|ll-asbf|lq-asbf|sasbf|random)");
        }
        opt.methods.push_back(std::move(m));
    }

    const RmseExperiment exp = run_rmse_experiment(opt);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "rep,method,rmse\n";
    for (const auto& cell : exp.cells) {
        out << cell.rep << ',' << cell.method << ',' << fmt(cell.rmse, "%.10g") << "\n";
    }
    for (const auto& name : exp.method_names) {
        std::vector<double> v = exp.values_for(name);
        std::cerr << "method " << name << ": median RMSE " << fmt(median(v)) << " over "
                  << v.size() << " replicates\n";
    }
    return 0;
}

int cmd_simulate_diam(double alpha, int d, int k, double w, const std::vector<int>& n_grid,
                      int reps, std::uint64_t seed, int threads,
                      const std::string& out_path) {
    DiamRateOptions opt;
    opt.alpha = alpha;
    opt.d = d;
    opt.k = k;
    opt.w = w;
    opt.n_grid = n_grid;
    opt.reps = reps;
    opt.seed = seed;
    opt.n_threads = threads;
    const DiamRateResult res = run_diam_rate(opt);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "n,ratio,mean_diam2,max_diam2\n";
    for (const auto& p : res.points) {
        out << p.n << ',' << fmt(p.ratio) << ',' << fmt(p.mean_diam2, "%.10g") << ','
            << fmt(p.max_diam2, "%.10g") << "\n";
    }
    out << "# slope(mean_diam2) " << fmt(res.fit_mean.slope) << " +- "
        << fmt(res.fit_mean.stderr_slope) << "\n";
    out << "# slope(max_diam2) " << fmt(res.fit_max.slope) << " +- "
        << fmt(res.fit_max.stderr_slope) << "\n";
    return 0;
}

int cmd_simulate_imse(double alpha, int d, double k_scale, double k_exponent, int trees,
                      const std::vector<int>& n_grid, int reps, int n_eval,
                      std::uint64_t seed, int threads, const std::string& out_path) {
    ImseRateOptions opt;
    opt.alpha = alpha;
    opt.d = d;
    opt.k_scale = k_scale;
    opt.k_exponent = k_exponent;
    opt.trees = trees;
    opt.n_grid = n_grid;
    opt.reps = reps;
    opt.n_eval = n_eval;
    opt.seed = seed;
    opt.n_threads = threads;
    const ImseRateResult res = run_imse_rate(opt);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "n,k,imse\n";
    for (const auto& p : res.points) {
        out << p.n << ',' << p.k << ',' << fmt(p.imse, "%.10g") << "\n";
    }
    out << "# slope(imse) " << fmt(res.fit.slope) << " +- " << fmt(res.fit.stderr_slope)
        << "\n";
    return 0;
}

void print_ate_report(std::ostream& out, const AteResult& res,
                      std::optional<double> theta_true, bool delimited) {
    if (delimited) {
        out << "key,value\n";
        out << "theta_hat," << fmt(res.theta_hat, "%.10g") << "\n";
        out << "sigma_hat," << fmt(res.sigma_hat, "%.10g") << "\n";
        out << "ci_low," << fmt(res.ci_low, "%.10g") << "\n";
        out << "ci_high," << fmt(res.ci_high, "%.10g") << "\n";
        out << "level," << fmt(res.level) << "\n";
        out << "n," << res.n << "\n";
        out << "folds," << res.folds << "\n";
        if (theta_true) out << "theta_true," << fmt(*theta_true, "%.10g") << "\n";
        out << "pi_min," << fmt(res.overlap.min_pi) << "\n";
        out << "pi_max," << fmt(res.overlap.max_pi) << "\n";
        out << "overlap_flags," << res.overlap.flagged.size() << "\n";
        out << "fold,n_eval,score_mean,pi_min,pi_max,flags,mu1_k,mu0_k,pi_k,mu1_alpha,"
               "mu0_alpha,pi_alpha\n";
        for (const auto& fd : res.fold_diag) {
            out << fd.fold << ',' << fd.n_eval << ',' << fmt(fd.score_mean, "%.10g") << ','
                << fmt(fd.pi_min) << ',' << fmt(fd.pi_max) << ',' << fd.n_overlap_flags
                << ',' << fd.mu1_cfg.k << ',' << fd.mu0_cfg.k << ',' << fd.pi_cfg.k << ','
                << fmt(fd.mu1_cfg.alpha) << ',' << fmt(fd.mu0_cfg.alpha) << ','
                << fmt(fd.pi_cfg.alpha) << "\n";
        }
        return;
    }
    out << "theta_hat: " << fmt(res.theta_hat, "%.8g") << "\n";
    out << "sigma_hat: " << fmt(res.sigma_hat, "%.8g") << "\n";
    out << fmt(100 * res.level, "%.4g") << "% CI: [" << fmt(res.ci_low, "%.8g") << ", "
        << fmt(res.ci_high, "%.8g") << "]\n";
    if (theta_true) out << "theta_true (simulated): " << fmt(*theta_true, "%.8g") << "\n";
    out << "propensity range: [" << fmt(res.overlap.min_pi) << ", "
        << fmt(res.overlap.max_pi) << "]  flags outside (" << fmt(res.overlap.eps) << ", "
        << fmt(1 - res.overlap.eps) << "): " << res.overlap.flagged.size() << "\n";
    out << "fold  n_eval  score_mean   pi_range            chosen (k, alpha) mu1/mu0/pi\n";
    for (const auto& fd : res.fold_diag) {
        out << "  " << fd.fold << "    " << fd.n_eval << "    " << fmt(fd.score_mean, "%.6g")
            << "    [" << fmt(fd.pi_min) << ", " << fmt(fd.pi_max) << "]    (" << fd.mu1_cfg.k
            << ", " << fmt(fd.mu1_cfg.alpha) << ") / (" << fd.mu0_cfg.k << ", "
            << fmt(fd.mu0_cfg.alpha) << ") / (" << fd.pi_cfg.k << ", "
            << fmt(fd.pi_cfg.alpha) << ")\n";
    }
}

int cmd_ate(const std::string& data_path, const std::string& sim_setting, int sim_n,
            int sim_d, int folds, double level, int q_mu, int q_pi, int final_trees,
            int tune_trees, const std::vector<double>& grid_alphas,
            const std::vector<int>& grid_ks, double pi_clip, bool rescale,
            std::uint64_t seed, int threads, const std::string& out_path,
            const std::string& format) {
    Dataset data{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), std::nullopt};
    std::optional<double> theta_true;
    if (!sim_setting.empty()) {
        DgpSpec spec;
        spec.which = sim_setting == "a" ? DgpKind::ate_a : DgpKind::ate_b;
        spec.n = sim_n;
        spec.d = sim_d;
        spec.seed = seed;
        SimData sim = generate(spec);
        data = std::move(sim.data);
        theta_true = sim.theta_true;
    } else {
        if (data_path.empty()) throw ValidationError("ate needs --data or --simulate");
        const CsvTable table = read_csv_file(data_path);
        const ParsedCsv parsed = parse_dataset_csv(table);
        if (!parsed.a) throw ValidationError("ATE data must include a treatment column 'a'");
        data = dataset_from_parsed(parsed, rescale);
    }

    AteOptions opt;
    opt.folds = folds;
    opt.level = level;
    opt.tune_trees = tune_trees;
    opt.pi_clip = pi_clip;
    opt.seed = derive_seed(seed, 0xa7e);
    opt.n_threads = threads;
    TuneGrid grid;
    grid.alphas = grid_alphas;
    grid.ks = grid_ks;
    ForestConfig base;
    base.b_trees = final_trees;
    base.w = 0.5;
    base.k = grid_ks.empty() ? 20 : grid_ks.front();
    base.q = q_mu;
    opt.mu1 = NuisanceSpec{base, grid};
    opt.mu0 = NuisanceSpec{base, grid};
    base.q = q_pi;
    opt.pi = NuisanceSpec{base, grid};

    const AteResult res = estimate_ate(data, opt);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    print_ate_report(out, res, theta_true, format == "delimited");
    return 0;
}

int cmd_diag_diameter(const std::string& forest_path, const std::string& out_path,
                      const std::string& format) {
    const Forest forest = load_forest(forest_path);
    const DiameterReport rep = diameter_report(forest);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    if (format == "delimited") {
        out << "tree,leaves,mean_diam,mean_diam2,max_diam,vol_weighted_mean_diam2\n";
        for (std::size_t b = 0; b < rep.per_tree.size(); ++b) {
            const auto& s = rep.per_tree[b];
            out << b << ',' << s.leaves << ',' << fmt(s.mean_diam, "%.10g") << ','
                << fmt(s.mean_diam2, "%.10g") << ',' << fmt(s.max_diam, "%.10g") << ','
                << fmt(s.vol_weighted_mean_diam2, "%.10g") << "\n";
        }
        out << "pooled," << rep.pooled.leaves << ',' << fmt(rep.pooled.mean_diam, "%.10g")
            << ',' << fmt(rep.pooled.mean_diam2, "%.10g") << ','
            << fmt(rep.pooled.max_diam, "%.10g") << ','
            << fmt(rep.pooled.vol_weighted_mean_diam2, "%.10g") << "\n";
        return 0;
    }
    out << "forest: N=" << rep.n << " d=" << rep.d << " k=" << rep.k
        << " alpha=" << fmt(rep.alpha) << " trees=" << rep.per_tree.size() << "\n";
    out << "pooled leaves: " << rep.pooled.leaves << "\n";
    out << "mean diam: " << fmt(rep.pooled.mean_diam) << "  mean diam^2: "
        << fmt(rep.pooled.mean_diam2) << "\n";
    out << "max diam: " << fmt(rep.pooled.max_diam) << "  E_x[diam^2]: "
        << fmt(rep.pooled.vol_weighted_mean_diam2) << "\n";
    return 0;
}

int cmd_report(const std::string& in_path, const std::string& paired,
               const std::string& out_path) {
    const CsvTable table = read_csv_file(in_path);
    const int method_col = table.col("method");
    const int value_col = table.col("rmse") >= 0 ? table.col("rmse") : table.col("value");
    const int rep_col = table.col("rep");
    if (method_col < 0 || value_col < 0 || rep_col < 0) {
        throw ValidationError("report expects columns rep, method, and rmse/value");
    }
    std::map<std::string, std::map<int, double>> by_method;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        by_method[row[method_col]][std::stoi(row[rep_col])] = std::stod(row[value_col]);
    }
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "method  n  mean  median  min  max\n";
    for (const auto& [name, cells] : by_method) {
        std::vector<double> v;
        for (const auto& [rep, value] : cells) v.push_back(value);
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= v.size();
        out << name << "  " << v.size() << "  " << fmt(mean) << "  " << fmt(median(v))
            << "  " << fmt(*std::min_element(v.begin(), v.end())) << "  "
            << fmt(*std::max_element(v.begin(), v.end())) << "\n";
    }
    if (!paired.empty()) {
        const auto comma = paired.find(',');
        if (comma == std::string::npos) {
            throw ValidationError("--paired expects two comma-separated method names");
        }
        const std::string m1 = paired.substr(0, comma);
        const std::string m2 = paired.substr(comma + 1);
        if (!by_method.count(m1) || !by_method.count(m2)) {
            throw ValidationError("--paired methods not present in the input");
        }
        int wins = 0, losses = 0, ties = 0;
        for (const auto& [rep, v1] : by_method[m1]) {
            auto it = by_method[m2].find(rep);
            if (it == by_method[m2].end()) continue;
            if (v1 < it->second) ++wins;
            else if (v1 > it->second) ++losses;
            else ++ties;
        }
        const double p = sign_test_p_greater(wins, wins + losses);
        out << "paired " << m1 << " vs " << m2 << ": wins " << wins << ", losses "
            << losses << ", ties " << ties << ", one-sided sign test p = "
            << fmt(p, "%.4g") << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive split-balancing forests: fitting, prediction, simulation, "
                 "and ATE estimation"};
    app.require_subcommand(1);

    int threads = 1;
    app.add_option("--threads", threads, "worker threads (identical output for any value)")
        ->capture_default_str();
    // Lets the global --threads flag appear after a subcommand name.
    app.fallthrough();

    // fit
    auto* fit = app.add_subcommand("fit", "fit a forest from a CSV dataset");
    std::string fit_data, fit_out = "forest.txt", fit_group;
    bool fit_rescale = false;
    CommonForestFlags fit_flags;
    fit->add_option("--data", fit_data, "training CSV (x1..xd, y[, a])")->required();
    fit->add_option("--out", fit_out, "forest output path")->capture_default_str();
    fit->add_flag("--rescale", fit_rescale, "min-max rescale covariates into [0,1]");
    fit->add_option("--group-by", fit_group, "fit one forest per label in this column");
    add_forest_flags(fit, fit_flags);

    // predict
    auto* predict = app.add_subcommand("predict", "predict from a saved forest");
    std::string pred_forest, pred_query, pred_out;
    bool pred_clamp = false;
    predict->add_option("--forest", pred_forest, "forest file")->required();
    predict->add_option("--query", pred_query, "query CSV with x1..xd")->required();
    predict->add_option("--out", pred_out, "output path (default stdout)");
    predict->add_flag("--clamp", pred_clamp, "clamp query coordinates into [0,1]");

    // simulate
    auto* sim = app.add_subcommand("simulate", "replicated experiments and rate checks");
    std::string sim_mode = "rmse", sim_setting = "a", sim_methods = "asbf,random";
    std::string sim_out, sim_ngrid, sim_galphas = "0.1,0.25,0.5", sim_gks = "5,10,20,40";
    int sim_n = 1000, sim_d = 5, sim_s = 0, sim_reps = 50, sim_ntest = 1000;
    int sim_trees = 200, sim_tune_trees = 50, sim_k = 20, sim_neval = 2000;
    double sim_alpha = 0.5, sim_w = 0.5, sim_kscale = 1.0, sim_kexp = 0.5;
    bool sim_no_tune = false;
    std::uint64_t sim_seed = 0;
    sim->add_option("--mode", sim_mode, "rmse | diam-rate | imse-rate")
        ->capture_default_str();
    sim->add_option("--setting", sim_setting, "DGP: a | b | ate_a | ate_b")
        ->capture_default_str();
    sim->add_option("--n", sim_n, "sample size")->capture_default_str();
    sim->add_option("--d", sim_d, "covariate dimension")->capture_default_str();
    sim->add_option("--s", sim_s, "sparsity level (setting b)");
    sim->add_option("--reps", sim_reps, "replicates")->capture_default_str();
    sim->add_option("--n-test", sim_ntest, "test points per replicate")
        ->capture_default_str();
    sim->add_option("--methods", sim_methods,
                    "comma list: asbf,ll-asbf,lq-asbf,sasbf,random")
        ->capture_default_str();
    sim->add_option("--trees", sim_trees, "trees per final fit")->capture_default_str();
    sim->add_option("--tune-trees", sim_tune_trees, "trees per tuning fit")
        ->capture_default_str();
    sim->add_flag("--no-tune", sim_no_tune, "skip validation tuning");
    sim->add_option("--grid-alphas", sim_galphas, "tuning alphas")->capture_default_str();
    sim->add_option("--grid-ks", sim_gks, "tuning leaf sizes")->capture_default_str();
    sim->add_option("--alpha", sim_alpha, "alpha for rate modes")->capture_default_str();
    sim->add_option("--w", sim_w, "honest fraction for rate modes")->capture_default_str();
    sim->add_option("--k", sim_k, "leaf size for diam-rate")->capture_default_str();
    sim->add_option("--n-grid", sim_ngrid, "comma list of N values for rate modes");
    sim->add_option("--k-scale", sim_kscale, "imse-rate: k = k-scale * N^k-exponent")
        ->capture_default_str();
    sim->add_option("--k-exponent", sim_kexp, "imse-rate exponent")->capture_default_str();
    sim->add_option("--n-eval", sim_neval, "imse-rate evaluation points")
        ->capture_default_str();
    sim->add_option("--seed", sim_seed, "seed")->capture_default_str();
    sim->add_option("--out", sim_out, "output path (default stdout)");

    // ate
    auto* ate = app.add_subcommand("ate", "cross-fitted doubly robust ATE");
    std::string ate_data, ate_sim, ate_out, ate_format = "table";
    std::string ate_galphas = "0.1,0.25,0.5", ate_gks = "10,25,60";
    int ate_n = 1000, ate_d = 5, ate_folds = 5, ate_qmu = 1, ate_qpi = 1;
    int ate_trees = 200, ate_tune_trees = 50;
    double ate_level = 0.95, ate_clip = 0.0;
    bool ate_rescale = false;
    std::uint64_t ate_seed = 0;
    ate->add_option("--data", ate_data, "CSV with x1..xd, y, a");
    ate->add_option("--simulate", ate_sim, "generate setting a|b instead of --data");
    ate->add_option("--n", ate_n, "simulated sample size")->capture_default_str();
    ate->add_option("--d", ate_d, "simulated dimension")->capture_default_str();
    ate->add_option("--folds", ate_folds, "cross-fitting folds K")->capture_default_str();
    ate->add_option("--level", ate_level, "confidence level")->capture_default_str();
    ate->add_option("--q-mu", ate_qmu, "polynomial order for outcome forests")
        ->capture_default_str();
    ate->add_option("--q-pi", ate_qpi, "polynomial order for the propensity forest")
        ->capture_default_str();
    ate->add_option("--trees", ate_trees, "trees per nuisance fit")->capture_default_str();
    ate->add_option("--tune-trees", ate_tune_trees, "trees per tuning fit")
        ->capture_default_str();
    ate->add_option("--grid-alphas", ate_galphas, "tuning alphas")->capture_default_str();
    ate->add_option("--grid-ks", ate_gks, "tuning leaf sizes")->capture_default_str();
    ate->add_option("--pi-clip", ate_clip, "optional propensity clip c -> [c,1-c]")
        ->capture_default_str();
    ate->add_flag("--rescale", ate_rescale, "min-max rescale covariates");
    ate->add_option("--seed", ate_seed, "seed")->capture_default_str();
    ate->add_option("--out", ate_out, "output path (default stdout)");
    ate->add_option("--format", ate_format, "table | delimited")->capture_default_str();

    // diag-diameter
    auto* diag = app.add_subcommand("diag-diameter", "leaf diameter diagnostics");
    std::string diag_forest, diag_out, diag_format = "table";
    diag->add_option("--forest", diag_forest, "forest file")->required();
    diag->add_option("--out", diag_out, "output path (default stdout)");
    diag->add_option("--format", diag_format, "table | delimited")->capture_default_str();

    // report
    auto* report = app.add_subcommand("report", "summarize per-replicate result files");
    std::string report_in, report_paired, report_out;
    report->add_option("--in", report_in, "per-replicate CSV (rep,method,rmse|value)")
        ->required();
    report->add_option("--paired", report_paired, "two methods for a paired sign test");
    report->add_option("--out", report_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (fit->parsed()) {
            return cmd_fit(fit_data, fit_out, fit_flags, fit_rescale, fit_group, threads);
        }
        if (predict->parsed()) {
            return cmd_predict(pred_forest, pred_query, pred_out, pred_clamp, threads);
        }
        if (sim->parsed()) {
            if (sim_mode == "rmse") {
                DgpSpec spec;
                spec.which = dgp_kind_from_string(sim_setting);
                spec.n = sim_n;
                spec.d = sim_d;
                spec.s = sim_s > 0 ? sim_s : sim_d;
                spec.seed = sim_seed;
                std::vector<std::string> names;
                std::stringstream ss(sim_methods);
                std::string tok;
                while (std::getline(ss, tok, ',')) names.push_back(tok);
                return cmd_simulate_rmse(spec, sim_reps, sim_ntest, names, sim_trees,
                                         sim_tune_trees, !sim_no_tune,
                                         parse_double_list(sim_galphas),
                                         parse_int_list(sim_gks), sim_seed, threads,
                                         sim_out);
            }
            if (sim_mode == "diam-rate") {
                std::vector<int> grid = sim_ngrid.empty()
                                            ? std::vector<int>{640, 1280, 2560, 5120,
                                                               10240, 20480}
                                            : parse_int_list(sim_ngrid);
                return cmd_simulate_diam(sim_alpha, sim_d, sim_k, sim_w, grid, sim_reps,
                                         sim_seed, threads, sim_out);
            }
            if (sim_mode == "imse-rate") {
                std::vector<int> grid = sim_ngrid.empty()
                                            ? std::vector<int>{1000, 2000, 4000, 8000,
                                                               16000}
                                            : parse_int_list(sim_ngrid);
                return cmd_simulate_imse(sim_alpha, sim_d, sim_kscale, sim_kexp, 100,
                                         grid, sim_reps, sim_neval, sim_seed, threads,
                                         sim_out);
            }
            throw ValidationError("unknown simulate mode: " + sim_mode);
        }
        if (ate->parsed()) {
            return cmd_ate(ate_data, ate_sim, ate_n, ate_d, ate_folds, ate_level, ate_qmu,
                           ate_qpi, ate_trees, ate_tune_trees,
                           parse_double_list(ate_galphas), parse_int_list(ate_gks),
                           ate_clip, ate_rescale, ate_seed, threads, ate_out, ate_format);
        }
        if (diag->parsed()) {
            return cmd_diag_diameter(diag_forest, diag_out, diag_format);
        }
        if (report->parsed()) {
            return cmd_report(report_in, report_paired, report_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

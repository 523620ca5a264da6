#include "asbf/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "asbf/errors.hpp"

namespace asbf {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
    double v = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v,
                               std::chars_format::hex);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw ValidationError("malformed numeric token: " + token);
    }
    return v;
}

namespace {

constexpr const char* kSchemaTag = "asbf-forest";
constexpr int kSchemaVersion = 1;

void write_config(std::ostream& out, const ForestConfig& cfg) {
    out << "config " << cfg.b_trees << ' ' << format_double(cfg.alpha) << ' '
        << format_double(cfg.w) << ' ' << cfg.k << ' ' << cfg.mtry << ' ' << cfg.q
        << ' ' << cfg.seed << ' ' << to_string(cfg.rule) << '\n';
}

std::vector<std::string> tokens_of(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

[[noreturn]] void bad_line(const std::string& line) {
    throw ValidationError("malformed forest file line: " + line);
}

}  // namespace

std::string serialize_forest(const Forest& f) {
    std::ostringstream out;
    out << kSchemaTag << ' ' << kSchemaVersion << '\n';
    out << "shape " << f.d << ' ' << f.n_train << ' ' << f.n_trees() << '\n';
    write_config(out, f.cfg);
    out << "basis " << f.basis.d() << ' ' << f.basis.order() << ' ' << f.basis.dim()
        << '\n';
    for (int b = 0; b < f.n_trees(); ++b) {
        const Tree& tree = f.trees[b];
        out << "tree " << b << ' ' << tree.nodes.size() << ' ' << tree.n_leaves << ' '
            << tree.flags << '\n';
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const TreeNode& node = tree.nodes[i];
            if (!node.is_leaf()) {
                out << "split " << i << ' ' << node.dir << ' '
                    << format_double(node.threshold) << ' ' << node.left << ' '
                    << node.right << ' ' << node.flags << '\n';
            } else {
                out << "leaf " << i << ' ' << node.i_count << ' ' << node.flags << ' '
                    << node.model.order << ' ' << format_double(node.model.kappa) << ' '
                    << (node.model.singular_fallback ? 1 : 0);
                for (Eigen::Index t = 0; t < node.model.beta.size(); ++t) {
                    out << ' ' << format_double(node.model.beta(t));
                }
                out << " box";
                for (int j = 0; j < f.d; ++j) out << ' ' << format_double(node.box_lo(j));
                for (int j = 0; j < f.d; ++j) out << ' ' << format_double(node.box_hi(j));
                out << '\n';
            }
        }
    }
    out << "end\n";
    return out.str();
}

Forest deserialize_forest(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty forest file");
    {
        auto toks = tokens_of(line);
        if (toks.size() != 2 || toks[0] != kSchemaTag ||
            std::stoi(toks[1]) != kSchemaVersion) {
            throw ValidationError("unrecognized forest file schema: " + line);
        }
    }
    Forest f;
    int n_trees = 0;
    if (!std::getline(in, line)) bad_line("missing shape");
    {
        auto toks = tokens_of(line);
        if (toks.size() != 4 || toks[0] != "shape") bad_line(line);
        f.d = std::stoi(toks[1]);
        f.n_train = std::stoi(toks[2]);
        n_trees = std::stoi(toks[3]);
    }
    if (!std::getline(in, line)) bad_line("missing config");
    {
        auto toks = tokens_of(line);
        if (toks.size() != 9 || toks[0] != "config") bad_line(line);
        f.cfg.b_trees = std::stoi(toks[1]);
        f.cfg.alpha = parse_double(toks[2]);
        f.cfg.w = parse_double(toks[3]);
        f.cfg.k = std::stoi(toks[4]);
        f.cfg.mtry = std::stoi(toks[5]);
        f.cfg.q = std::stoi(toks[6]);
        f.cfg.seed = std::stoull(toks[7]);
        f.cfg.rule = direction_rule_from_string(toks[8]);
    }
    if (!std::getline(in, line)) bad_line("missing basis");
    {
        auto toks = tokens_of(line);
        if (toks.size() != 4 || toks[0] != "basis") bad_line(line);
        f.basis = PolyBasis(std::stoi(toks[1]), std::stoi(toks[2]));
        if (f.basis.dim() != std::stoi(toks[3])) {
            throw ValidationError("basis dimension mismatch in forest file");
        }
    }
    f.trees.resize(n_trees);
    for (int b = 0; b < n_trees; ++b) {
        if (!std::getline(in, line)) bad_line("missing tree header");
        auto toks = tokens_of(line);
        if (toks.size() != 5 || toks[0] != "tree" || std::stoi(toks[1]) != b) {
            bad_line(line);
        }
        Tree& tree = f.trees[b];
        const int n_nodes = std::stoi(toks[2]);
        tree.n_leaves = std::stoi(toks[3]);
        tree.flags = static_cast<std::uint32_t>(std::stoul(toks[4]));
        tree.nodes.resize(n_nodes);
        for (int i = 0; i < n_nodes; ++i) {
            if (!std::getline(in, line)) bad_line("missing node");
            auto nt = tokens_of(line);
            if (nt.size() < 2) bad_line(line);
            const int idx = std::stoi(nt[1]);
            if (idx < 0 || idx >= n_nodes) bad_line(line);
            TreeNode& node = tree.nodes[idx];
            if (nt[0] == "split") {
                if (nt.size() != 7) bad_line(line);
                node.dir = std::stoi(nt[2]);
                node.threshold = parse_double(nt[3]);
                node.left = std::stoi(nt[4]);
                node.right = std::stoi(nt[5]);
                node.flags = static_cast<std::uint32_t>(std::stoul(nt[6]));
            } else if (nt[0] == "leaf") {
                if (nt.size() < 7) bad_line(line);
                node.i_count = std::stoi(nt[2]);
                node.flags = static_cast<std::uint32_t>(std::stoul(nt[3]));
                node.model.order = std::stoi(nt[4]);
                node.model.kappa = parse_double(nt[5]);
                node.model.singular_fallback = nt[6] == "1";
                const int beta_len = f.basis.dim_of_order(node.model.order);
                if (static_cast<int>(nt.size()) != 7 + beta_len + 1 + 2 * f.d) bad_line(line);
                node.model.beta.resize(beta_len);
                for (int t = 0; t < beta_len; ++t) node.model.beta(t) = parse_double(nt[7 + t]);
                if (nt[7 + beta_len] != "box") bad_line(line);
                node.box_lo.resize(f.d);
                node.box_hi.resize(f.d);
                for (int j = 0; j < f.d; ++j) {
                    node.box_lo(j) = parse_double(nt[8 + beta_len + j]);
                    node.box_hi(j) = parse_double(nt[8 + beta_len + f.d + j]);
                }
            } else {
                bad_line(line);
            }
        }
    }
    if (!std::getline(in, line) || line != "end") bad_line("missing end marker");
    return f;
}

Forest deserialize_forest_string(const std::string& text) {
    std::istringstream in(text);
    return deserialize_forest(in);
}

void save_forest(const Forest& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << serialize_forest(f);
}

Forest load_forest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open forest file: " + path);
    return deserialize_forest(in);
}

std::string config_to_json(const ForestConfig& cfg) {
    nlohmann::json j;
    j["b_trees"] = cfg.b_trees;
    j["alpha"] = cfg.alpha;
    j["w"] = cfg.w;
    j["k"] = cfg.k;
    j["mtry"] = cfg.mtry;
    j["q"] = cfg.q;
    j["seed"] = cfg.seed;
    j["rule"] = to_string(cfg.rule);
    return j.dump(2);
}

ForestConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad config JSON: ") + e.what());
    }
    ForestConfig cfg;
    if (j.contains("b_trees")) cfg.b_trees = j["b_trees"].get<int>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("w")) cfg.w = j["w"].get<double>();
    if (j.contains("k")) cfg.k = j["k"].get<int>();
    if (j.contains("mtry")) cfg.mtry = j["mtry"].get<int>();
    if (j.contains("q")) cfg.q = j["q"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("rule")) cfg.rule = direction_rule_from_string(j["rule"].get<std::string>());
    return cfg;
}

}  // namespace asbf

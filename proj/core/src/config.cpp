#include "motivrec/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <set>
#include <sstream>

#include "motivrec/error.hpp"
#include "motivrec/text.hpp"

namespace motivrec {
namespace {

namespace pt = boost::property_tree;

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + value + "'");
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        int v = std::stoi(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(parse_int(key, text::trim(part)));
    return out;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

ConfigReport check_config(const PipelineConfig& cfg) {
    ConfigReport r;
    auto positive = [&](const char* name, int v) {
        if (v < 1) r.errors.push_back(std::string(name) + " must be >= 1 (got " + std::to_string(v) + ")");
    };
    positive("bundle_window", cfg.bundle_window);
    positive("bundle_stride", cfg.bundle_stride);
    if (cfg.bundle_stride > cfg.bundle_window) {
        r.errors.push_back("bundle_stride must not exceed bundle_window");
    }
    positive("k_exploit", cfg.k_exploit);
    positive("k_div", cfg.k_div);
    positive("k_social", cfg.k_social);
    positive("queries_per_plan", cfg.queries_per_plan);
    positive("retrieval_depth", cfg.retrieval_depth);
    positive("verifier_candidates", cfg.verifier_candidates);
    positive("min_count", cfg.min_count);
    positive("embedding_dim", cfg.embedding_dim);
    positive("max_output_tokens", cfg.max_output_tokens);
    if (!(cfg.mmr_lambda >= 0.0 && cfg.mmr_lambda <= 1.0)) {
        r.errors.push_back("mmr_lambda must be in [0, 1] (got " + format_double(cfg.mmr_lambda) + ")");
    }
    if (!(cfg.rrf_constant > 0.0)) {
        r.errors.push_back("rrf_constant must be > 0 (got " + format_double(cfg.rrf_constant) + ")");
    }
    if (!(cfg.reflection_threshold >= 0.0 && cfg.reflection_threshold <= 1.0)) {
        r.errors.push_back("reflection_threshold must be in [0, 1] (got " +
                           format_double(cfg.reflection_threshold) + ")");
    }
    if (cfg.max_reflections < 0) {
        r.errors.push_back("max_reflections must be >= 0 (got " + std::to_string(cfg.max_reflections) + ")");
    }
    if (cfg.top_k_eval.empty()) {
        r.errors.push_back("top_k_eval must list at least one cutoff");
    }
    for (std::size_t i = 0; i < cfg.top_k_eval.size(); ++i) {
        if (cfg.top_k_eval[i] < 1) {
            r.errors.push_back("top_k_eval cutoffs must be >= 1");
            break;
        }
        if (i > 0 && cfg.top_k_eval[i] <= cfg.top_k_eval[i - 1]) {
            r.errors.push_back("top_k_eval must be strictly increasing");
            break;
        }
    }
    if (cfg.ablation.reflection_on && cfg.max_reflections == 0) {
        r.warnings.push_back("reflection_on with max_reflections = 0 runs a single pass");
    }
    return r;
}

const PipelineConfig& validate_config(const PipelineConfig& cfg, std::vector<std::string>* warnings) {
    auto report = check_config(cfg);
    if (!report.ok()) throw ConfigError("invalid config: " + join(report.errors, "; "));
    if (warnings) warnings->insert(warnings->end(), report.warnings.begin(), report.warnings.end());
    return cfg;
}

PipelineConfig parse_config(const std::string& contents) {
    pt::ptree tree;
    std::istringstream in(contents);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    PipelineConfig cfg;
    std::vector<std::string> unknown;
    for (const auto& [key, node] : tree) {
        if (!node.empty()) {
            if (key != "ablation") {
                unknown.push_back("[" + key + "]");
                continue;
            }
            for (const auto& [akey, anode] : node) {
                const std::string v = text::trim(anode.data());
                if (akey == "annotation_on") cfg.ablation.annotation_on = parse_bool(akey, v);
                else if (akey == "exploration_on") cfg.ablation.exploration_on = parse_bool(akey, v);
                else if (akey == "reflection_on") cfg.ablation.reflection_on = parse_bool(akey, v);
                else unknown.push_back("ablation." + akey);
            }
            continue;
        }
        const std::string v = text::trim(node.data());
        if (key == "bundle_window") cfg.bundle_window = parse_int(key, v);
        else if (key == "bundle_stride") cfg.bundle_stride = parse_int(key, v);
        else if (key == "whole_history_bundle") cfg.whole_history_bundle = parse_bool(key, v);
        else if (key == "k_exploit") cfg.k_exploit = parse_int(key, v);
        else if (key == "k_div") cfg.k_div = parse_int(key, v);
        else if (key == "k_social") cfg.k_social = parse_int(key, v);
        else if (key == "mmr_lambda") cfg.mmr_lambda = parse_double(key, v);
        else if (key == "queries_per_plan") cfg.queries_per_plan = parse_int(key, v);
        else if (key == "retrieval_depth") cfg.retrieval_depth = parse_int(key, v);
        else if (key == "rrf_constant") cfg.rrf_constant = parse_double(key, v);
        else if (key == "reflection_threshold") cfg.reflection_threshold = parse_double(key, v);
        else if (key == "max_reflections") cfg.max_reflections = parse_int(key, v);
        else if (key == "verifier_candidates") cfg.verifier_candidates = parse_int(key, v);
        else if (key == "top_k_eval") cfg.top_k_eval = parse_int_list(key, v);
        else if (key == "min_rating") {
            if (v == "none" || v.empty()) cfg.min_rating.reset();
            else cfg.min_rating = parse_double(key, v);
        }
        else if (key == "min_count") cfg.min_count = parse_int(key, v);
        else if (key == "exclude_history") cfg.exclude_history = parse_bool(key, v);
        else if (key == "embedding_dim") cfg.embedding_dim = parse_int(key, v);
        else if (key == "max_output_tokens") cfg.max_output_tokens = parse_int(key, v);
        else if (key == "template_dir") cfg.template_dir = v;
        else unknown.push_back(key);
    }
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + join(unknown, ", "));
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_config(const PipelineConfig& cfg) {
    std::ostringstream os;
    auto b = [](bool v) { return v ? "true" : "false"; };
    std::string cutoffs;
    for (int k : cfg.top_k_eval) {
        if (!cutoffs.empty()) cutoffs += ",";
        cutoffs += std::to_string(k);
    }
    os << "bundle_window = " << cfg.bundle_window << "\n"
       << "bundle_stride = " << cfg.bundle_stride << "\n"
       << "whole_history_bundle = " << b(cfg.whole_history_bundle) << "\n"
       << "k_exploit = " << cfg.k_exploit << "\n"
       << "k_div = " << cfg.k_div << "\n"
       << "k_social = " << cfg.k_social << "\n"
       << "mmr_lambda = " << format_double(cfg.mmr_lambda) << "\n"
       << "queries_per_plan = " << cfg.queries_per_plan << "\n"
       << "retrieval_depth = " << cfg.retrieval_depth << "\n"
       << "rrf_constant = " << format_double(cfg.rrf_constant) << "\n"
       << "reflection_threshold = " << format_double(cfg.reflection_threshold) << "\n"
       << "max_reflections = " << cfg.max_reflections << "\n"
       << "verifier_candidates = " << cfg.verifier_candidates << "\n"
       << "top_k_eval = " << cutoffs << "\n"
       << "min_rating = " << (cfg.min_rating ? format_double(*cfg.min_rating) : std::string("none")) << "\n"
       << "min_count = " << cfg.min_count << "\n"
       << "exclude_history = " << b(cfg.exclude_history) << "\n"
       << "embedding_dim = " << cfg.embedding_dim << "\n"
       << "max_output_tokens = " << cfg.max_output_tokens << "\n";
    if (!cfg.template_dir.empty()) os << "template_dir = " << cfg.template_dir << "\n";
    os << "\n[ablation]\n"
       << "annotation_on = " << b(cfg.ablation.annotation_on) << "\n"
       << "exploration_on = " << b(cfg.ablation.exploration_on) << "\n"
       << "reflection_on = " << b(cfg.ablation.reflection_on) << "\n";
    return os.str();
}

std::string config_fingerprint(const PipelineConfig& cfg) {
    return text::hex64(text::fnv1a64(format_config(cfg)));
}

}  // namespace motivrec

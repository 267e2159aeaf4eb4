#pragma once

#include <optional>
#include <string>
#include <vector>

namespace motivrec {

struct AblationFlags {
    bool annotation_on = true;
    bool exploration_on = true;
    bool reflection_on = true;

    bool operator==(const AblationFlags&) const = default;
};

/// Every tunable of the pipeline. Defaults are the values used when a key is
/// absent from the config file.
struct PipelineConfig {
    // Motive bundling
    int bundle_window = 5;
    int bundle_stride = 5;
    bool whole_history_bundle = false;

    // Motive retrieval
    int k_exploit = 3;
    int k_div = 2;
    int k_social = 2;
    double mmr_lambda = 0.5;

    // Query synthesis and search
    int queries_per_plan = 4;
    int retrieval_depth = 100;
    double rrf_constant = 60.0;

    // Reflection
    double reflection_threshold = 0.8;
    int max_reflections = 2;
    int verifier_candidates = 10;

    // Evaluation
    std::vector<int> top_k_eval = {5, 10, 20};
    std::optional<double> min_rating = 3.0;
    int min_count = 5;
    bool exclude_history = true;

    AblationFlags ablation;

    // Embedding dimension of the mock backend.
    int embedding_dim = 256;
    int max_output_tokens = 512;
    std::string template_dir;

    bool operator==(const PipelineConfig&) const = default;

    int max_cutoff() const { return top_k_eval.empty() ? 0 : top_k_eval.back(); }
    /// Reflection budget after applying the ablation switch.
    int effective_reflections() const { return ablation.reflection_on ? max_reflections : 0; }
};

struct ConfigReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }
};

/// Checks every bound; collects all violations rather than stopping at the first.
ConfigReport check_config(const PipelineConfig& cfg);

/// Returns `cfg` unchanged when valid, otherwise throws ConfigError listing
/// every violated field. Warnings are appended to `warnings` when given.
const PipelineConfig& validate_config(const PipelineConfig& cfg,
                                      std::vector<std::string>* warnings = nullptr);

/// Reads the flat `key = value` file with an optional `[ablation]` section.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const std::string& contents);
std::string format_config(const PipelineConfig& cfg);

/// Stable hash of the canonical config text.
std::string config_fingerprint(const PipelineConfig& cfg);

}  // namespace motivrec

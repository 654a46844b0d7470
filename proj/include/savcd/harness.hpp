#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "savcd/augment.hpp"
#include "savcd/engine.hpp"
#include "savcd/sas.hpp"
#include "savcd/synthetic_backend.hpp"

namespace savcd {

// Everything one decode run needs. Exactly one of backend_url / script_path
// must be set.
struct RunConfig {
    std::optional<std::string> backend_url;
    std::optional<std::string> script_path;
    std::optional<std::string> image_path;
    std::string query;
    DecodingParams params;
    SasTemplate sas_template = SasTemplate::Full;
    bool sas_enabled = true;
    std::optional<AugmentationKind> augmentation_override;
    AugmentationKind fallback = AugmentationKind::Noise;
    std::optional<std::string> trace_path;
    // Initial context for HTTP backends; synthetic scripts carry their own.
    std::vector<TokenId> prompt_tokens = {0};
};

struct RunSummary {
    AugmentationKind chosen_augmentation = AugmentationKind::Noise;
    bool sas_ran = false;
    bool sas_valid = false;
    std::string sas_reason;
    StopReason stop_reason = StopReason::MaxTokens;
    std::vector<TokenId> tokens;
    std::vector<StepTrace> traces;
    double mean_beta_t = 0.0;
    double mean_candidates = 0.0;
    std::vector<double> entropy_series;
    double wall_seconds = 0.0;
};

// SAS (when enabled) -> augmentation -> full decode; writes the JSONL trace
// when configured. Errors: ConfigError for bad configuration or script
// files, BackendError for transport problems, ImageIoError for image files.
RunSummary run_decode(const RunConfig& config);

// Renders the summary as the CLI prints it.
std::string format_summary(const RunSummary& summary);

// Reads a PNG, applies one augmentation, writes the result.
void run_augment(const std::string& image_path, const std::string& out_path,
                 AugmentationKind kind, std::uint64_t seed);

// One scripted benchmark case: a synthetic script plus the token sequence a
// correct decode must produce.
struct SuiteCase {
    std::string name;
    SyntheticScript script;
    std::vector<TokenId> expected_tokens;
};

struct BenchSuite {
    std::vector<SuiteCase> cases;

    static BenchSuite load(const std::string& path);
};

struct AblateConfig {
    std::string suite_path;
    std::vector<ThresholdMode> modes;
    std::vector<double> gammas;  // one sat/hns row per value
    double alpha = 1.0;
    double beta = 0.1;  // used by the single apc row
    int max_tokens = 64;
};

struct AblateRow {
    ThresholdMode mode;
    std::optional<double> gamma;  // empty for none/apc rows
    double mean_beta_t = 0.0;
    double mean_candidates = 0.0;
    double exact_match_rate = 0.0;
};

// Runs every grid cell over the suite with greedy sampling (the ground
// truth is discrete); row order follows the config.
std::vector<AblateRow> ablate_rows(const AblateConfig& config);

// CSV with header mode,gamma,mean_beta_t,mean_candidates,exact_match_rate.
std::string run_ablate(const AblateConfig& config);

}  // namespace savcd

#include "savcd/harness.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "savcd/errors.hpp"
#include "savcd/http_backend.hpp"
#include "savcd/image_io.hpp"
#include "savcd/rng.hpp"
#include "savcd/trace.hpp"

namespace savcd {

namespace {

// Stand-in images for script-only runs: scripted expert/amateur roles are
// resolved by digest, so a pair of distinct constant images is enough.
RasterImage placeholder_clean() { return make_image(2, 2, 0); }
RasterImage placeholder_augmented() { return make_image(2, 2, 255); }

bool has_amateur_rows(const SyntheticScript& script) {
    return !script.amateur.steps.empty() || !script.amateur.by_context.empty();
}

struct PreparedBackend {
    std::unique_ptr<Backend> backend;
    std::optional<SyntheticScript> script;  // set for script-backed runs
};

PreparedBackend prepare_backend(const RunConfig& config,
                                const std::optional<RasterImage>& image) {
    if (config.backend_url.has_value() == config.script_path.has_value()) {
        throw ConfigError("exactly one of backend URL and script path is required");
    }
    PreparedBackend out;
    if (config.backend_url) {
        out.backend = std::make_unique<HttpBackend>(*config.backend_url);
        return out;
    }
    SyntheticScript script = SyntheticScript::load(*config.script_path);
    if (script.clean_digest && *script.clean_digest == "auto") {
        if (image) {
            script.clean_digest = image_digest_hex(*image);
        } else {
            script.clean_digest.reset();
        }
    }
    out.script = script;
    out.backend = std::make_unique<SyntheticBackend>(std::move(script));
    return out;
}

}  // namespace

RunSummary run_decode(const RunConfig& config) {
    auto begin = std::chrono::steady_clock::now();
    config.params.validate();

    std::optional<RasterImage> image;
    if (config.image_path) {
        image = read_png_file(*config.image_path);
    }

    PreparedBackend prepared = prepare_backend(config, image);
    Backend& backend = *prepared.backend;

    RunSummary summary;

    // Stage 1: pick the augmentation.
    if (config.augmentation_override) {
        summary.chosen_augmentation = *config.augmentation_override;
    } else if (config.sas_enabled) {
        if (config.query.empty()) {
            throw ConfigError("a query is required when the selection pass is on");
        }
        SasOutcome outcome = select_augmentation(backend, config.query,
                                                 config.sas_template,
                                                 config.fallback);
        summary.sas_ran = true;
        summary.sas_valid = outcome.valid;
        summary.sas_reason = outcome.reason;
        summary.chosen_augmentation = outcome.choice;
    } else {
        summary.chosen_augmentation = config.fallback;
    }

    // Stage 2: build the expert/amateur image pair.
    std::optional<RasterImage> clean = image;
    std::optional<RasterImage> augmented;
    if (image) {
        augmented = apply(summary.chosen_augmentation, *image,
                          derive_seed(config.params.seed, 1));
    } else if (prepared.script && has_amateur_rows(*prepared.script) &&
               !prepared.script->clean_digest) {
        // Image-free scripted run with a scripted amateur: substitute the
        // placeholder pair so the two roles stay distinguishable.
        clean = placeholder_clean();
        augmented = placeholder_augmented();
        auto rescripted = *prepared.script;
        rescripted.clean_digest = image_digest_hex(*clean);
        prepared.backend = std::make_unique<SyntheticBackend>(rescripted);
        prepared.script = std::move(rescripted);
    }

    // Stage 3: the decode loop itself.
    const std::vector<TokenId>& prompt_tokens =
        prepared.script ? prepared.script->prompt_tokens : config.prompt_tokens;
    DecodeResult result = decode(*prepared.backend, clean, augmented, prompt_tokens,
                                 config.params);

    if (config.trace_path) {
        write_trace_jsonl(*config.trace_path, result.traces);
    }

    summary.stop_reason = result.stop_reason;
    summary.tokens = result.tokens;
    double beta_sum = 0.0;
    double candidate_sum = 0.0;
    for (const StepTrace& trace : result.traces) {
        beta_sum += trace.beta_t;
        candidate_sum += trace.candidate_count();
        summary.entropy_series.push_back(trace.expert_entropy_bits);
    }
    if (!result.traces.empty()) {
        summary.mean_beta_t = beta_sum / static_cast<double>(result.traces.size());
        summary.mean_candidates =
            candidate_sum / static_cast<double>(result.traces.size());
    }
    summary.traces = std::move(result.traces);
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - begin)
            .count();
    return summary;
}

std::string format_summary(const RunSummary& summary) {
    std::ostringstream out;
    out << "chosen_augmentation: " << to_string(summary.chosen_augmentation);
    if (summary.sas_ran) {
        out << (summary.sas_valid ? " (selected)" : " (fallback)");
    }
    out << '\n';
    out << "tokens: " << summary.tokens.size() << " (stop: "
        << (summary.stop_reason == StopReason::EndToken ? "end_token" : "max_tokens")
        << ")\n";
    char line[64];
    std::snprintf(line, sizeof(line), "mean_beta_t: %.6f\n", summary.mean_beta_t);
    out << line;
    std::snprintf(line, sizeof(line), "mean_candidates: %.6f\n",
                  summary.mean_candidates);
    out << line;
    out << "entropy_bits:";
    for (double h : summary.entropy_series) {
        std::snprintf(line, sizeof(line), " %.4f", h);
        out << line;
    }
    out << '\n';
    std::snprintf(line, sizeof(line), "wall_seconds: %.3f\n", summary.wall_seconds);
    out << line;
    return out.str();
}

void run_augment(const std::string& image_path, const std::string& out_path,
                 AugmentationKind kind, std::uint64_t seed) {
    RasterImage image = read_png_file(image_path);
    write_png_file(out_path, apply(kind, image, seed));
}

BenchSuite BenchSuite::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open suite file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("suite " + path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("cases") || !j.at("cases").is_array()) {
        throw ConfigError("suite " + path + ": top level must hold a cases array");
    }
    BenchSuite suite;
    for (const auto& entry : j.at("cases")) {
        if (!entry.is_object()) {
            throw ConfigError("suite " + path + ": cases must be objects");
        }
        SuiteCase c;
        if (!entry.contains("name") || !entry.at("name").is_string()) {
            throw ConfigError("suite " + path + ": case missing name");
        }
        c.name = entry.at("name").get<std::string>();
        if (!entry.contains("script")) {
            throw ConfigError("suite " + path + ": case " + c.name +
                              " missing script");
        }
        c.script = SyntheticScript::from_json(entry.at("script"));
        if (!entry.contains("expected_tokens") ||
            !entry.at("expected_tokens").is_array()) {
            throw ConfigError("suite " + path + ": case " + c.name +
                              " missing expected_tokens");
        }
        for (const auto& t : entry.at("expected_tokens")) {
            if (!t.is_number_integer()) {
                throw ConfigError("suite " + path + ": case " + c.name +
                                  " expected_tokens must be integers");
            }
            c.expected_tokens.push_back(t.get<TokenId>());
        }
        suite.cases.push_back(std::move(c));
    }
    if (suite.cases.empty()) {
        throw ConfigError("suite " + path + ": no cases");
    }
    return suite;
}

namespace {

// Decodes one suite case under the cell's parameters and folds its stats
// into the accumulators.
void run_cell_case(const SuiteCase& suite_case, const DecodingParams& params,
                   double* beta_sum, double* candidate_sum, long* step_count,
                   int* matches) {
    SyntheticScript script = suite_case.script;
    std::optional<RasterImage> clean;
    std::optional<RasterImage> augmented;
    if (has_amateur_rows(script) && !script.clean_digest) {
        clean = placeholder_clean();
        augmented = placeholder_augmented();
        script.clean_digest = image_digest_hex(*clean);
    }
    SyntheticBackend backend(script);
    DecodeResult result =
        decode(backend, clean, augmented, script.prompt_tokens, params);
    for (const StepTrace& trace : result.traces) {
        *beta_sum += trace.beta_t;
        *candidate_sum += trace.candidate_count();
        ++*step_count;
    }
    if (result.tokens == suite_case.expected_tokens) {
        ++*matches;
    }
}

AblateRow run_cell(const BenchSuite& suite, const AblateConfig& config,
                   ThresholdMode mode, std::optional<double> gamma) {
    DecodingParams params;
    params.alpha = config.alpha;
    params.beta = config.beta;
    params.gamma = gamma.value_or(-0.5);
    params.threshold_mode = mode;
    params.sampling = SamplingMode::Greedy;  // ground truth is discrete
    params.max_tokens = config.max_tokens;

    AblateRow row;
    row.mode = mode;
    row.gamma = gamma;
    double beta_sum = 0.0;
    double candidate_sum = 0.0;
    long step_count = 0;
    int matches = 0;
    for (const SuiteCase& suite_case : suite.cases) {
        run_cell_case(suite_case, params, &beta_sum, &candidate_sum, &step_count,
                      &matches);
    }
    if (step_count > 0) {
        row.mean_beta_t = beta_sum / static_cast<double>(step_count);
        row.mean_candidates = candidate_sum / static_cast<double>(step_count);
    }
    row.exact_match_rate =
        static_cast<double>(matches) / static_cast<double>(suite.cases.size());
    return row;
}

}  // namespace

std::vector<AblateRow> ablate_rows(const AblateConfig& config) {
    if (config.modes.empty()) {
        throw ConfigError("ablation grid needs at least one threshold mode");
    }
    BenchSuite suite = BenchSuite::load(config.suite_path);
    std::vector<AblateRow> rows;
    for (ThresholdMode mode : config.modes) {
        if (mode == ThresholdMode::Sat || mode == ThresholdMode::Hns) {
            if (config.gammas.empty()) {
                throw ConfigError("ablation grid with sat/hns needs gamma values");
            }
            for (double gamma : config.gammas) {
                rows.push_back(run_cell(suite, config, mode, gamma));
            }
        } else {
            rows.push_back(run_cell(suite, config, mode, std::nullopt));
        }
    }
    return rows;
}

std::string run_ablate(const AblateConfig& config) {
    std::string csv = "mode,gamma,mean_beta_t,mean_candidates,exact_match_rate\n";
    for (const AblateRow& row : ablate_rows(config)) {
        char line[160];
        if (row.gamma) {
            std::snprintf(line, sizeof(line), "%s,%g,%.6f,%.6f,%.6f\n",
                          to_string(row.mode).c_str(), *row.gamma, row.mean_beta_t,
                          row.mean_candidates, row.exact_match_rate);
        } else {
            std::snprintf(line, sizeof(line), "%s,,%.6f,%.6f,%.6f\n",
                          to_string(row.mode).c_str(), row.mean_beta_t,
                          row.mean_candidates, row.exact_match_rate);
        }
        csv += line;
    }
    return csv;
}

}  // namespace savcd

#include "savcd/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "savcd/errors.hpp"
#include "savcd/harness.hpp"
#include "savcd/stub_server.hpp"

namespace savcd {

namespace {

AugmentationKind parse_augmentation(const std::string& text) {
    auto kind = augmentation_from_string(text);
    if (!kind) {
        throw ConfigError("unknown augmentation: " + text);
    }
    return *kind;
}

struct DecodeArgs {
    std::string config_path;
    std::string backend_url;
    std::string script_path;
    std::string image_path;
    std::string query;
    DecodingParams params;
    std::string threshold_mode = "sat";
    std::string sampling = "multinomial";
    std::string sas_template = "full";
    bool no_sas = false;
    std::string augmentation;
    std::string trace_path;
};

std::string strip(const std::string& text) {
    auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

std::string unquote(const std::string& value) {
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\''))) {
        return value.substr(1, value.size() - 2);
    }
    return value;
}

double config_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double parsed = std::stod(value, &used);
        if (used == value.size()) {
            return parsed;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("config value for " + key + " is not a number: " + value);
}

std::uint64_t config_u64(const std::string& key, const std::string& value) {
    try {
        if (!value.empty() && value[0] != '-') {
            std::size_t used = 0;
            std::uint64_t parsed = std::stoull(value, &used);
            if (used == value.size()) {
                return parsed;
            }
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("config value for " + key +
                      " is not an unsigned integer: " + value);
}

int config_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        int parsed = std::stoi(value, &used);
        if (used == value.size()) {
            return parsed;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("config value for " + key + " is not an integer: " + value);
}

bool config_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") {
        return true;
    }
    if (value == "false" || value == "0") {
        return false;
    }
    throw ConfigError("config value for " + key + " is not a boolean: " + value);
}

// CLI11 only runs its config-file pass on the root app, never on a
// subcommand, so the decode config file is applied by hand: key=value lines
// named after the flags, # comments, optional quotes. Flags given on the
// command line win; the exclusive backend/script pair is overridden as a
// unit.
void apply_config_file(const CLI::App& cmd, DecodeArgs& args) {
    std::ifstream in(args.config_path);
    if (!in.good()) {
        throw ConfigError("cannot open config file: " + args.config_path);
    }
    const bool source_on_cli =
        cmd.count("--backend") > 0 || cmd.count("--script") > 0;
    auto given = [&cmd](const char* flag) { return cmd.count(flag) > 0; };
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string entry = strip(line);
        if (entry.empty() || entry[0] == '#') {
            continue;
        }
        auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not key=value: " + entry);
        }
        std::string key = strip(entry.substr(0, eq));
        std::string value = unquote(strip(entry.substr(eq + 1)));
        if (key == "backend") {
            if (!source_on_cli) args.backend_url = value;
        } else if (key == "script") {
            if (!source_on_cli) args.script_path = value;
        } else if (key == "image") {
            if (!given("--image")) args.image_path = value;
        } else if (key == "query") {
            if (!given("--query")) args.query = value;
        } else if (key == "alpha") {
            if (!given("--alpha")) args.params.alpha = config_number(key, value);
        } else if (key == "beta") {
            if (!given("--beta")) args.params.beta = config_number(key, value);
        } else if (key == "gamma") {
            if (!given("--gamma")) args.params.gamma = config_number(key, value);
        } else if (key == "threshold-mode") {
            if (!given("--threshold-mode")) args.threshold_mode = value;
        } else if (key == "sampling") {
            if (!given("--sampling")) args.sampling = value;
        } else if (key == "seed") {
            if (!given("--seed")) args.params.seed = config_u64(key, value);
        } else if (key == "max-tokens") {
            if (!given("--max-tokens")) args.params.max_tokens = config_int(key, value);
        } else if (key == "sas-template") {
            if (!given("--sas-template")) args.sas_template = value;
        } else if (key == "no-sas") {
            if (!given("--no-sas")) args.no_sas = config_bool(key, value);
        } else if (key == "augmentation") {
            if (!given("--augmentation")) args.augmentation = value;
        } else if (key == "trace") {
            if (!given("--trace")) args.trace_path = value;
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
}

int do_decode(const DecodeArgs& args) {
    RunConfig config;
    if (!args.backend_url.empty()) {
        config.backend_url = args.backend_url;
    }
    if (!args.script_path.empty()) {
        config.script_path = args.script_path;
    }
    if (config.backend_url.has_value() == config.script_path.has_value()) {
        throw ConfigError("exactly one of --backend and --script is required");
    }
    if (!args.image_path.empty()) {
        config.image_path = args.image_path;
    }
    config.query = args.query;
    config.params = args.params;
    config.params.threshold_mode = threshold_mode_from_string(args.threshold_mode);
    config.params.sampling = sampling_mode_from_string(args.sampling);
    config.sas_template = sas_template_from_string(args.sas_template);
    config.sas_enabled = !args.no_sas;
    if (!args.augmentation.empty()) {
        config.augmentation_override = parse_augmentation(args.augmentation);
    }
    if (!args.trace_path.empty()) {
        config.trace_path = args.trace_path;
    }

    RunSummary summary = run_decode(config);
    std::cout << format_summary(summary);
    return 0;
}

struct AblateArgs {
    std::string suite_path;
    std::vector<std::string> modes = {"none", "apc", "sat", "hns"};
    std::vector<double> gammas = {-0.5};
    double alpha = 1.0;
    double beta = 0.1;
    int max_tokens = 64;
    std::string out_path;
};

int do_ablate(const AblateArgs& args) {
    AblateConfig config;
    config.suite_path = args.suite_path;
    for (const std::string& mode : args.modes) {
        config.modes.push_back(threshold_mode_from_string(mode));
    }
    config.gammas = args.gammas;
    config.alpha = args.alpha;
    config.beta = args.beta;
    config.max_tokens = args.max_tokens;

    std::string csv = run_ablate(config);
    if (args.out_path.empty()) {
        std::cout << csv;
        return 0;
    }
    std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot open output file: " + args.out_path);
    }
    out << csv;
    if (!out.good()) {
        throw ConfigError("cannot write output file: " + args.out_path);
    }
    return 0;
}

struct AugmentArgs {
    std::string image_path;
    std::string out_path;
    std::string augmentation;
    std::uint64_t seed = 0;
};

struct StubArgs {
    std::string script_path;
    std::string host = "127.0.0.1";
    int port = 0;
};

int do_stub(const StubArgs& args) {
    StubServer server(SyntheticScript::load(args.script_path));
    int port = server.start(args.host, args.port);
    std::cout << "listening on http://" << args.host << ":" << port << std::endl;
    server.wait();
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Contrastive decoding engine with query-conditioned visual "
                 "augmentation and entropy-adaptive truncation"};
    app.require_subcommand(1);

    DecodeArgs decode_args;
    CLI::App* decode_cmd =
        app.add_subcommand("decode", "Run the selection pass, the augmentation, "
                                     "and the contrastive decode loop");
    decode_cmd->add_option("--config", decode_args.config_path,
                           "Key/value config file mirroring the flags");
    auto* backend_opt = decode_cmd->add_option(
        "--backend", decode_args.backend_url, "Logit server URL (scheme://host:port)");
    auto* script_opt = decode_cmd->add_option(
        "--script", decode_args.script_path, "Synthetic backend script (JSON)");
    backend_opt->excludes(script_opt);
    script_opt->excludes(backend_opt);
    decode_cmd->add_option("--image", decode_args.image_path,
                           "Clean input image (8-bit RGB PNG)");
    decode_cmd->add_option("--query", decode_args.query,
                           "Query driving the augmentation selection");
    decode_cmd->add_option("--alpha", decode_args.params.alpha,
                           "Contrast amplification")
        ->capture_default_str();
    decode_cmd->add_option("--beta", decode_args.params.beta,
                           "Static plausibility cutoff (apc mode)")
        ->capture_default_str();
    decode_cmd->add_option("--gamma", decode_args.params.gamma,
                           "Entropy-threshold steepness (sat/hns modes)")
        ->capture_default_str();
    decode_cmd->add_option("--threshold-mode", decode_args.threshold_mode,
                           "Vocabulary truncation rule")
        ->check(CLI::IsMember({"none", "apc", "sat", "hns"}))
        ->capture_default_str();
    decode_cmd->add_option("--sampling", decode_args.sampling, "Token selection rule")
        ->check(CLI::IsMember({"greedy", "multinomial"}))
        ->capture_default_str();
    decode_cmd->add_option("--seed", decode_args.params.seed,
                           "Seed for sampling and augmentation randomness")
        ->capture_default_str();
    decode_cmd->add_option("--max-tokens", decode_args.params.max_tokens,
                           "Generation budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    decode_cmd->add_option("--sas-template", decode_args.sas_template,
                           "Selection prompt variant")
        ->check(CLI::IsMember({"full", "no-reasoning", "no-icl", "minimal"}))
        ->capture_default_str();
    decode_cmd->add_flag("--no-sas", decode_args.no_sas,
                         "Skip the selection pass (use --augmentation or the "
                         "noise fallback)");
    decode_cmd->add_option("--augmentation", decode_args.augmentation,
                           "Fixed augmentation choice, bypassing selection");
    decode_cmd->add_option("--trace", decode_args.trace_path,
                           "Write a JSONL step trace to this path");

    AblateArgs ablate_args;
    CLI::App* ablate_cmd = app.add_subcommand(
        "ablate", "Run a threshold-mode grid over a scripted benchmark suite");
    ablate_cmd
        ->add_option("--script", ablate_args.suite_path, "Benchmark suite (JSON)")
        ->required();
    ablate_cmd->add_option("--modes", ablate_args.modes, "Threshold modes to run")
        ->delimiter(',')
        ->capture_default_str();
    ablate_cmd
        ->add_option("--gammas", ablate_args.gammas, "Gamma values for sat/hns rows")
        ->delimiter(',')
        ->capture_default_str();
    ablate_cmd->add_option("--alpha", ablate_args.alpha, "Contrast amplification")
        ->capture_default_str();
    ablate_cmd->add_option("--beta", ablate_args.beta, "Cutoff for the apc row")
        ->capture_default_str();
    ablate_cmd->add_option("--max-tokens", ablate_args.max_tokens,
                           "Per-case generation budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    ablate_cmd->add_option("--out", ablate_args.out_path,
                           "CSV output path (default: stdout)");

    AugmentArgs augment_args;
    CLI::App* augment_cmd =
        app.add_subcommand("augment", "Apply one augmentation to a PNG");
    augment_cmd->add_option("--image", augment_args.image_path, "Input PNG")
        ->required();
    augment_cmd->add_option("--out", augment_args.out_path, "Output PNG")
        ->required();
    augment_cmd
        ->add_option("--augmentation", augment_args.augmentation,
                     "Augmentation to apply")
        ->required();
    augment_cmd->add_option("--seed", augment_args.seed, "Placement/noise seed")
        ->capture_default_str();

    StubArgs stub_args;
    CLI::App* stub_cmd = app.add_subcommand(
        "stub", "Serve a synthetic script over the HTTP protocol");
    stub_cmd->add_option("--script", stub_args.script_path, "Script to serve (JSON)")
        ->required();
    stub_cmd->add_option("--host", stub_args.host, "Bind address")
        ->capture_default_str();
    stub_cmd->add_option("--port", stub_args.port, "Port (0 picks a free one)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (decode_cmd->parsed()) {
            if (!decode_args.config_path.empty()) {
                apply_config_file(*decode_cmd, decode_args);
            }
            return do_decode(decode_args);
        }
        if (ablate_cmd->parsed()) {
            return do_ablate(ablate_args);
        }
        if (augment_cmd->parsed()) {
            run_augment(augment_args.image_path, augment_args.out_path,
                        parse_augmentation(augment_args.augmentation),
                        augment_args.seed);
            return 0;
        }
        if (stub_cmd->parsed()) {
            return do_stub(stub_args);
        }
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << '\n';
        return 3;
    } catch (const ImageIoError& e) {
        std::cerr << "image error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace savcd

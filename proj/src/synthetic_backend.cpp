#include "savcd/synthetic_backend.hpp"

#include <fstream>
#include <sstream>

#include "savcd/errors.hpp"

namespace savcd {

namespace {

std::vector<double> parse_row(const nlohmann::json& j, int vocab_size,
                              const std::string& where) {
    if (!j.is_array()) {
        throw ConfigError("script: " + where + " must be an array of numbers");
    }
    std::vector<double> row;
    row.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw ConfigError("script: " + where + " contains a non-number");
        }
        row.push_back(v.get<double>());
    }
    if (static_cast<int>(row.size()) != vocab_size) {
        throw ConfigError("script: " + where + " has length " +
                          std::to_string(row.size()) + ", expected vocab_size " +
                          std::to_string(vocab_size));
    }
    return row;
}

RoleScript parse_role(const nlohmann::json& j, int vocab_size,
                      const std::string& role) {
    if (!j.is_object()) {
        throw ConfigError("script: " + role + " must be an object");
    }
    RoleScript out;
    if (j.contains("steps")) {
        const auto& steps = j.at("steps");
        if (!steps.is_array()) {
            throw ConfigError("script: " + role + ".steps must be an array");
        }
        for (std::size_t i = 0; i < steps.size(); ++i) {
            out.steps.push_back(parse_row(steps[i], vocab_size,
                                          role + ".steps[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("by_context")) {
        const auto& rows = j.at("by_context");
        if (!rows.is_object()) {
            throw ConfigError("script: " + role + ".by_context must be an object");
        }
        for (const auto& [key, value] : rows.items()) {
            out.by_context[key] =
                parse_row(value, vocab_size, role + ".by_context[" + key + "]");
        }
    }
    return out;
}

std::string join_tokens(const std::vector<TokenId>& tokens) {
    std::ostringstream out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        out << tokens[i];
    }
    return out.str();
}

}  // namespace

SyntheticScript SyntheticScript::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("script: top level must be a JSON object");
    }
    SyntheticScript s;
    try {
        s.vocab_size = j.at("vocab_size").get<int>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("script: missing or non-integer vocab_size");
    }
    if (s.vocab_size < 1) {
        throw ConfigError("script: vocab_size must be >= 1");
    }
    try {
        s.end_token = j.at("end_token").get<TokenId>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("script: missing or non-integer end_token");
    }
    if (s.end_token < 0 || s.end_token >= s.vocab_size) {
        throw ConfigError("script: end_token outside [0, vocab_size)");
    }
    if (j.contains("prompt_tokens")) {
        const auto& pt = j.at("prompt_tokens");
        if (!pt.is_array() || pt.empty()) {
            throw ConfigError("script: prompt_tokens must be a nonempty array");
        }
        s.prompt_tokens.clear();
        for (const auto& v : pt) {
            if (!v.is_number_integer()) {
                throw ConfigError("script: prompt_tokens contains a non-integer");
            }
            s.prompt_tokens.push_back(v.get<TokenId>());
        }
    }
    if (j.contains("strict")) {
        if (!j.at("strict").is_boolean()) {
            throw ConfigError("script: strict must be a boolean");
        }
        s.strict = j.at("strict").get<bool>();
    }
    if (j.contains("clean_digest")) {
        if (!j.at("clean_digest").is_string()) {
            throw ConfigError("script: clean_digest must be a string");
        }
        s.clean_digest = j.at("clean_digest").get<std::string>();
    }
    if (j.contains("expert")) {
        s.expert = parse_role(j.at("expert"), s.vocab_size, "expert");
    }
    if (j.contains("amateur")) {
        s.amateur = parse_role(j.at("amateur"), s.vocab_size, "amateur");
    }
    if (j.contains("default_logits")) {
        s.default_logits = parse_row(j.at("default_logits"), s.vocab_size,
                                     "default_logits");
    }
    if (j.contains("completions")) {
        const auto& c = j.at("completions");
        if (!c.is_object()) {
            throw ConfigError("script: completions must be an object");
        }
        for (const auto& [key, value] : c.items()) {
            if (!value.is_string()) {
                throw ConfigError("script: completions[" + key + "] must be a string");
            }
            s.completions[key] = value.get<std::string>();
        }
    }
    if (j.contains("completion_contains")) {
        const auto& c = j.at("completion_contains");
        if (!c.is_array()) {
            throw ConfigError("script: completion_contains must be an array");
        }
        for (const auto& pair : c) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
                !pair[1].is_string()) {
                throw ConfigError(
                    "script: completion_contains entries must be [needle, text]");
            }
            s.completion_contains.emplace_back(pair[0].get<std::string>(),
                                               pair[1].get<std::string>());
        }
    }
    return s;
}

nlohmann::json SyntheticScript::to_json() const {
    nlohmann::json j;
    j["vocab_size"] = vocab_size;
    j["end_token"] = end_token;
    j["prompt_tokens"] = prompt_tokens;
    j["strict"] = strict;
    if (clean_digest) {
        j["clean_digest"] = *clean_digest;
    }
    auto role_json = [](const RoleScript& role) {
        nlohmann::json r = nlohmann::json::object();
        if (!role.steps.empty()) {
            r["steps"] = role.steps;
        }
        if (!role.by_context.empty()) {
            r["by_context"] = role.by_context;
        }
        return r;
    };
    if (!expert.steps.empty() || !expert.by_context.empty()) {
        j["expert"] = role_json(expert);
    }
    if (!amateur.steps.empty() || !amateur.by_context.empty()) {
        j["amateur"] = role_json(amateur);
    }
    if (default_logits) {
        j["default_logits"] = *default_logits;
    }
    if (!completions.empty()) {
        j["completions"] = completions;
    }
    if (!completion_contains.empty()) {
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& [needle, text] : completion_contains) {
            pairs.push_back(nlohmann::json::array({needle, text}));
        }
        j["completion_contains"] = pairs;
    }
    return j;
}

SyntheticScript SyntheticScript::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open script file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("script " + path + ": " + e.what());
    }
    return from_json(j);
}

SyntheticBackend::SyntheticBackend(SyntheticScript script)
    : script_(std::move(script)) {}

SessionInfo SyntheticBackend::open_session(const std::optional<RasterImage>& image) {
    std::lock_guard<std::mutex> lock(mu_);
    Session session;
    if (image && script_.clean_digest) {
        session.amateur = image_digest_hex(*image) != *script_.clean_digest;
    }
    std::string id = "syn-" + std::to_string(next_id_++);
    sessions_[id] = session;
    return SessionInfo{id, script_.vocab_size, script_.end_token};
}

const SyntheticBackend::Session& SyntheticBackend::find_session(
    const std::string& session_id) const {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw BackendError("unknown session: " + session_id);
    }
    return it->second;
}

LogitVector SyntheticBackend::next_logits(const std::string& session_id,
                                          const std::vector<TokenId>& tokens) {
    std::lock_guard<std::mutex> lock(mu_);
    const Session& session = find_session(session_id);
    if (tokens.empty()) {
        throw BackendError("next_logits requires a nonempty token context");
    }
    const RoleScript& role = session.amateur ? script_.amateur : script_.expert;

    auto ctx = role.by_context.find(join_tokens(tokens));
    if (ctx != role.by_context.end()) {
        return LogitVector(ctx->second);
    }
    auto step = static_cast<std::ptrdiff_t>(tokens.size()) -
                static_cast<std::ptrdiff_t>(script_.prompt_tokens.size());
    if (step >= 0 && step < static_cast<std::ptrdiff_t>(role.steps.size())) {
        return LogitVector(role.steps[static_cast<std::size_t>(step)]);
    }
    if (script_.strict) {
        throw BackendError("no scripted logits for context [" + join_tokens(tokens) +
                           "] (" + (session.amateur ? "amateur" : "expert") + ")");
    }
    if (script_.default_logits) {
        return LogitVector(*script_.default_logits);
    }
    return LogitVector(std::vector<double>(
        static_cast<std::size_t>(script_.vocab_size), 0.0));
}

std::string SyntheticBackend::generate_text(const std::string& session_id,
                                            const std::string& prompt,
                                            int /*max_tokens*/, bool /*greedy*/) {
    std::lock_guard<std::mutex> lock(mu_);
    find_session(session_id);
    if (prompt.empty()) {
        throw BackendError("generate_text requires a nonempty prompt");
    }
    auto exact = script_.completions.find(prompt);
    if (exact != script_.completions.end()) {
        return exact->second;
    }
    for (const auto& [needle, text] : script_.completion_contains) {
        if (prompt.find(needle) != std::string::npos) {
            return text;
        }
    }
    if (script_.strict) {
        throw BackendError("no scripted completion for the given prompt");
    }
    return "";
}

void SyntheticBackend::close_session(const std::string& session_id) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw BackendError("unknown session: " + session_id);
    }
    sessions_.erase(it);
}

int SyntheticBackend::open_session_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return static_cast<int>(sessions_.size());
}

}  // namespace savcd

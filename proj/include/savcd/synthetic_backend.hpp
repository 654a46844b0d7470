#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "savcd/backend.hpp"
#include "savcd/dist.hpp"
#include "savcd/image.hpp"

namespace savcd {

// Logit rows for one role. Context-keyed rows (comma-joined token sequence)
// take precedence over step-indexed rows.
struct RoleScript {
    std::vector<std::vector<double>> steps;
    std::map<std::string, std::vector<double>> by_context;
};

// Scripted model behavior for verification runs. Sessions opened with no
// image, or with an image whose digest equals clean_digest, read the expert
// tables; any other image reads the amateur tables. Without a clean_digest
// every session is an expert.
struct SyntheticScript {
    int vocab_size = 0;
    TokenId end_token = 0;
    std::vector<TokenId> prompt_tokens = {0};
    bool strict = false;
    std::optional<std::string> clean_digest;  // "auto": harness fills it in
    RoleScript expert;
    RoleScript amateur;
    std::optional<std::vector<double>> default_logits;
    std::map<std::string, std::string> completions;
    // Ordered (needle, completion) pairs; first needle found in the prompt wins.
    std::vector<std::pair<std::string, std::string>> completion_contains;

    static SyntheticScript from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    // Reads and parses a script file; throws ConfigError on any problem.
    static SyntheticScript load(const std::string& path);
};

// In-process backend that replays a script. Referentially transparent:
// results depend only on (script, image digest, token sequence).
class SyntheticBackend : public Backend {
  public:
    explicit SyntheticBackend(SyntheticScript script);

    SessionInfo open_session(const std::optional<RasterImage>& image) override;
    LogitVector next_logits(const std::string& session_id,
                            const std::vector<TokenId>& tokens) override;
    std::string generate_text(const std::string& session_id,
                              const std::string& prompt, int max_tokens,
                              bool greedy) override;
    void close_session(const std::string& session_id) override;

    const SyntheticScript& script() const { return script_; }
    int open_session_count() const;

  private:
    struct Session {
        bool amateur = false;
    };

    const Session& find_session(const std::string& session_id) const;

    SyntheticScript script_;
    std::map<std::string, Session> sessions_;
    std::uint64_t next_id_ = 0;
    mutable std::mutex mu_;  // the stub server drives this concurrently
};

}  // namespace savcd

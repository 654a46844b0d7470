#pragma once

#include <optional>
#include <string>
#include <vector>

#include "savcd/dist.hpp"
#include "savcd/image.hpp"

namespace savcd {

struct SessionInfo {
    std::string session_id;
    int vocab_size = 0;
    TokenId end_token = 0;
};

// Model-access contract. A session binds an optional image once; per-step
// calls pass the full token context (the backend owns any incremental state).
class Backend {
  public:
    virtual ~Backend() = default;

    virtual SessionInfo open_session(const std::optional<RasterImage>& image) = 0;

    // Next-position logits for the given context. Length must equal the
    // session's vocab_size.
    virtual LogitVector next_logits(const std::string& session_id,
                                    const std::vector<TokenId>& tokens) = 0;

    // Free-form completion for a prompt string (the selection pass).
    virtual std::string generate_text(const std::string& session_id,
                                      const std::string& prompt, int max_tokens,
                                      bool greedy) = 0;

    virtual void close_session(const std::string& session_id) = 0;
};

// Opens a session on construction, closes it on destruction. Close failures
// during unwind are swallowed; everything else propagates.
class ScopedSession {
  public:
    ScopedSession(Backend& backend, const std::optional<RasterImage>& image);
    ~ScopedSession();

    ScopedSession(const ScopedSession&) = delete;
    ScopedSession& operator=(const ScopedSession&) = delete;
    ScopedSession(ScopedSession&& other) noexcept;
    ScopedSession& operator=(ScopedSession&&) = delete;

    const SessionInfo& info() const { return info_; }
    const std::string& id() const { return info_.session_id; }

  private:
    Backend* backend_;
    SessionInfo info_;
};

}  // namespace savcd

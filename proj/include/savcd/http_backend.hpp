#pragma once

#include <memory>
#include <string>

#include "savcd/backend.hpp"

namespace savcd {

// Backend over the HTTP logit-server protocol. base_url is scheme://host:port
// (no path); connection problems and non-2xx replies become BackendError.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(const std::string& base_url);
    ~HttpBackend() override;

    SessionInfo open_session(const std::optional<RasterImage>& image) override;
    LogitVector next_logits(const std::string& session_id,
                            const std::vector<TokenId>& tokens) override;
    std::string generate_text(const std::string& session_id,
                              const std::string& prompt, int max_tokens,
                              bool greedy) override;
    void close_session(const std::string& session_id) override;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace savcd

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "savcd/dist.hpp"

namespace savcd::wire {

// HTTP body shapes, field names fixed by the protocol. Parsers throw
// BackendError naming the offending field.

struct SessionRequest {
    std::optional<std::string> image_png_b64;

    nlohmann::json to_json() const;
    static SessionRequest from_json(const nlohmann::json& j);
};

struct SessionResponse {
    int vocab_size = 0;
    TokenId end_token = 0;
    std::string session_id;

    nlohmann::json to_json() const;
    static SessionResponse from_json(const nlohmann::json& j);
};

struct LogitsRequest {
    std::string session_id;
    std::vector<TokenId> tokens;

    nlohmann::json to_json() const;
    static LogitsRequest from_json(const nlohmann::json& j);
};

struct LogitsResponse {
    std::vector<double> logits;

    nlohmann::json to_json() const;
    static LogitsResponse from_json(const nlohmann::json& j);
};

struct GenerateRequest {
    std::string session_id;
    std::string prompt;
    int max_tokens = 0;
    bool greedy = true;

    nlohmann::json to_json() const;
    static GenerateRequest from_json(const nlohmann::json& j);
};

struct GenerateResponse {
    std::string text;

    nlohmann::json to_json() const;
    static GenerateResponse from_json(const nlohmann::json& j);
};

struct ErrorResponse {
    std::string error;

    nlohmann::json to_json() const;
    static ErrorResponse from_json(const nlohmann::json& j);
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
// Strict decoder: rejects bad characters and malformed padding.
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace savcd::wire

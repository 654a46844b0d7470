#include "savcd/wire.hpp"

#include <array>

#include "savcd/errors.hpp"

namespace savcd::wire {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& message, const char* field) {
    throw BackendError(message + ": " + field);
}

int require_int(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_number_integer()) {
        bad_field("wire message missing integer field", field);
    }
    return j.at(field).get<int>();
}

bool require_bool(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_boolean()) {
        bad_field("wire message missing boolean field", field);
    }
    return j.at(field).get<bool>();
}

std::string require_string(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_string()) {
        bad_field("wire message missing string field", field);
    }
    return j.at(field).get<std::string>();
}

}  // namespace

json SessionRequest::to_json() const {
    json j;
    j["image_png_b64"] = image_png_b64 ? json(*image_png_b64) : json(nullptr);
    return j;
}

SessionRequest SessionRequest::from_json(const json& j) {
    if (!j.contains("image_png_b64")) {
        bad_field("wire message missing field", "image_png_b64");
    }
    const auto& v = j.at("image_png_b64");
    SessionRequest out;
    if (v.is_string()) {
        out.image_png_b64 = v.get<std::string>();
    } else if (!v.is_null()) {
        bad_field("wire field must be string or null", "image_png_b64");
    }
    return out;
}

json SessionResponse::to_json() const {
    json j;
    j["vocab_size"] = vocab_size;
    j["end_token"] = end_token;
    j["session_id"] = session_id;
    return j;
}

SessionResponse SessionResponse::from_json(const json& j) {
    SessionResponse out;
    out.vocab_size = require_int(j, "vocab_size");
    out.end_token = require_int(j, "end_token");
    out.session_id = require_string(j, "session_id");
    return out;
}

json LogitsRequest::to_json() const {
    json j;
    j["session_id"] = session_id;
    j["tokens"] = tokens;
    return j;
}

LogitsRequest LogitsRequest::from_json(const json& j) {
    LogitsRequest out;
    out.session_id = require_string(j, "session_id");
    if (!j.contains("tokens") || !j.at("tokens").is_array()) {
        bad_field("wire message missing array field", "tokens");
    }
    for (const auto& t : j.at("tokens")) {
        if (!t.is_number_integer()) {
            bad_field("wire field must hold integers", "tokens");
        }
        out.tokens.push_back(t.get<TokenId>());
    }
    return out;
}

json LogitsResponse::to_json() const {
    json j;
    j["logits"] = logits;
    return j;
}

LogitsResponse LogitsResponse::from_json(const json& j) {
    LogitsResponse out;
    if (!j.contains("logits") || !j.at("logits").is_array()) {
        bad_field("wire message missing array field", "logits");
    }
    for (const auto& v : j.at("logits")) {
        if (!v.is_number()) {
            bad_field("wire field must hold numbers", "logits");
        }
        out.logits.push_back(v.get<double>());
    }
    return out;
}

json GenerateRequest::to_json() const {
    json j;
    j["session_id"] = session_id;
    j["prompt"] = prompt;
    j["max_tokens"] = max_tokens;
    j["greedy"] = greedy;
    return j;
}

GenerateRequest GenerateRequest::from_json(const json& j) {
    GenerateRequest out;
    out.session_id = require_string(j, "session_id");
    out.prompt = require_string(j, "prompt");
    out.max_tokens = require_int(j, "max_tokens");
    out.greedy = require_bool(j, "greedy");
    return out;
}

json GenerateResponse::to_json() const {
    json j;
    j["text"] = text;
    return j;
}

GenerateResponse GenerateResponse::from_json(const json& j) {
    GenerateResponse out;
    out.text = require_string(j, "text");
    return out;
}

json ErrorResponse::to_json() const {
    json j;
    j["error"] = error;
    return j;
}

ErrorResponse ErrorResponse::from_json(const json& j) {
    ErrorResponse out;
    out.error = require_string(j, "error");
    return out;
}

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::array<int, 256> build_reverse_table() {
    std::array<int, 256> table{};
    table.fill(-1);
    for (int i = 0; i < 64; ++i) {
        table[static_cast<unsigned char>(kB64Alphabet[i])] = i;
    }
    return table;
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        std::uint32_t chunk = (static_cast<std::uint32_t>(bytes[i]) << 16) |
                              (static_cast<std::uint32_t>(bytes[i + 1]) << 8) |
                              bytes[i + 2];
        out.push_back(kB64Alphabet[(chunk >> 18) & 0x3F]);
        out.push_back(kB64Alphabet[(chunk >> 12) & 0x3F]);
        out.push_back(kB64Alphabet[(chunk >> 6) & 0x3F]);
        out.push_back(kB64Alphabet[chunk & 0x3F]);
    }
    std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        std::uint32_t chunk = static_cast<std::uint32_t>(bytes[i]) << 16;
        out.push_back(kB64Alphabet[(chunk >> 18) & 0x3F]);
        out.push_back(kB64Alphabet[(chunk >> 12) & 0x3F]);
        out.push_back('=');
        out.push_back('=');
    } else if (rest == 2) {
        std::uint32_t chunk = (static_cast<std::uint32_t>(bytes[i]) << 16) |
                              (static_cast<std::uint32_t>(bytes[i + 1]) << 8);
        out.push_back(kB64Alphabet[(chunk >> 18) & 0x3F]);
        out.push_back(kB64Alphabet[(chunk >> 12) & 0x3F]);
        out.push_back(kB64Alphabet[(chunk >> 6) & 0x3F]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    static const std::array<int, 256> kReverse = build_reverse_table();
    if (text.size() % 4 != 0) {
        throw BackendError("base64 payload length must be a multiple of 4");
    }
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            char c = text[i + k];
            if (c == '=') {
                // Padding only in the last two positions of the final group.
                if (i + 4 != text.size() || k < 2) {
                    throw BackendError("base64 padding in illegal position");
                }
                vals[k] = 0;
                ++pad;
            } else {
                if (pad > 0) {
                    throw BackendError("base64 data after padding");
                }
                int v = kReverse[static_cast<unsigned char>(c)];
                if (v < 0) {
                    throw BackendError("base64 payload has invalid character");
                }
                vals[k] = v;
            }
        }
        std::uint32_t chunk = (static_cast<std::uint32_t>(vals[0]) << 18) |
                              (static_cast<std::uint32_t>(vals[1]) << 12) |
                              (static_cast<std::uint32_t>(vals[2]) << 6) |
                              static_cast<std::uint32_t>(vals[3]);
        out.push_back(static_cast<std::uint8_t>((chunk >> 16) & 0xFF));
        if (pad < 2) {
            out.push_back(static_cast<std::uint8_t>((chunk >> 8) & 0xFF));
        }
        if (pad < 1) {
            out.push_back(static_cast<std::uint8_t>(chunk & 0xFF));
        }
    }
    return out;
}

}  // namespace savcd::wire

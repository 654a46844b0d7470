#include "savcd/http_backend.hpp"

#include <httplib.h>

#include <json.hpp>

#include "savcd/errors.hpp"
#include "savcd/image_io.hpp"
#include "savcd/wire.hpp"

namespace savcd {

struct HttpBackend::Impl {
    explicit Impl(const std::string& base_url) : client(base_url) {
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(60, 0);
    }

    httplib::Client client;
};

namespace {

std::string strip_trailing_slash(const std::string& url) {
    std::string out = url;
    while (out.size() > 1 && out.back() == '/') {
        out.pop_back();
    }
    return out;
}

// Unwraps a httplib result, folding transport errors and non-2xx statuses
// into BackendError. Returns the body.
std::string expect_body(const httplib::Result& res, const char* what) {
    if (!res) {
        throw BackendError(std::string(what) +
                           ": transport failure: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        std::string detail = res->body;
        try {
            detail = wire::ErrorResponse::from_json(nlohmann::json::parse(res->body))
                         .error;
        } catch (...) {
            // Keep the raw body when the error shape itself is malformed.
        }
        throw BackendError(std::string(what) + ": HTTP " +
                           std::to_string(res->status) + ": " + detail);
    }
    return res->body;
}

nlohmann::json parse_body(const std::string& body, const char* what) {
    try {
        return nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string(what) + ": malformed JSON reply: " + e.what());
    }
}

}  // namespace

HttpBackend::HttpBackend(const std::string& base_url)
    : impl_(std::make_unique<Impl>(strip_trailing_slash(base_url))) {}

HttpBackend::~HttpBackend() = default;

SessionInfo HttpBackend::open_session(const std::optional<RasterImage>& image) {
    wire::SessionRequest request;
    if (image) {
        request.image_png_b64 = wire::base64_encode(encode_png(*image));
    }
    auto res = impl_->client.Post("/v1/session", request.to_json().dump(),
                                  "application/json");
    auto reply = wire::SessionResponse::from_json(
        parse_body(expect_body(res, "open_session"), "open_session"));
    if (reply.vocab_size < 1) {
        throw BackendError("open_session: backend declared vocab_size < 1");
    }
    return SessionInfo{reply.session_id, reply.vocab_size, reply.end_token};
}

LogitVector HttpBackend::next_logits(const std::string& session_id,
                                     const std::vector<TokenId>& tokens) {
    wire::LogitsRequest request{session_id, tokens};
    auto res = impl_->client.Post("/v1/logits", request.to_json().dump(),
                                  "application/json");
    auto reply = wire::LogitsResponse::from_json(
        parse_body(expect_body(res, "next_logits"), "next_logits"));
    try {
        return LogitVector(std::move(reply.logits));
    } catch (const std::invalid_argument& e) {
        throw BackendError(std::string("next_logits: backend sent invalid logits: ") +
                           e.what());
    }
}

std::string HttpBackend::generate_text(const std::string& session_id,
                                       const std::string& prompt, int max_tokens,
                                       bool greedy) {
    wire::GenerateRequest request{session_id, prompt, max_tokens, greedy};
    auto res = impl_->client.Post("/v1/generate", request.to_json().dump(),
                                  "application/json");
    return wire::GenerateResponse::from_json(
               parse_body(expect_body(res, "generate_text"), "generate_text"))
        .text;
}

void HttpBackend::close_session(const std::string& session_id) {
    auto res = impl_->client.Delete("/v1/session/" + session_id);
    expect_body(res, "close_session");
}

}  // namespace savcd

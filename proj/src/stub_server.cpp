#include "savcd/stub_server.hpp"

#include <httplib.h>

#include <string>
#include <thread>

#include "savcd/errors.hpp"
#include "savcd/image_io.hpp"
#include "savcd/wire.hpp"

namespace savcd {

struct StubServer::Impl {
    explicit Impl(SyntheticScript script) : backend(std::move(script)) {}

    SyntheticBackend backend;
    httplib::Server server;
    std::thread thread;
    std::string host;
    int port = -1;
};

namespace {

using nlohmann::json;

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
    reply_json(res, status, wire::ErrorResponse{message}.to_json());
}

bool unknown_session(const std::string& message) {
    return message.find("unknown session") != std::string::npos;
}

// Runs a handler body, translating exceptions into protocol error replies.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const BackendError& e) {
        reply_error(res, unknown_session(e.what()) ? 404 : 400, e.what());
    } catch (const ImageIoError& e) {
        reply_error(res, 400, e.what());
    } catch (const json::exception& e) {
        reply_error(res, 400, std::string("malformed request body: ") + e.what());
    } catch (const std::exception& e) {
        reply_error(res, 500, e.what());
    }
}

}  // namespace

StubServer::StubServer(SyntheticScript script)
    : impl_(std::make_unique<Impl>(std::move(script))) {
    auto& server = impl_->server;
    auto* backend = &impl_->backend;

    server.Post("/v1/session", [backend](const httplib::Request& req,
                                         httplib::Response& res) {
        guarded(res, [&] {
            auto request = wire::SessionRequest::from_json(json::parse(req.body));
            std::optional<RasterImage> image;
            if (request.image_png_b64) {
                image = decode_png(wire::base64_decode(*request.image_png_b64));
            }
            SessionInfo info = backend->open_session(image);
            reply_json(res, 200,
                       wire::SessionResponse{info.vocab_size, info.end_token,
                                             info.session_id}
                           .to_json());
        });
    });

    server.Post("/v1/logits", [backend](const httplib::Request& req,
                                        httplib::Response& res) {
        guarded(res, [&] {
            auto request = wire::LogitsRequest::from_json(json::parse(req.body));
            LogitVector logits = backend->next_logits(request.session_id,
                                                      request.tokens);
            reply_json(res, 200, wire::LogitsResponse{logits.scores()}.to_json());
        });
    });

    server.Post("/v1/generate", [backend](const httplib::Request& req,
                                          httplib::Response& res) {
        guarded(res, [&] {
            auto request = wire::GenerateRequest::from_json(json::parse(req.body));
            std::string text =
                backend->generate_text(request.session_id, request.prompt,
                                       request.max_tokens, request.greedy);
            reply_json(res, 200, wire::GenerateResponse{text}.to_json());
        });
    });

    server.Delete(R"(/v1/session/([^/]+))", [backend](const httplib::Request& req,
                                                      httplib::Response& res) {
        guarded(res, [&] {
            backend->close_session(req.matches[1]);
            res.status = 204;
        });
    });
}

StubServer::~StubServer() { stop(); }

int StubServer::start(const std::string& host, int port) {
    if (impl_->thread.joinable()) {
        throw BackendError("stub server already running");
    }
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
        if (bound <= 0) {
            throw BackendError("stub server cannot bind to an ephemeral port");
        }
    } else if (!impl_->server.bind_to_port(host, port)) {
        throw BackendError("stub server cannot bind to port " + std::to_string(port));
    }
    impl_->host = host;
    impl_->port = bound;
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void StubServer::stop() {
    if (!impl_->thread.joinable()) {
        return;
    }
    impl_->server.stop();
    impl_->thread.join();
}

void StubServer::wait() {
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

int StubServer::port() const { return impl_->port; }

std::string StubServer::base_url() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

}  // namespace savcd

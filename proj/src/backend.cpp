#include "savcd/backend.hpp"

namespace savcd {

ScopedSession::ScopedSession(Backend& backend, const std::optional<RasterImage>& image)
    : backend_(&backend), info_(backend.open_session(image)) {}

ScopedSession::ScopedSession(ScopedSession&& other) noexcept
    : backend_(other.backend_), info_(std::move(other.info_)) {
    other.backend_ = nullptr;
}

ScopedSession::~ScopedSession() {
    if (backend_ == nullptr) {
        return;
    }
    try {
        backend_->close_session(info_.session_id);
    } catch (...) {
        // Best-effort cleanup; a close failure must not mask the real error.
    }
}

}  // namespace savcd

#pragma once

#include <memory>
#include <string>

#include "savcd/synthetic_backend.hpp"

namespace savcd {

// HTTP face of the synthetic backend, for wire-level testing and the `stub`
// subcommand. Serves the protocol routes on a background thread.
class StubServer {
  public:
    explicit StubServer(SyntheticScript script);
    ~StubServer();

    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    // Binds and starts serving; port 0 picks a free port. Returns the bound
    // port. Throws BackendError when the bind fails.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    void stop();
    // Blocks until stop() is called (foreground serving).
    void wait();

    int port() const;
    std::string base_url() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace savcd

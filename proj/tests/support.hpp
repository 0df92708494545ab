#pragma once

#include <functional>
#include <string>
#include <thread>

#include <httplib.h>

#include "icr/common.hpp"

namespace icr::testing {

// In-process HTTP server on an ephemeral port; handlers registered by the
// setup callback before listening starts.
class TestHttpServer {
public:
    explicit TestHttpServer(const std::function<void(httplib::Server&)>& setup) {
        setup(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~TestHttpServer() {
        server_.stop();
        thread_.join();
    }
    int port() const { return port_; }
    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

// Silences warn-level logging for the enclosing scope.
class QuietLogs {
public:
    QuietLogs() : saved_(icr::log_threshold()) { icr::log_threshold() = icr::LogLevel::error; }
    ~QuietLogs() { icr::log_threshold() = saved_; }

private:
    icr::LogLevel saved_;
};

}  // namespace icr::testing

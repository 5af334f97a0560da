#pragma once

#include "fbac/monitor.hpp"

#include <json.hpp>

#include <memory>
#include <string>

namespace fbac {

/// {function, args, options, stdin}. options is either an object ({"k": "v", "flag": null})
/// or a list of {"key", "value"} pairs when order matters.
InvokeRequest invoke_request_from_json(const nlohmann::json& body);

/// HTTP status for an engine error.
int http_status(ErrorCode code);

/// JSON-over-HTTP front end of a Monitor. Every route except POST /session needs
/// `Authorization: Bearer <session>`.
class ApiServer {
public:
    explicit ApiServer(Monitor& monitor);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds to a free port and returns it.
    int bind_any_port(const std::string& host = "127.0.0.1");
    bool bind(const std::string& host, int port);
    /// Blocks until stop().
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fbac

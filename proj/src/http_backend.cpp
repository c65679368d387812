#include "deepa2/errors.hpp"
#include "deepa2/model.hpp"

#include <chrono>
#include <semaphore>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace deepa2::model {

namespace {

using json = nlohmann::json;

struct Endpoint {
    std::string origin;  // scheme://host:port
    std::string path;    // base path without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error("endpoint must be a URL such as http://host:port, got '" + url + "'");
    const auto slash = url.find('/', scheme + 3);
    Endpoint e{url.substr(0, slash), slash == std::string::npos ? "" : url.substr(slash)};
    while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
    return e;
}

HttpBackendConfig checked(HttpBackendConfig c) {
    if (c.max_in_flight < 1) throw Error("max_in_flight must be at least 1");
    if (c.max_attempts < 1) throw Error("max_attempts must be at least 1");
    if (c.timeout_ms < 1) throw Error("timeout must be positive");
    return c;
}

class HttpBackend : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig config)
        : config_(checked(std::move(config))), endpoint_(split_endpoint(config_.endpoint)), slots_(config_.max_in_flight) {}

    std::string generate(const GenerationRequest& request) override {
        const std::string body = http_request_body(request);
        std::string last_error;
        for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(config_.initial_backoff_ms << (attempt - 1)));
            auto outcome = post_once(body);
            if (outcome.output) return *outcome.output;
            last_error = outcome.error;
            if (!outcome.transient) break;
        }
        throw BackendUnavailableError("model server " + config_.endpoint + " failed for " + mode_name(request.mode) +
                                      ": " + last_error);
    }

private:
    struct Outcome {
        std::optional<std::string> output;
        std::string error;
        bool transient = false;
    };

    Outcome post_once(const std::string& body) {
        slots_.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{slots_};

        httplib::Client client(endpoint_.origin);
        const auto sec = config_.timeout_ms / 1000;
        const auto usec = (config_.timeout_ms % 1000) * 1000;
        client.set_connection_timeout(sec, usec);
        client.set_read_timeout(sec, usec);
        client.set_write_timeout(sec, usec);

        auto res = client.Post(endpoint_.path + "/generate", body, "application/json");
        if (!res) return {std::nullopt, "connection failed (" + httplib::to_string(res.error()) + ")", true};
        if (res->status == 429 || res->status >= 500)
            return {std::nullopt, "HTTP " + std::to_string(res->status), true};
        if (res->status < 200 || res->status >= 300)
            return {std::nullopt, "HTTP " + std::to_string(res->status), false};
        try {
            auto j = json::parse(res->body);
            if (!j.is_object() || !j.contains("output") || !j["output"].is_string())
                return {std::nullopt, "response lacks a string \"output\" field", false};
            return {j["output"].get<std::string>(), "", false};
        } catch (const json::exception& e) {
            return {std::nullopt, std::string("malformed response: ") + e.what(), false};
        }
    }

    HttpBackendConfig config_;
    Endpoint endpoint_;
    std::counting_semaphore<> slots_;
};

}  // namespace

std::string http_request_body(const GenerationRequest& request) {
    json inputs = json::object();
    for (Dim d : request.mode.inputs) {
        auto it = request.inputs.find(d);
        if (it == request.inputs.end())
            throw Error("request for " + mode_name(request.mode) + " lacks input '" + std::string(keyword(d)) + "'");
        inputs[std::string(keyword(d))] = it->second;
    }
    json body{{"mode", std::string(keyword(request.mode.output))}, {"inputs", inputs}, {"beam_width", request.beam_width}};
    return body.dump();
}

std::unique_ptr<ModelBackend> make_http_backend(const HttpBackendConfig& config) {
    return std::make_unique<HttpBackend>(config);
}

}  // namespace deepa2::model

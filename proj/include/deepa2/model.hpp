#pragma once

#include "deepa2/core.hpp"
#include "deepa2/modes.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace deepa2::model {

struct GenerationRequest {
    ModeSpec mode;
    std::map<Dim, std::string> inputs;
    int beam_width = 2;
    // Identifies the record being analysed; oracle backends look targets up by it.
    std::string record_id;
    // Position of the mode within its chain run.
    int step = 0;
};

// Any text-to-text model. Implementations must be safe to share across threads.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual std::string generate(const GenerationRequest& request) = 0;
};

// "formalize" for P ~> F, otherwise the keyword of the target dimension.
std::string task_prefix(const ModeSpec& mode);

// "<prefix>: <kw>: <value> <kw>: <value>", inputs in mode order. Throws Error
// naming the first missing input.
std::string format_prompt(const ModeSpec& mode, const std::map<Dim, std::string>& inputs);

// Returns the target record's rendering of the requested dimension; the empty
// string when the target lacks that dimension. Throws Error for unknown ids.
class OracleBackend : public ModelBackend {
public:
    explicit OracleBackend(std::vector<DeepA2Record> targets);
    std::string generate(const GenerationRequest& request) override;

    const DeepA2Record& target(const std::string& id) const;

private:
    std::vector<DeepA2Record> targets_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Oracle output corrupted with probability `rate`: an item is dropped, the
// tokens of one item are shuffled, or a ref is made to dangle. Each request
// draws from its own generator seeded with (seed, record id, mode, step), so
// results do not depend on scheduling.
class NoisyOracleBackend : public ModelBackend {
public:
    NoisyOracleBackend(std::vector<DeepA2Record> targets, double rate, std::uint64_t seed);
    std::string generate(const GenerationRequest& request) override;

private:
    OracleBackend oracle_;
    double rate_;
    std::uint64_t seed_;
};

// Rewrites `clean` so that it differs from it; exposed for tests. `salt`
// selects the corruption.
std::string corrupt_output(Dim output, const std::string& clean, std::uint64_t salt);

struct HttpBackendConfig {
    std::string endpoint;  // "http://host:port"
    int timeout_ms = 30000;
    int max_in_flight = 4;
    int max_attempts = 3;
    int initial_backoff_ms = 100;

    // Fills endpoint and timeout from DEEPA2_ENDPOINT and DEEPA2_TIMEOUT_MS when set.
    static HttpBackendConfig from_env();
};

// JSON request body for POST /generate.
std::string http_request_body(const GenerationRequest& request);

// Client for an inference server speaking
//   POST /generate {"mode": kw, "inputs": {kw: text, ...}, "beam_width": n}
//   -> {"output": text}
// Connection failures, 429 and 5xx are retried with exponential backoff; other
// failures and an exhausted budget raise BackendUnavailableError.
std::unique_ptr<ModelBackend> make_http_backend(const HttpBackendConfig& config);

// "oracle", "noisy:<rate>" or "http:<url>" ("http" alone reads the endpoint
// from the environment). Throws Error on a malformed spec.
std::unique_ptr<ModelBackend> make_backend(std::string_view spec, const std::vector<DeepA2Record>& targets,
                                           std::uint64_t seed, const HttpBackendConfig& http = HttpBackendConfig::from_env());

}  // namespace deepa2::model

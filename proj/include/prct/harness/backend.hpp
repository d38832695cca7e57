#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prct/cost_model.hpp"
#include "prct/harness/clock.hpp"

namespace prct {

struct InferenceConfig {
    std::string model_name = "claude-sonnet-4-5-20250929";
    double temperature = 0.0;
    int max_output_tokens = 4096;
    std::string system_prompt =
        "You are a task execution assistant. Complete the following task instruction as "
        "accurately and completely as possible.";
    double rpm_limit = 60.0;
    std::vector<double> retry_backoff_seconds = {5.0, 15.0, 60.0};
    PricingModel pricing;
    int adaptive_chunk_chars = 200;
};

struct ModelResponse {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::string text;
    double latency_ms = 0.0;
};

enum class ErrorKind { rate_limited, credit_exhausted, network, malformed_response };
std::string error_kind_name(ErrorKind k);
ErrorKind error_kind_from_name(std::string_view name);

struct BackendError {
    ErrorKind kind = ErrorKind::network;
    std::string message;
};

struct BackendResult {
    std::optional<ModelResponse> response;
    std::optional<BackendError> error;
    bool ok() const { return response.has_value(); }
    static BackendResult success(ModelResponse r) { return {std::move(r), std::nullopt}; }
    static BackendResult failure(ErrorKind kind, std::string message) {
        return {std::nullopt, BackendError{kind, std::move(message)}};
    }
};

// Per-trial context the harness knows and a backend may use; the simulated
// backend keys its deterministic noise on the stimulus digest and shapes
// output length from the realized compression ratio.
struct TrialContext {
    std::string stimulus_digest;
    double realized_ratio = 1.0;
};

class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual BackendResult respond(const std::string& system_prompt,
                                  const std::string& user_prompt, const TrialContext& ctx,
                                  const InferenceConfig& config) = 0;
};

// Desk-scale stand-in for a live model endpoint: deterministic output-token
// counts driven by an expansion curve over the realized compression ratio,
// with optional lognormal noise keyed on (noise_seed, stimulus digest).
struct SimulatedModelSpec {
    std::int64_t base_output_tokens = 609;
    // (realized_ratio, output multiplier) knots, piecewise linear, clamped
    // at the ends. Defaults encode the pilot arm means 609/811/613/161 at
    // ratios 1.0/0.8/0.5/0.2.
    std::vector<std::pair<double, double>> expansion_curve = {
        {0.2, 161.0 / 609.0}, {0.5, 613.0 / 609.0}, {0.8, 811.0 / 609.0}, {1.0, 1.0}};
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;
    double latency_base_ms = 2000.0;
    double latency_per_output_token_ms = 18.0;
};

double expansion_multiplier(const SimulatedModelSpec& spec, double realized_ratio);

ModelResponse simulated_respond(const SimulatedModelSpec& spec, const std::string& user_prompt,
                                const TrialContext& ctx);

class SimulatedBackend final : public ModelBackend {
public:
    explicit SimulatedBackend(SimulatedModelSpec spec, Clock* clock = nullptr)
        : spec_(std::move(spec)), clock_(clock) {}

    BackendResult respond(const std::string& system_prompt, const std::string& user_prompt,
                          const TrialContext& ctx, const InferenceConfig& config) override;

    const SimulatedModelSpec& spec() const { return spec_; }

private:
    SimulatedModelSpec spec_;
    Clock* clock_; // advanced by simulated latency when provided
};

// Generic HTTP adapter for a messages-style completion endpoint. Request and
// response field mapping follow the Anthropic messages shape by default and
// are configurable via JSON pointers; the API key is read from the named
// environment variable and never logged.
struct HttpBackendConfig {
    std::string base_url;                  // e.g. http://127.0.0.1:8089
    std::string path = "/v1/messages";
    std::string api_key_env = "PRCT_API_KEY";
    // Header template; "$API_KEY" is substituted with the key value.
    std::vector<std::pair<std::string, std::string>> headers = {
        {"x-api-key", "$API_KEY"}, {"anthropic-version", "2023-06-01"}};
    std::string response_text_pointer = "/content/0/text";
    std::string input_tokens_pointer = "/usage/input_tokens";
    std::string output_tokens_pointer = "/usage/output_tokens";
    double timeout_seconds = 120.0;
};

// Pure request/response mapping, separated for testability.
std::string http_request_body(const HttpBackendConfig& cfg, const InferenceConfig& inference,
                              const std::string& system_prompt, const std::string& user_prompt);
BackendResult http_parse_response(const HttpBackendConfig& cfg, int status,
                                  const std::string& body, double latency_ms);

class HttpBackend final : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig cfg);

    BackendResult respond(const std::string& system_prompt, const std::string& user_prompt,
                          const TrialContext& ctx, const InferenceConfig& config) override;

private:
    HttpBackendConfig cfg_;
    std::string api_key_;
};

} // namespace prct

#include "prct/harness/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "prct/errors.hpp"
#include "prct/rng.hpp"
#include "prct/text.hpp"

namespace prct {

std::string error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::rate_limited: return "rate_limited";
        case ErrorKind::credit_exhausted: return "credit_exhausted";
        case ErrorKind::network: return "network";
        case ErrorKind::malformed_response: return "malformed_response";
    }
    return "network";
}

ErrorKind error_kind_from_name(std::string_view name) {
    if (name == "rate_limited") return ErrorKind::rate_limited;
    if (name == "credit_exhausted") return ErrorKind::credit_exhausted;
    if (name == "network") return ErrorKind::network;
    if (name == "malformed_response") return ErrorKind::malformed_response;
    throw IngestError("unknown error kind: " + std::string(name));
}

double expansion_multiplier(const SimulatedModelSpec& spec, double realized_ratio) {
    const auto& curve = spec.expansion_curve;
    if (curve.empty()) return 1.0;
    if (realized_ratio <= curve.front().first) return curve.front().second;
    if (realized_ratio >= curve.back().first) return curve.back().second;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (realized_ratio <= curve[i].first) {
            double x0 = curve[i - 1].first, y0 = curve[i - 1].second;
            double x1 = curve[i].first, y1 = curve[i].second;
            double t = (realized_ratio - x0) / (x1 - x0);
            return y0 + t * (y1 - y0);
        }
    }
    return curve.back().second;
}

ModelResponse simulated_respond(const SimulatedModelSpec& spec, const std::string& user_prompt,
                                const TrialContext& ctx) {
    rng::Engine eng(rng::derive_seed(spec.noise_seed, ctx.stimulus_digest));
    double noise =
        spec.noise_sigma > 0.0 ? std::exp(spec.noise_sigma * rng::standard_normal(eng)) : 1.0;
    double expected =
        double(spec.base_output_tokens) * expansion_multiplier(spec, ctx.realized_ratio);
    std::int64_t output_tokens = std::max<std::int64_t>(1, std::llround(expected * noise));

    ModelResponse r;
    r.input_tokens = std::int64_t((utf8_length(user_prompt) + 3) / 4);
    r.output_tokens = output_tokens;
    r.latency_ms = spec.latency_base_ms + spec.latency_per_output_token_ms * double(output_tokens);

    // Synthesized text sized so ceil(chars / 4) equals the token count:
    // output_tokens three-letter words joined by single spaces.
    std::string text;
    text.reserve(std::size_t(output_tokens) * 4);
    for (std::int64_t i = 0; i < output_tokens; ++i) {
        if (i > 0) text += ' ';
        for (int k = 0; k < 3; ++k) text += char('a' + rng::bounded(eng, 26));
    }
    r.text = std::move(text);
    return r;
}

BackendResult SimulatedBackend::respond(const std::string& /*system_prompt*/,
                                        const std::string& user_prompt, const TrialContext& ctx,
                                        const InferenceConfig& /*config*/) {
    ModelResponse r = simulated_respond(spec_, user_prompt, ctx);
    if (clock_) clock_->sleep_for(r.latency_ms / 1000.0);
    return BackendResult::success(std::move(r));
}

std::string http_request_body(const HttpBackendConfig& /*cfg*/, const InferenceConfig& inference,
                              const std::string& system_prompt, const std::string& user_prompt) {
    nlohmann::ordered_json body;
    body["model"] = inference.model_name;
    body["max_tokens"] = inference.max_output_tokens;
    body["temperature"] = inference.temperature;
    body["system"] = system_prompt;
    body["messages"] = nlohmann::json::array(
        {nlohmann::ordered_json{{"role", "user"}, {"content", user_prompt}}});
    return body.dump();
}

BackendResult http_parse_response(const HttpBackendConfig& cfg, int status,
                                  const std::string& body, double latency_ms) {
    if (status == 429)
        return BackendResult::failure(ErrorKind::rate_limited, "HTTP 429 rate limited");
    if (status == 402)
        return BackendResult::failure(ErrorKind::credit_exhausted, "HTTP 402 credit exhausted");
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    if (status < 200 || status >= 300) {
        // Anthropic-style error envelope carries a type string.
        if (doc.is_object() && doc.contains("error") && doc["error"].is_object()) {
            std::string type = doc["error"].value("type", "");
            std::string msg = doc["error"].value("message", "");
            if (type.find("credit") != std::string::npos ||
                msg.find("credit") != std::string::npos)
                return BackendResult::failure(ErrorKind::credit_exhausted,
                                              "HTTP " + std::to_string(status) + ": " + msg);
            if (type == "rate_limit_error")
                return BackendResult::failure(ErrorKind::rate_limited,
                                              "HTTP " + std::to_string(status) + ": " + msg);
            return BackendResult::failure(ErrorKind::network,
                                          "HTTP " + std::to_string(status) + ": " + msg);
        }
        return BackendResult::failure(ErrorKind::network, "HTTP " + std::to_string(status));
    }
    if (doc.is_discarded())
        return BackendResult::failure(ErrorKind::malformed_response, "response is not JSON");
    try {
        ModelResponse r;
        r.text = doc.at(nlohmann::json::json_pointer(cfg.response_text_pointer))
                     .get<std::string>();
        r.input_tokens =
            doc.at(nlohmann::json::json_pointer(cfg.input_tokens_pointer)).get<std::int64_t>();
        r.output_tokens =
            doc.at(nlohmann::json::json_pointer(cfg.output_tokens_pointer)).get<std::int64_t>();
        r.latency_ms = latency_ms;
        return BackendResult::success(std::move(r));
    } catch (const nlohmann::json::exception& e) {
        return BackendResult::failure(ErrorKind::malformed_response,
                                      std::string("missing response field: ") + e.what());
    }
}

HttpBackend::HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    api_key_ = key ? key : "";
}

BackendResult HttpBackend::respond(const std::string& system_prompt,
                                   const std::string& user_prompt, const TrialContext& /*ctx*/,
                                   const InferenceConfig& config) {
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(int(cfg_.timeout_seconds), 0);
    client.set_read_timeout(int(cfg_.timeout_seconds), 0);
    httplib::Headers headers;
    for (const auto& [name, value] : cfg_.headers) {
        std::string v = value;
        std::size_t pos = v.find("$API_KEY");
        if (pos != std::string::npos) v.replace(pos, 8, api_key_);
        headers.emplace(name, v);
    }
    std::string body = http_request_body(cfg_, config, system_prompt, user_prompt);
    auto t0 = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(cfg_.path, headers, body, "application/json");
    auto t1 = std::chrono::steady_clock::now();
    double latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (!res)
        return BackendResult::failure(ErrorKind::network,
                                      "transport error: " + httplib::to_string(res.error()));
    return http_parse_response(cfg_, res->status, res->body, latency_ms);
}

} // namespace prct

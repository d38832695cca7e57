#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "prct/errors.hpp"
#include "prct/similarity.hpp"

namespace prct {

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig cfg) : cfg_(std::move(cfg)) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    api_key_ = key ? key : "";
}

std::vector<float> HttpEmbeddingProvider::embed(const std::string& text) {
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(int(cfg_.timeout_seconds), 0);
    client.set_read_timeout(int(cfg_.timeout_seconds), 0);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    nlohmann::ordered_json body;
    body["model"] = cfg_.model;
    body["input"] = text;
    httplib::Result res = client.Post(cfg_.path, headers, body.dump(), "application/json");
    if (!res)
        throw Error("embedding transport error: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw Error("embedding HTTP " + std::to_string(res->status));
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded()) throw Error("embedding response is not JSON");
    std::vector<float> v;
    try {
        for (const auto& x : doc.at(nlohmann::json::json_pointer(cfg_.embedding_pointer)))
            v.push_back(x.get<float>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("embedding response missing vector: ") + e.what());
    }
    if (cfg_.dimension != 0 && v.size() != cfg_.dimension)
        throw Error("embedding dimension mismatch: expected " + std::to_string(cfg_.dimension) +
                    ", got " + std::to_string(v.size()));
    return v;
}

} // namespace prct

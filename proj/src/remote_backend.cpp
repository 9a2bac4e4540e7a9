#include "ccprobe/remote_backend.hpp"

#include <httplib.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <thread>

#include "ccprobe/errors.hpp"

namespace ccprobe {

using nlohmann::json;

std::string encode_score_request(const std::string& model, std::span<const ScoreQuery> queries) {
  if (queries.empty()) throw PreconditionError("empty score batch");
  const auto normalization = queries.front().normalization;
  json items = json::array();
  for (const auto& q : queries) {
    if (q.normalization != normalization) {
      throw PreconditionError("mixed normalization in one score batch");
    }
    items.push_back({{"prompt", q.prompt}, {"continuations", q.continuations}});
  }
  json body = {{"model", model},
               {"items", std::move(items)},
               {"normalize", std::string(normalization_name(normalization))}};
  return body.dump();
}

std::vector<ScoreResult> decode_score_response(std::string_view body,
                                               std::span<const ScoreQuery> queries) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed score response: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("results") || !doc["results"].is_array()) {
    throw ProtocolError("score response lacks a results array");
  }
  const auto& results = doc["results"];
  if (results.size() != queries.size()) {
    throw ProtocolError("score response has " + std::to_string(results.size()) +
                        " results for " + std::to_string(queries.size()) + " items");
  }
  std::vector<ScoreResult> out;
  out.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& entry = results[i];
    if (!entry.is_object() || !entry.contains("logprobs") || !entry["logprobs"].is_array()) {
      throw ProtocolError("result " + std::to_string(i) + " lacks logprobs");
    }
    const auto& values = entry["logprobs"];
    if (values.size() != queries[i].continuations.size()) {
      throw ProtocolError("arity mismatch in result " + std::to_string(i) +
                          " for prompt: " + queries[i].prompt);
    }
    ScoreResult r;
    for (const auto& v : values) {
      if (!v.is_number()) throw ProtocolError("non-numeric logprob");
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw ProtocolError("non-finite logprob");
      r.log_likelihoods.push_back(x);
    }
    out.push_back(std::move(r));
  }
  return out;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("remote backend needs an endpoint");
  if (config_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (config_.max_in_flight == 0) config_.max_in_flight = 1;
}

std::vector<ScoreResult> RemoteBackend::score_batch(std::span<const ScoreQuery> queries) {
  const auto body = encode_score_request(config_.model, queries);
  httplib::Client client(config_.endpoint);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  std::string last_failure;
  auto backoff = config_.initial_backoff;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post("/v1/score", body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return decode_score_response(res->body, queries);
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    throw ProtocolError("scorer rejected request (HTTP " + std::to_string(res->status) +
                        "): " + res->body);
  }
  throw ScoringError("scorer unreachable at " + config_.endpoint + " after " +
                         std::to_string(config_.max_retries + 1) + " attempts (" +
                         last_failure + ")",
                     queries.empty() ? std::string{} : queries.front().prompt);
}

std::string RemoteBackend::describe() const {
  return "remote(" + config_.endpoint + (config_.model.empty() ? "" : "," + config_.model) + ")";
}

}  // namespace ccprobe

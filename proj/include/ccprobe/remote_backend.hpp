#pragma once
// HTTP client for the scorer service (POST /v1/score). The wire format is
// documented in docs/scorer_protocol.md.

#include <chrono>
#include <string>

#include "ccprobe/decision_engine.hpp"

namespace ccprobe {

inline constexpr const char* kScorerUrlEnv = "CCPROBE_SCORER_URL";

struct RemoteConfig {
  std::string endpoint = "http://127.0.0.1:8000";  // scheme://host:port
  std::string model;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds timeout{120};
  std::size_t max_in_flight = 4;
};

// Request body for a batch. All queries must share one normalization.
std::string encode_score_request(const std::string& model, std::span<const ScoreQuery> queries);

// Parses and checks a response body against its queries; ProtocolError on
// malformed JSON, wrong arity, or non-finite values.
std::vector<ScoreResult> decode_score_response(std::string_view body,
                                               std::span<const ScoreQuery> queries);

class RemoteBackend final : public ScorerBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  // Transport failures, 429 and 5xx are retried with doubling backoff; after
  // max_retries the ScoringError names the first prompt of the batch. Other
  // non-200 statuses raise ProtocolError immediately.
  std::vector<ScoreResult> score_batch(std::span<const ScoreQuery> queries) override;
  std::size_t max_in_flight() const override { return config_.max_in_flight; }
  std::string describe() const override;

 private:
  RemoteConfig config_;
};

}  // namespace ccprobe

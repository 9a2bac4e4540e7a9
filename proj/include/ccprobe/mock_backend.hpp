#pragma once
// Deterministic oracle backend for tests and desk-scale analyses.
//
// Facts: a known positive fact gets +1 on positive-polarity words and -1 on
// negative ones; unknown positives and all negatives are mirrored. Every value
// carries a keyed jitter in [0, 0.1) and positive words are shifted up by
// 2.5 * yes_bias, so yes_bias = 1 saturates to "always yes".
//
// Anchors: with probability `coupling` (keyed per anchor) the anchor is
// answered correctly iff the known fraction of its background positives
// reaches `threshold`; otherwise correctness is an independent draw with
// probability `base_rate`. The chosen choice scores +1, the others -1.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>

#include "ccprobe/decision_engine.hpp"

namespace ccprobe {

struct AnchorPolicy {
  double coupling = 1.0;
  double threshold = 1.0;
  double base_rate = 0.5;
};

struct MockOracleConfig {
  std::unordered_set<std::string> known_facts;  // triple keys of known positives
  double knowledge_rate = 0.0;  // keyed chance of knowing any other positive
  AnchorPolicy anchor_policy;
  double yes_bias = 0.0;
  std::uint64_t seed = 0;

  // Throws ConfigError when a probability lies outside [0, 1].
  void validate() const;
};

inline constexpr double kMockYesShift = 2.5;
inline constexpr double kMockJitter = 0.1;

bool mock_knows(const MockOracleConfig& config, const Fact& fact);
double mock_known_fraction(const MockOracleConfig& config, std::span<const Fact> background);
bool mock_answers_correctly(const MockOracleConfig& config, const AnchorTag& tag);

// Throws MockProtocolError when the query carries no tag.
ScoreResult mock_score(const MockOracleConfig& config, const ScoreQuery& query);

class MockBackend final : public ScorerBackend {
 public:
  explicit MockBackend(MockOracleConfig config);

  std::vector<ScoreResult> score_batch(std::span<const ScoreQuery> queries) override;
  std::size_t max_in_flight() const override { return 64; }
  std::string describe() const override;
  const MockOracleConfig& config() const { return config_; }

 private:
  MockOracleConfig config_;
};

}  // namespace ccprobe

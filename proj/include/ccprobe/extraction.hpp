#pragma once
// Background-fact extraction for anchor QA items: concept matching against the
// store vocabulary, path-length-1 positive facts, and keyed negative mining.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccprobe/kb_store.hpp"

namespace ccprobe {

inline constexpr std::size_t kChoiceCount = 5;

struct AnchorExample {
  std::string id;
  std::string question;
  std::array<std::string, kChoiceCount> choices;
  std::size_t answer_index = 0;

  // Throws PreconditionError on an empty question or out-of-range answer.
  void validate() const;
  friend bool operator==(const AnchorExample&, const AnchorExample&) = default;
};

// Where a concept was found: field -1 is the question, 0..4 a choice.
// Tokens [token_begin, token_end) of tokenize_text(field text).
struct SourceSpan {
  int field = -1;
  std::size_t token_begin = 0;
  std::size_t token_end = 0;
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

struct ConceptMatch {
  Concept matched;
  SourceSpan span;
  friend bool operator==(const ConceptMatch&, const ConceptMatch&) = default;
};

struct ConceptSet {
  std::string anchor_id;
  std::vector<ConceptMatch> matches;  // one per distinct concept, discovery order

  std::vector<Concept> concepts() const;
};

enum class OverlapMode {
  ConceptCoverage,  // |span ∩ concept| / |concept| > 0.5
  Jaccard,          // |span ∩ concept| / |span ∪ concept| > 0.5
};

struct ExtractionOptions {
  std::size_t max_ngram = 4;
  OverlapMode overlap = OverlapMode::ConceptCoverage;
};

// True when `span_words` matches `concept_words` under `mode`. Both are
// deduplicated internally. A match also requires at least one shared word
// that is not a stopword.
bool words_match(const std::vector<std::string>& span_words,
                 const std::vector<std::string>& concept_words, OverlapMode mode);

ConceptSet extract_concepts(const AnchorExample& anchor, const FactStore& store,
                            const ExtractionOptions& options = {});

// All edges connecting any two distinct concepts of the set, deduplicated and
// sorted.
std::vector<Fact> extract_positive_background(const ConceptSet& concepts,
                                              const FactStore& store);

struct NegativeDraw {
  Fact positive;
  std::optional<Concept> chosen;  // empty: no eligible candidate
  std::size_t eligible_count = 0;
  std::string seed_material;

  bool failed() const { return !chosen.has_value(); }
  std::optional<Fact> negative() const;
};

// Uniform draw from the pool members c with no stored (c1, r, c), c != c1 and
// c != c2. The draw is keyed by (global_seed, c1, r, c2), so a positive is
// always paired with the same negative regardless of which anchor asks.
NegativeDraw mine_negative(const Fact& positive, const FactStore& store,
                           const DictionaryPool& pool, std::uint64_t global_seed);

struct BackgroundSet {
  std::string anchor_id;
  std::vector<Fact> positives;
  std::vector<Fact> negatives;
  // partner[i] indexes `negatives` for positives[i]; nullopt on mining failure.
  std::vector<std::optional<std::size_t>> partner;

  std::size_t mining_failures() const;
  bool empty() const { return positives.empty(); }
  friend bool operator==(const BackgroundSet&, const BackgroundSet&) = default;
};

BackgroundSet build_background_set(const AnchorExample& anchor, const FactStore& store,
                                   const DictionaryPool& pool, std::uint64_t global_seed,
                                   const ExtractionOptions& options = {});
BackgroundSet build_background_set(const ConceptSet& concepts, const FactStore& store,
                                   const DictionaryPool& pool, std::uint64_t global_seed);

}  // namespace ccprobe

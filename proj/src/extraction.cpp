#include "ccprobe/extraction.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "ccprobe/errors.hpp"
#include "ccprobe/hashing.hpp"

namespace ccprobe {

void AnchorExample::validate() const {
  if (normalize_label(question).empty()) {
    throw PreconditionError("anchor " + id + ": empty question");
  }
  if (answer_index >= kChoiceCount) {
    throw PreconditionError("anchor " + id + ": answer index out of range");
  }
}

std::vector<Concept> ConceptSet::concepts() const {
  std::vector<Concept> out;
  out.reserve(matches.size());
  for (const auto& m : matches) out.push_back(m.matched);
  return out;
}

namespace {

std::vector<std::string> dedup(std::vector<std::string> words) {
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

std::vector<std::string> intersect(const std::vector<std::string>& a,
                                   const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

bool words_match(const std::vector<std::string>& span_words,
                 const std::vector<std::string>& concept_words, OverlapMode mode) {
  const auto span = dedup(span_words);
  const auto concept_set = dedup(concept_words);
  if (span.empty() || concept_set.empty()) return false;
  const auto shared = intersect(span, concept_set);
  if (std::all_of(shared.begin(), shared.end(),
                  [](const std::string& w) { return is_stopword(w); })) {
    return false;
  }
  const std::size_t inter = shared.size();
  const std::size_t denom = mode == OverlapMode::ConceptCoverage
                                ? concept_set.size()
                                : span.size() + concept_set.size() - inter;
  return 2 * inter > denom;
}

ConceptSet extract_concepts(const AnchorExample& anchor, const FactStore& store,
                            const ExtractionOptions& options) {
  if (options.max_ngram < 1) throw PreconditionError("max_ngram must be >= 1");
  ConceptSet result{anchor.id, {}};
  std::unordered_set<ConceptId> seen;

  auto scan_field = [&](int field, const std::string& text) {
    const auto tokens = tokenize_text(text);
    for (std::size_t begin = 0; begin < tokens.size(); ++begin) {
      const std::size_t max_len = std::min(options.max_ngram, tokens.size() - begin);
      for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<std::string> span(tokens.begin() + begin, tokens.begin() + begin + len);
        if (std::all_of(span.begin(), span.end(),
                        [](const std::string& w) { return is_stopword(w); })) {
          continue;
        }
        const auto span_set = dedup(span);

        std::vector<ConceptId> candidates;
        for (const auto& w : span_set) {
          if (is_stopword(w)) continue;
          auto ids = store.concepts_with_word(w);
          candidates.insert(candidates.end(), ids.begin(), ids.end());
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        struct Hit {
          ConceptId id;
          std::size_t word_count;
          std::vector<std::string> matched;
        };
        std::vector<Hit> hits;
        for (ConceptId id : candidates) {
          auto concept_words = dedup(split_words(store.label(id)));
          if (!words_match(span_set, concept_words, options.overlap)) continue;
          hits.push_back({id, concept_words.size(), intersect(span_set, concept_words)});
        }
        if (hits.empty()) continue;

        // Longest label wins among hits that share a matched span word.
        std::sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
          if (a.word_count != b.word_count) return a.word_count > b.word_count;
          const auto& la = store.label(a.id);
          const auto& lb = store.label(b.id);
          if (la.size() != lb.size()) return la.size() > lb.size();
          return la < lb;
        });
        std::vector<const Hit*> accepted;
        std::set<std::string> claimed;
        for (const auto& hit : hits) {
          bool overlaps = std::any_of(hit.matched.begin(), hit.matched.end(),
                                      [&](const std::string& w) { return claimed.contains(w); });
          if (overlaps) continue;
          accepted.push_back(&hit);
          claimed.insert(hit.matched.begin(), hit.matched.end());
        }
        // Exact label matches are always kept.
        std::string span_label;
        for (std::size_t i = 0; i < span.size(); ++i) {
          if (i) span_label += ' ';
          span_label += span[i];
        }
        if (auto exact = store.find(span_label)) {
          auto it = std::find_if(hits.begin(), hits.end(),
                                 [&](const Hit& h) { return h.id == *exact; });
          if (it != hits.end() &&
              std::find(accepted.begin(), accepted.end(), &*it) == accepted.end()) {
            accepted.push_back(&*it);
          }
        }
        for (const Hit* hit : accepted) {
          if (seen.insert(hit->id).second) {
            result.matches.push_back(
                {store.concept_at(hit->id), SourceSpan{field, begin, begin + len}});
          }
        }
      }
    }
  };

  scan_field(-1, anchor.question);
  for (std::size_t k = 0; k < anchor.choices.size(); ++k) {
    scan_field(static_cast<int>(k), anchor.choices[k]);
  }
  return result;
}

std::vector<Fact> extract_positive_background(const ConceptSet& concepts,
                                              const FactStore& store) {
  auto list = concepts.concepts();
  std::sort(list.begin(), list.end());
  list.erase(std::unique(list.begin(), list.end()), list.end());
  std::set<Fact> facts;
  for (std::size_t i = 0; i < list.size(); ++i) {
    for (std::size_t j = i + 1; j < list.size(); ++j) {
      for (auto& cf : store.connecting_facts(list[i], list[j])) {
        facts.insert(std::move(cf.fact));
      }
    }
  }
  return {facts.begin(), facts.end()};
}

std::optional<Fact> NegativeDraw::negative() const {
  if (!chosen) return std::nullopt;
  return Fact{positive.c1, positive.relation, *chosen, Polarity::Negative};
}

NegativeDraw mine_negative(const Fact& positive, const FactStore& store,
                           const DictionaryPool& pool, std::uint64_t global_seed) {
  if (pool.empty()) throw PreconditionError("mine_negative: empty dictionary pool");
  NegativeDraw draw{positive, std::nullopt, 0, {}};
  const auto rel = relation_name(positive.relation);
  draw.seed_material = std::to_string(global_seed) + "|" + positive.triple_key();

  // Pool ranks excluded by the criteria.
  std::vector<std::size_t> excluded;
  auto exclude = [&](std::string_view label) {
    if (auto r = pool.rank(label)) excluded.push_back(*r);
  };
  exclude(positive.c1.label());
  exclude(positive.c2.label());
  if (auto c1 = store.find(positive.c1.label())) {
    for (ConceptId target : store.objects(*c1, positive.relation)) {
      exclude(store.label(target));
    }
  }
  std::sort(excluded.begin(), excluded.end());
  excluded.erase(std::unique(excluded.begin(), excluded.end()), excluded.end());

  draw.eligible_count = pool.size() - excluded.size();
  if (draw.eligible_count == 0) return draw;

  auto engine = keyed_engine(global_seed, {positive.c1.label(), rel, positive.c2.label()});
  std::size_t index = uniform_index(engine, draw.eligible_count);
  // Map the k-th eligible slot to its pool rank by skipping excluded ranks.
  for (std::size_t e : excluded) {
    if (e <= index) {
      ++index;
    } else {
      break;
    }
  }
  draw.chosen = pool.entries()[index];
  return draw;
}

std::size_t BackgroundSet::mining_failures() const {
  return static_cast<std::size_t>(
      std::count(partner.begin(), partner.end(), std::nullopt));
}

BackgroundSet build_background_set(const ConceptSet& concepts, const FactStore& store,
                                   const DictionaryPool& pool, std::uint64_t global_seed) {
  BackgroundSet set;
  set.anchor_id = concepts.anchor_id;
  set.positives = extract_positive_background(concepts, store);
  set.partner.reserve(set.positives.size());
  for (const auto& positive : set.positives) {
    auto draw = mine_negative(positive, store, pool, global_seed);
    if (auto neg = draw.negative()) {
      set.partner.emplace_back(set.negatives.size());
      set.negatives.push_back(std::move(*neg));
    } else {
      set.partner.emplace_back(std::nullopt);
    }
  }
  return set;
}

BackgroundSet build_background_set(const AnchorExample& anchor, const FactStore& store,
                                   const DictionaryPool& pool, std::uint64_t global_seed,
                                   const ExtractionOptions& options) {
  return build_background_set(extract_concepts(anchor, store, options), store, pool, global_seed);
}

}  // namespace ccprobe

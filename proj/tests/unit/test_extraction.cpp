#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "ccprobe/errors.hpp"
#include "ccprobe/extraction.hpp"
#include "oracles.hpp"

using namespace ccprobe;

namespace {

AnchorExample anchor(std::string question, std::array<std::string, 5> choices,
                     std::size_t answer = 0, std::string id = "q") {
  AnchorExample a;
  a.id = std::move(id);
  a.question = std::move(question);
  a.choices = std::move(choices);
  a.answer_index = answer;
  return a;
}

std::vector<std::string> labels(const ConceptSet& set) {
  std::vector<std::string> out;
  for (const auto& m : set.matches) out.push_back(m.matched.label());
  return out;
}

DictionaryPool pool_of(std::initializer_list<const char*> words) {
  std::vector<Concept> entries;
  for (const char* w : words) entries.emplace_back(w);
  return DictionaryPool(std::move(entries));
}

// Pool members that satisfy the negative criteria for `p`, by full scan.
std::vector<std::string> eligible(const Fact& p, const std::vector<oracle::Triple>& edges,
                                  const DictionaryPool& pool) {
  std::vector<std::string> out;
  for (const auto& c : pool.entries()) {
    const auto& l = c.label();
    if (l == p.c1.label() || l == p.c2.label()) continue;
    bool stored = false;
    for (const auto& [x, r, y] : edges) stored = stored || (x == p.c1.label() && r == p.relation && y == l);
    if (!stored) out.push_back(l);
  }
  return out;
}

}  // namespace

TEST_SUITE("extraction") {
  TEST_CASE("anchor validation") {
    auto a = anchor("Where is it?", {"a", "b", "c", "d", "e"});
    CHECK_NOTHROW(a.validate());
    a.answer_index = 5;
    CHECK_THROWS_AS(a.validate(), PreconditionError);
    a.answer_index = 0;
    a.question = "  ";
    CHECK_THROWS_AS(a.validate(), PreconditionError);
  }

  TEST_CASE("overlap rule") {
    using V = std::vector<std::string>;
    CHECK(words_match(V{"book"}, V{"book"}, OverlapMode::ConceptCoverage));
    CHECK(words_match(V{"tree", "line"}, V{"tree"}, OverlapMode::ConceptCoverage));
    CHECK_FALSE(words_match(V{"mountain"}, V{"mountain", "range"}, OverlapMode::ConceptCoverage));
    CHECK(words_match(V{"ice", "cream"}, V{"ice", "cream", "cone"}, OverlapMode::ConceptCoverage));
    CHECK_FALSE(words_match(V{"tree", "line"}, V{"tree"}, OverlapMode::Jaccard));
    CHECK(words_match(V{"ice", "cream"}, V{"ice", "cream", "cone"}, OverlapMode::Jaccard));
    // Sharing only a stopword is not a match.
    CHECK_FALSE(words_match(V{"the", "sea"}, V{"the", "thing"}, OverlapMode::ConceptCoverage));
  }

  TEST_CASE("exact, partial-span and below-threshold matches") {
    const auto store = FactStore::from_triples({{"book", RelationKind::UsedFor, "school"},
                                                {"tree", RelationKind::PartOf, "forest"},
                                                {"mountain range", RelationKind::IsA, "landform"}});
    const auto got = labels(extract_concepts(
        anchor("Is a book kept near the tree line?", {"mountain", "x", "y", "z", "w"}), store));
    CHECK(std::find(got.begin(), got.end(), "book") != got.end());
    CHECK(std::find(got.begin(), got.end(), "tree") != got.end());
    CHECK(std::find(got.begin(), got.end(), "mountain range") == got.end());
  }

  TEST_CASE("longer labels win within a span, exact labels survive") {
    const auto store = FactStore::from_triples({{"ice cream", RelationKind::IsA, "dessert"},
                                                {"ice", RelationKind::IsA, "water"},
                                                {"cream", RelationKind::IsA, "dairy"}});
    const auto set = extract_concepts(anchor("Do you like ice cream?", {"a", "b", "c", "d", "e"}), store);
    const auto got = labels(set);
    // "ice" and "cream" still match as their own single-word spans.
    CHECK(got == std::vector<std::string>{"ice", "ice cream", "cream"});
    for (const auto& m : set.matches) {
      CHECK(m.span.field == -1);
      CHECK(m.span.token_begin < m.span.token_end);
      CHECK(m.span.token_end <= tokenize_text("Do you like ice cream?").size());
    }
  }

  TEST_CASE("stopword-only spans never match") {
    const auto store = FactStore::from_triples({{"the who", RelationKind::IsA, "band"}});
    CHECK(extract_concepts(anchor("What is the one?", {"a", "b", "c", "d", "e"}), store).matches.empty());
  }

  TEST_CASE("concept matching equals an exhaustive scan") {
    std::mt19937_64 rng(21);
    const std::vector<std::string> words{"red", "apple", "tree", "line", "the", "of", "house",
                                         "cat", "sea", "out", "blue", "water", "light", "it"};
    std::uniform_int_distribution<std::size_t> w(0, words.size() - 1);
    std::uniform_int_distribution<int> len(1, 3);
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<oracle::Triple> edges;
      std::set<std::string> vocab_set;
      while (vocab_set.size() < 40) {
        std::string label;
        for (int k = len(rng); k > 0; --k) label += (label.empty() ? "" : " ") + words[w(rng)];
        vocab_set.insert(normalize_label(label));
      }
      const std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());
      for (std::size_t i = 0; i + 1 < vocab.size(); ++i) {
        edges.emplace_back(vocab[i], RelationKind::RelatedTo, vocab[i + 1]);
      }
      const auto store = FactStore::from_triples(edges);
      auto text = [&](int n) {
        std::string s;
        for (int k = 0; k < n; ++k) s += (s.empty() ? "" : " ") + words[w(rng)];
        return s;
      };
      const auto a = anchor(text(7) + "?", {text(2), text(1), text(3), text(2), text(1)});
      for (auto mode : {OverlapMode::ConceptCoverage, OverlapMode::Jaccard}) {
        for (std::size_t n : {1u, 2u, 4u}) {
          CHECK(labels(extract_concepts(a, store, {n, mode})) ==
                oracle::match_concepts(a, vocab, n, mode));
        }
      }
    }
  }

  TEST_CASE("positive background from concept pairs") {
    const auto store = FactStore::from_triples({{"book", RelationKind::UsedFor, "school"}});
    ConceptSet set{"q", {{Concept("book"), {}}, {Concept("school"), {}}}};
    const auto facts = extract_positive_background(set, store);
    REQUIRE(facts.size() == 1);
    CHECK(facts[0] == Fact{Concept("book"), RelationKind::UsedFor, Concept("school")});
    CHECK(extract_positive_background(ConceptSet{"q", {{Concept("book"), {}}}}, store).empty());
  }

  TEST_CASE("positive background equals an all-pairs edge filter") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      const auto edges = oracle::random_edges(rng, 30, 80);
      const auto store = FactStore::from_triples(edges);
      auto vocab = std::vector<std::string>(store.vocabulary().begin(), store.vocabulary().end());
      std::shuffle(vocab.begin(), vocab.end(), rng);
      ConceptSet set{"q", {}};
      std::set<std::string> chosen;
      for (std::size_t i = 0; i < 5 && i < vocab.size(); ++i) {
        set.matches.push_back({Concept(vocab[i]), {}});
        chosen.insert(vocab[i]);
      }
      std::set<oracle::Triple> got;
      for (const auto& f : extract_positive_background(set, store)) {
        CHECK(f.polarity == Polarity::Positive);
        got.emplace(f.c1.label(), f.relation, f.c2.label());
      }
      CHECK(got == oracle::all_pairs_background(edges, chosen));
    }
  }

  TEST_CASE("negative mining criteria") {
    const auto store = FactStore::from_triples({{"car", RelationKind::MadeOf, "metal"},
                                                {"car", RelationKind::MadeOf, "glass"}});
    const Fact positive{Concept("car"), RelationKind::MadeOf, Concept("metal")};
    const auto only_rain = mine_negative(positive, store, pool_of({"car", "metal", "glass", "rain"}), 1);
    REQUIRE(only_rain.chosen);
    CHECK(only_rain.chosen->label() == "rain");
    CHECK(only_rain.eligible_count == 1);
    CHECK(only_rain.negative() ==
          Fact{Concept("car"), RelationKind::MadeOf, Concept("rain"), Polarity::Negative});

    const auto pool = pool_of({"car", "metal", "glass", "rain", "paper", "water", "sand"});
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto d = mine_negative(positive, store, pool, seed);
      REQUIRE(d.chosen);
      CHECK(d.chosen->label() != "car");
      CHECK(d.chosen->label() != "metal");
      CHECK_FALSE(store.has_fact(positive.c1, positive.relation, *d.chosen));
      CHECK(pool.contains(d.chosen->label()));
      CHECK(d.chosen == mine_negative(positive, store, pool, seed).chosen);
    }

    const auto failed = mine_negative(positive, store, pool_of({"car", "metal", "glass"}), 1);
    CHECK(failed.failed());
    CHECK_FALSE(failed.negative());
    CHECK_THROWS_AS(mine_negative(positive, store, DictionaryPool{}, 1), PreconditionError);
  }

  TEST_CASE("different seeds eventually pick different candidates") {
    const auto store = FactStore::from_triples({{"car", RelationKind::MadeOf, "metal"}});
    const Fact positive{Concept("car"), RelationKind::MadeOf, Concept("metal")};
    const auto pool = pool_of({"rain", "paper", "water", "sand", "wood"});
    std::set<std::string> seen;
    for (std::uint64_t s = 0; s < 50; ++s) seen.insert(mine_negative(positive, store, pool, s).chosen->label());
    CHECK(seen.size() == 5);
  }

  TEST_CASE("draws are uniform over the eligible set") {
    const auto store = FactStore::from_triples({{"car", RelationKind::MadeOf, "metal"},
                                                {"car", RelationKind::MadeOf, "c3"}});
    const Fact positive{Concept("car"), RelationKind::MadeOf, Concept("metal")};
    std::vector<Concept> entries{Concept("car"), Concept("metal"), Concept("c3")};
    for (int i = 0; i < 10; ++i) entries.emplace_back("e" + std::to_string(i));
    const DictionaryPool pool(entries);
    constexpr int kDraws = 10000;
    std::map<std::string, int> counts;
    for (int s = 0; s < kDraws; ++s) {
      auto d = mine_negative(positive, store, pool, static_cast<std::uint64_t>(s));
      REQUIRE(d.eligible_count == 10);
      ++counts[d.chosen->label()];
    }
    REQUIRE(counts.size() == 10);
    const double expected = kDraws / 10.0;
    const double sd = std::sqrt(kDraws * 0.1 * 0.9);
    double chi2 = 0.0;
    for (const auto& [label, n] : counts) {
      CHECK(label.rfind("e", 0) == 0);
      CHECK(std::abs(n - expected) <= 3.0 * sd);
      chi2 += (n - expected) * (n - expected) / expected;
    }
    CHECK(chi2 < 27.88);  // chi-square, 9 degrees of freedom, p = 0.001
  }

  TEST_CASE("background sets") {
    const auto store = FactStore::from_triples({{"book", RelationKind::UsedFor, "school"},
                                                {"pen", RelationKind::UsedFor, "writing"}});
    const auto pool = pool_of({"rain", "paper", "water"});
    const auto a1 = anchor("Where is a book used?", {"school", "x1", "x2", "x3", "x4"}, 0, "a1");
    const auto a2 = anchor("Is the school full of book?", {"y1", "y2", "y3", "y4", "y5"}, 0, "a2");
    const auto b1 = build_background_set(a1, store, pool, 42);
    const auto b2 = build_background_set(a2, store, pool, 42);
    REQUIRE(b1.positives.size() == 1);
    CHECK(b1.positives == b2.positives);
    CHECK(b1.negatives == b2.negatives);
    CHECK(b1.partner == std::vector<std::optional<std::size_t>>{0});

    const auto none = build_background_set(anchor("Where is a pen?", {"school", "a", "b", "c", "d"}),
                                           store, pool, 42);
    CHECK(none.empty());
    CHECK(none.negatives.empty());
  }

  TEST_CASE("negatives match positives minus mining failures") {
    std::mt19937_64 rng(4);
    const auto edges = oracle::random_edges(rng, 12, 50);
    const auto store = FactStore::from_triples(edges);
    std::vector<Concept> pool_entries;
    for (int i = 0; i < 6; ++i) pool_entries.emplace_back("c" + std::to_string(i));
    const DictionaryPool pool(pool_entries);
    std::uniform_int_distribution<int> pick(0, 11);
    for (int i = 0; i < 10; ++i) {
      auto name = [&] { return "c" + std::to_string(pick(rng)); };
      const auto a = anchor(name() + " and " + name() + "?", {name(), name(), name(), name(), name()});
      const auto set = build_background_set(a, store, pool, 7);
      std::size_t failures = 0;
      for (const auto& p : set.positives) failures += eligible(p, edges, pool).empty() ? 1 : 0;
      CHECK(set.mining_failures() == failures);
      CHECK(set.negatives.size() == set.positives.size() - failures);
      for (std::size_t k = 0; k < set.positives.size(); ++k) {
        const auto& p = set.positives[k];
        const auto d = mine_negative(p, store, pool, 7);
        CHECK(d.eligible_count == eligible(p, edges, pool).size());
        if (!set.partner[k]) continue;
        const auto& n = set.negatives[*set.partner[k]];
        CHECK(n.polarity == Polarity::Negative);
        CHECK(n.c1 == p.c1);
        CHECK(n.relation == p.relation);
        const auto ok = eligible(p, edges, pool);
        CHECK(std::find(ok.begin(), ok.end(), n.c2.label()) != ok.end());
      }
      std::set<std::size_t> used;
      for (const auto& idx : set.partner) {
        if (idx) CHECK(used.insert(*idx).second);
      }
    }
  }
}

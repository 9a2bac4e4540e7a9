#pragma once
// Read-only, relation-indexed knowledge-graph fact store.
//
// Concepts are interned to dense ids in lexicographic label order, so ids are
// a pure function of the edge set. Three views of the same sorted edge set:
//   forward  (c1, relation) -> c2...
//   reverse  (c2, relation) -> c1...
//   pair     {c1, c2}       -> (relation, direction)...
// The store is immutable once built; concurrent readers need no locking.

#include <bitset>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "ccprobe/relation.hpp"
#include "ccprobe/text.hpp"

namespace ccprobe {

enum class Polarity : std::uint8_t { Positive, Negative };

std::string_view polarity_name(Polarity p) noexcept;
std::optional<Polarity> parse_polarity(std::string_view name) noexcept;

struct Fact {
  Concept c1;
  RelationKind relation;
  Concept c2;
  Polarity polarity = Polarity::Positive;

  // "c1|Relation|c2", polarity excluded.
  std::string triple_key() const;

  friend bool operator==(const Fact&, const Fact&) = default;
  friend auto operator<=>(const Fact&, const Fact&) = default;
};

// Orientation of an edge relative to the (a, b) query of connecting_facts:
// Forward means the stored edge is (a, r, b).
enum class Direction : std::uint8_t { Forward, Reverse };

struct ConnectingFact {
  Fact fact;
  Direction direction;
  friend bool operator==(const ConnectingFact&, const ConnectingFact&) = default;
};

using RelationSet = std::bitset<kRelationCount>;
RelationSet all_relations();

using ConceptId = std::uint32_t;

struct Edge {
  ConceptId c1;
  RelationKind relation;
  ConceptId c2;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class FactStore {
 public:
  struct PairEntry {
    ConceptId lo;
    ConceptId hi;
    RelationKind relation;
    Direction direction;  // Forward when the stored edge is (lo, r, hi)
    friend bool operator==(const PairEntry&, const PairEntry&) = default;
    friend auto operator<=>(const PairEntry&, const PairEntry&) = default;
  };

  FactStore() = default;

  bool has_fact(const Concept& c1, RelationKind r, const Concept& c2) const;
  bool has_edge(ConceptId c1, RelationKind r, ConceptId c2) const;

  // Every edge between a and b in either direction. Throws PreconditionError
  // when a == b.
  std::vector<ConnectingFact> connecting_facts(const Concept& a,
                                               const Concept& b) const;

  // Forward index: all c2 with (c1, r, c2) stored, ascending.
  std::span<const ConceptId> objects(ConceptId c1, RelationKind r) const;
  // Reverse index: all c1 with (c1, r, c2) stored, ascending.
  std::span<const ConceptId> subjects(ConceptId c2, RelationKind r) const;
  std::span<const PairEntry> pair_entries(ConceptId a, ConceptId b) const;

  std::optional<ConceptId> find(std::string_view label) const;
  const std::string& label(ConceptId id) const { return vocabulary_[id]; }
  Concept concept_at(ConceptId id) const { return Concept(vocabulary_[id]); }

  // Concepts whose label contains the (non-stopword) word.
  std::span<const ConceptId> concepts_with_word(std::string_view word) const;

  std::span<const std::string> vocabulary() const { return vocabulary_; }
  std::span<const Edge> edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  // Full cross-scan of forward, reverse and pair indexes against the edge list.
  bool check_consistency() const;

  // Builds from raw label triples; labels are normalized, duplicates collapse.
  static FactStore from_triples(
      const std::vector<std::tuple<std::string, RelationKind, std::string>>& triples);

 private:
  friend class FactStoreBuilder;
  void build_indexes();

  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, ConceptId> ids_;
  std::vector<Edge> edges_;               // sorted (c1, r, c2)
  std::vector<ConceptId> forward_targets_;  // edges_[i].c2
  std::vector<Edge> reverse_;             // sorted (c2, r, c1)
  std::vector<ConceptId> reverse_sources_;  // reverse_[i].c1
  std::vector<PairEntry> pairs_;          // sorted
  std::unordered_map<std::string, std::vector<ConceptId>> word_index_;
};

class FactStoreBuilder {
 public:
  // Labels are normalized here; empty labels are ignored.
  void add(std::string_view c1_label, RelationKind r, std::string_view c2_label);
  std::size_t added() const { return triples_.size(); }
  // Duplicate triples collapse to one edge.
  FactStore build() &&;

 private:
  std::vector<std::tuple<std::string, RelationKind, std::string>> triples_;
};

struct IngestStats {
  std::uint64_t rows_read = 0;
  std::uint64_t malformed_rows = 0;
  std::uint64_t filtered_relation = 0;
  std::uint64_t filtered_language = 0;
  std::uint64_t duplicate_edges = 0;
  std::uint64_t edges_added = 0;
};

// Ingests a tab-separated assertion dump: assertion-URI, relation-URI,
// start-URI, end-URI, metadata. Malformed rows are counted and skipped.
FactStore parse_dump(std::istream& rows, const RelationSet& relations,
                     IngestStats* stats = nullptr);

// Same, from a file; gzip-compressed input is detected transparently.
// Throws DataError if the file cannot be opened or read.
FactStore parse_dump_file(const std::filesystem::path& path,
                          const RelationSet& relations,
                          IngestStats* stats = nullptr);

// Parses "/c/en/book/n/..." into (language, normalized label).
std::optional<std::pair<std::string, std::string>> parse_concept_uri(
    std::string_view uri);

class DictionaryPool {
 public:
  DictionaryPool() = default;
  explicit DictionaryPool(std::vector<Concept> ranked_entries);

  std::span<const Concept> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(std::string_view label) const { return rank_.contains(std::string(label)); }
  std::optional<std::size_t> rank(std::string_view label) const;

  friend bool operator==(const DictionaryPool& a, const DictionaryPool& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<Concept> entries_;
  std::unordered_map<std::string, std::size_t> rank_;
};

// Top-k words of `word_list` by descending frequency; ties broken by label.
// Words absent from the frequency list are not eligible.
DictionaryPool build_dictionary_pool(
    std::span<const std::string> word_list,
    std::span<const std::pair<std::string, std::uint64_t>> frequencies,
    std::size_t top_k);

// Keeps only pool entries that are concepts of the store (order preserved).
DictionaryPool restrict_to_vocabulary(const DictionaryPool& pool,
                                      const FactStore& store);

std::vector<std::string> read_word_list(const std::filesystem::path& path);
std::vector<std::pair<std::string, std::uint64_t>> read_frequency_list(
    const std::filesystem::path& path);

// Binary index file: store plus negative-candidate pool.
inline constexpr char kStoreMagic[4] = {'C', 'C', 'K', 'B'};
inline constexpr std::uint8_t kStoreFormatVersion = 1;

struct KnowledgeIndex {
  FactStore store;
  DictionaryPool pool;
};

std::string serialize_store(const FactStore& store, const DictionaryPool& pool);
KnowledgeIndex deserialize_store(std::string_view bytes);
void save_store(const FactStore& store, const DictionaryPool& pool,
                const std::filesystem::path& path);
KnowledgeIndex load_store(const std::filesystem::path& path);

}  // namespace ccprobe

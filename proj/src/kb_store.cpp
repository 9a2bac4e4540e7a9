#include "ccprobe/kb_store.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "ccprobe/errors.hpp"

namespace ccprobe {

std::string_view polarity_name(Polarity p) noexcept {
  return p == Polarity::Positive ? "positive" : "negative";
}

std::optional<Polarity> parse_polarity(std::string_view name) noexcept {
  if (name == "positive") return Polarity::Positive;
  if (name == "negative") return Polarity::Negative;
  return std::nullopt;
}

std::string Fact::triple_key() const {
  std::string key = c1.label();
  key += '|';
  key += relation_name(relation);
  key += '|';
  key += c2.label();
  return key;
}

RelationSet all_relations() {
  RelationSet set;
  set.set();
  return set;
}

// ---------------------------------------------------------------------------
// FactStore

namespace {

auto forward_key(const Edge& e) { return std::tie(e.c1, e.relation); }
auto reverse_key(const Edge& e) { return std::tie(e.c2, e.relation); }

}  // namespace

void FactStore::build_indexes() {
  forward_targets_.resize(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) forward_targets_[i] = edges_[i].c2;

  reverse_ = edges_;
  std::sort(reverse_.begin(), reverse_.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.c2, a.relation, a.c1) < std::tie(b.c2, b.relation, b.c1);
  });
  reverse_sources_.resize(reverse_.size());
  for (std::size_t i = 0; i < reverse_.size(); ++i) reverse_sources_[i] = reverse_[i].c1;

  pairs_.clear();
  pairs_.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (e.c1 <= e.c2) {
      pairs_.push_back({e.c1, e.c2, e.relation, Direction::Forward});
    } else {
      pairs_.push_back({e.c2, e.c1, e.relation, Direction::Reverse});
    }
  }
  std::sort(pairs_.begin(), pairs_.end());

  ids_.clear();
  ids_.reserve(vocabulary_.size());
  word_index_.clear();
  for (ConceptId id = 0; id < vocabulary_.size(); ++id) {
    ids_.emplace(vocabulary_[id], id);
    auto words = split_words(vocabulary_[id]);
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    for (const auto& w : words) {
      if (!is_stopword(w)) word_index_[w].push_back(id);
    }
  }
}

FactStore FactStore::from_triples(
    const std::vector<std::tuple<std::string, RelationKind, std::string>>& triples) {
  FactStoreBuilder builder;
  for (const auto& [a, r, b] : triples) builder.add(a, r, b);
  return std::move(builder).build();
}

std::optional<ConceptId> FactStore::find(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool FactStore::has_edge(ConceptId c1, RelationKind r, ConceptId c2) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{c1, r, c2});
}

bool FactStore::has_fact(const Concept& c1, RelationKind r, const Concept& c2) const {
  auto a = find(c1.label());
  auto b = find(c2.label());
  return a && b && has_edge(*a, r, *b);
}

std::span<const ConceptId> FactStore::objects(ConceptId c1, RelationKind r) const {
  Edge probe{c1, r, 0};
  auto [lo, hi] = std::equal_range(
      edges_.begin(), edges_.end(), probe,
      [](const Edge& a, const Edge& b) { return forward_key(a) < forward_key(b); });
  auto first = static_cast<std::size_t>(lo - edges_.begin());
  return {forward_targets_.data() + first, static_cast<std::size_t>(hi - lo)};
}

std::span<const ConceptId> FactStore::subjects(ConceptId c2, RelationKind r) const {
  Edge probe{0, r, c2};
  auto [lo, hi] = std::equal_range(
      reverse_.begin(), reverse_.end(), probe,
      [](const Edge& a, const Edge& b) { return reverse_key(a) < reverse_key(b); });
  auto first = static_cast<std::size_t>(lo - reverse_.begin());
  return {reverse_sources_.data() + first, static_cast<std::size_t>(hi - lo)};
}

std::span<const FactStore::PairEntry> FactStore::pair_entries(ConceptId a,
                                                              ConceptId b) const {
  const ConceptId lo_id = std::min(a, b);
  const ConceptId hi_id = std::max(a, b);
  auto [lo, hi] = std::equal_range(
      pairs_.begin(), pairs_.end(), PairEntry{lo_id, hi_id, {}, {}},
      [](const PairEntry& x, const PairEntry& y) {
        return std::tie(x.lo, x.hi) < std::tie(y.lo, y.hi);
      });
  return {pairs_.data() + (lo - pairs_.begin()), static_cast<std::size_t>(hi - lo)};
}

std::vector<ConnectingFact> FactStore::connecting_facts(const Concept& a,
                                                        const Concept& b) const {
  if (a == b) {
    throw PreconditionError("connecting_facts: concepts must differ ('" +
                            a.label() + "')");
  }
  std::vector<ConnectingFact> out;
  auto ia = find(a.label());
  auto ib = find(b.label());
  if (!ia || !ib) return out;
  for (const auto& entry : pair_entries(*ia, *ib)) {
    // Orientation of the stored edge in id space.
    const bool stored_lo_to_hi = entry.direction == Direction::Forward;
    const ConceptId from = stored_lo_to_hi ? entry.lo : entry.hi;
    const ConceptId to = stored_lo_to_hi ? entry.hi : entry.lo;
    Fact fact{Concept(vocabulary_[from]), entry.relation, Concept(vocabulary_[to]),
              Polarity::Positive};
    out.push_back({std::move(fact), from == *ia ? Direction::Forward : Direction::Reverse});
  }
  return out;
}

std::span<const ConceptId> FactStore::concepts_with_word(std::string_view word) const {
  auto it = word_index_.find(std::string(word));
  if (it == word_index_.end()) return {};
  return it->second;
}

bool FactStore::check_consistency() const {
  if (!std::is_sorted(edges_.begin(), edges_.end())) return false;
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) return false;
  if (reverse_.size() != edges_.size() || pairs_.size() != edges_.size()) return false;
  if (ids_.size() != vocabulary_.size()) return false;

  std::vector<bool> used(vocabulary_.size(), false);
  for (const auto& e : edges_) {
    if (e.c1 >= vocabulary_.size() || e.c2 >= vocabulary_.size()) return false;
    used[e.c1] = used[e.c2] = true;
    auto objs = objects(e.c1, e.relation);
    if (!std::binary_search(objs.begin(), objs.end(), e.c2)) return false;
    auto subs = subjects(e.c2, e.relation);
    if (!std::binary_search(subs.begin(), subs.end(), e.c1)) return false;
    bool in_pairs = false;
    for (const auto& p : pair_entries(e.c1, e.c2)) {
      const ConceptId from = p.direction == Direction::Forward ? p.lo : p.hi;
      const ConceptId to = p.direction == Direction::Forward ? p.hi : p.lo;
      if (p.relation == e.relation && from == e.c1 && to == e.c2) in_pairs = true;
    }
    if (!in_pairs) return false;
  }
  // Every reverse/pair entry must map back to a stored edge.
  for (const auto& e : reverse_) {
    if (!has_edge(e.c1, e.relation, e.c2)) return false;
  }
  for (const auto& p : pairs_) {
    const ConceptId from = p.direction == Direction::Forward ? p.lo : p.hi;
    const ConceptId to = p.direction == Direction::Forward ? p.hi : p.lo;
    if (!has_edge(from, p.relation, to)) return false;
  }
  return std::all_of(used.begin(), used.end(), [](bool u) { return u; });
}

// ---------------------------------------------------------------------------
// Builder

void FactStoreBuilder::add(std::string_view c1_label, RelationKind r,
                           std::string_view c2_label) {
  auto a = normalize_label(c1_label);
  auto b = normalize_label(c2_label);
  if (a.empty() || b.empty()) return;
  triples_.emplace_back(std::move(a), r, std::move(b));
}

FactStore FactStoreBuilder::build() && {
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());

  FactStore store;
  std::vector<std::string> labels;
  labels.reserve(triples_.size() * 2);
  for (const auto& [a, r, b] : triples_) {
    labels.push_back(a);
    labels.push_back(b);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  store.vocabulary_ = std::move(labels);

  auto id_of = [&](const std::string& label) {
    auto it = std::lower_bound(store.vocabulary_.begin(), store.vocabulary_.end(), label);
    return static_cast<ConceptId>(it - store.vocabulary_.begin());
  };
  store.edges_.reserve(triples_.size());
  for (const auto& [a, r, b] : triples_) {
    store.edges_.push_back({id_of(a), r, id_of(b)});
  }
  // Label order and id order coincide, so edges_ is already sorted.
  triples_.clear();
  store.build_indexes();
  return store;
}

// ---------------------------------------------------------------------------
// Dump ingestion

std::optional<std::pair<std::string, std::string>> parse_concept_uri(
    std::string_view uri) {
  constexpr std::string_view prefix = "/c/";
  if (!uri.starts_with(prefix)) return std::nullopt;
  uri.remove_prefix(prefix.size());
  auto slash = uri.find('/');
  if (slash == std::string_view::npos || slash == 0) return std::nullopt;
  std::string lang(uri.substr(0, slash));
  uri.remove_prefix(slash + 1);
  auto term = uri.substr(0, uri.find('/'));
  std::string label = normalize_label(term);
  if (label.empty()) return std::nullopt;
  return std::make_pair(std::move(lang), std::move(label));
}

namespace {

// Splits on tabs without allocating.
std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

void ingest_row(std::string_view line, const RelationSet& relations,
                FactStoreBuilder& builder, IngestStats& stats) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.empty()) return;
  ++stats.rows_read;
  auto fields = split_tabs(line);
  if (fields.size() < 4) {
    ++stats.malformed_rows;
    return;
  }
  if (!fields[1].starts_with("/r/")) {
    ++stats.malformed_rows;
    return;
  }
  auto relation = parse_relation_uri(fields[1]);
  if (!relation || !relations.test(relation_index(*relation))) {
    ++stats.filtered_relation;
    return;
  }
  auto start = parse_concept_uri(fields[2]);
  auto end = parse_concept_uri(fields[3]);
  if (!start || !end) {
    ++stats.malformed_rows;
    return;
  }
  if (start->first != "en" || end->first != "en") {
    ++stats.filtered_language;
    return;
  }
  builder.add(start->second, *relation, end->second);
}

FactStore finish(FactStoreBuilder& builder, IngestStats& stats) {
  const auto added = builder.added();
  FactStore store = std::move(builder).build();
  stats.edges_added = store.edge_count();
  stats.duplicate_edges = added - store.edge_count();
  return store;
}

}  // namespace

FactStore parse_dump(std::istream& rows, const RelationSet& relations,
                     IngestStats* stats) {
  IngestStats local;
  FactStoreBuilder builder;
  std::string line;
  while (std::getline(rows, line)) ingest_row(line, relations, builder, local);
  if (rows.bad()) throw DataError("assertion stream read failure");
  FactStore store = finish(builder, local);
  if (stats) *stats = local;
  return store;
}

FactStore parse_dump_file(const std::filesystem::path& path,
                          const RelationSet& relations, IngestStats* stats) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) {
    throw DataError("cannot open assertion dump: " + path.string());
  }
  gzbuffer(file, 1 << 17);
  IngestStats local;
  FactStoreBuilder builder;
  std::string line;
  std::vector<char> buf(1 << 16);
  bool failed = false;
  while (true) {
    char* got = gzgets(file, buf.data(), static_cast<int>(buf.size()));
    if (got == nullptr) {
      int err = 0;
      gzerror(file, &err);
      failed = err != Z_OK && err != Z_BUF_ERROR;
      break;
    }
    std::string_view chunk(got);
    line.append(chunk);
    if (!chunk.empty() && chunk.back() == '\n') {
      line.pop_back();
      ingest_row(line, relations, builder, local);
      line.clear();
    }
  }
  if (!line.empty()) ingest_row(line, relations, builder, local);
  gzclose(file);
  if (failed) throw DataError("read failure in assertion dump: " + path.string());
  FactStore store = finish(builder, local);
  if (stats) *stats = local;
  return store;
}

// ---------------------------------------------------------------------------
// Dictionary pool

DictionaryPool::DictionaryPool(std::vector<Concept> ranked_entries)
    : entries_(std::move(ranked_entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!rank_.emplace(entries_[i].label(), i).second) {
      throw PreconditionError("duplicate dictionary pool entry: " + entries_[i].label());
    }
  }
}

std::optional<std::size_t> DictionaryPool::rank(std::string_view label) const {
  auto it = rank_.find(std::string(label));
  if (it == rank_.end()) return std::nullopt;
  return it->second;
}

DictionaryPool build_dictionary_pool(
    std::span<const std::string> word_list,
    std::span<const std::pair<std::string, std::uint64_t>> frequencies,
    std::size_t top_k) {
  if (top_k == 0) throw PreconditionError("dictionary pool top_k must be > 0");
  std::set<std::string> dictionary;
  for (const auto& w : word_list) {
    auto label = normalize_label(w);
    if (!label.empty()) dictionary.insert(std::move(label));
  }
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& [word, count] : frequencies) {
    auto label = normalize_label(word);
    if (dictionary.contains(label)) counts[label] += count;
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  std::vector<Concept> entries;
  entries.reserve(ranked.size());
  for (auto& [label, count] : ranked) entries.emplace_back(label);
  return DictionaryPool(std::move(entries));
}

DictionaryPool restrict_to_vocabulary(const DictionaryPool& pool, const FactStore& store) {
  std::vector<Concept> kept;
  for (const auto& c : pool.entries()) {
    if (store.find(c.label())) kept.push_back(c);
  }
  return DictionaryPool(std::move(kept));
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word list: " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!normalize_label(line).empty()) words.push_back(line);
  }
  return words;
}

std::vector<std::pair<std::string, std::uint64_t>> read_frequency_list(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open frequency list: " + path.string());
  std::vector<std::pair<std::string, std::uint64_t>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.rfind('\t');
    std::uint64_t count = 0;
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected word<TAB>count");
    }
    auto digits = std::string_view(line).substr(tab + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad count");
    }
    out.emplace_back(line.substr(0, tab), count);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence
//
// Layout (little-endian):
//   "CCKB" | u8 version | u64 vocab_n | vocab_n x (u32 len, bytes)
//   | u64 edge_n | edge_n x (u32 c1, u8 relation, u32 c2)
//   | u64 pool_n | pool_n x (u32 len, bytes) | u32 crc32(all preceding bytes)

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() {
    auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  std::string str() { return std::string(take(u32())); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view take(std::size_t n) {
    if (n > remaining()) throw ParseError("store file truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::string serialize_store(const FactStore& store, const DictionaryPool& pool) {
  std::string out(kStoreMagic, sizeof(kStoreMagic));
  out.push_back(static_cast<char>(kStoreFormatVersion));
  put_u64(out, store.vocabulary().size());
  for (const auto& label : store.vocabulary()) put_str(out, label);
  put_u64(out, store.edge_count());
  for (const auto& e : store.edges()) {
    put_u32(out, e.c1);
    out.push_back(static_cast<char>(e.relation));
    put_u32(out, e.c2);
  }
  put_u64(out, pool.size());
  for (const auto& c : pool.entries()) put_str(out, c.label());
  put_u32(out, crc_of(out));
  return out;
}

KnowledgeIndex deserialize_store(std::string_view bytes) {
  if (bytes.size() < sizeof(kStoreMagic) + 1 ||
      bytes.substr(0, sizeof(kStoreMagic)) != std::string_view(kStoreMagic, sizeof(kStoreMagic))) {
    throw ParseError("not a store file (bad magic)");
  }
  const auto version = static_cast<std::uint8_t>(bytes[sizeof(kStoreMagic)]);
  if (version != kStoreFormatVersion) {
    throw IncompatibleVersionError("store format version " + std::to_string(version) +
                                   " is not supported (expected " +
                                   std::to_string(kStoreFormatVersion) + ")");
  }
  if (bytes.size() < sizeof(kStoreMagic) + 1 + 4) throw ParseError("store file truncated");
  auto body = bytes.substr(0, bytes.size() - 4);
  Reader trailer(bytes.substr(bytes.size() - 4));
  if (trailer.u32() != crc_of(body)) throw ParseError("store file checksum mismatch");

  Reader in(body.substr(sizeof(kStoreMagic) + 1));
  FactStore store;
  const auto vocab_n = in.u64();
  if (vocab_n > in.remaining() / 4) throw ParseError("store vocabulary count corrupt");
  std::vector<std::string> vocabulary;
  vocabulary.reserve(vocab_n);
  for (std::uint64_t i = 0; i < vocab_n; ++i) vocabulary.push_back(in.str());
  if (!std::is_sorted(vocabulary.begin(), vocabulary.end()) ||
      std::adjacent_find(vocabulary.begin(), vocabulary.end()) != vocabulary.end()) {
    throw ParseError("store vocabulary not canonical");
  }
  const auto edge_n = in.u64();
  if (edge_n > in.remaining() / 9) throw ParseError("store edge count corrupt");
  std::vector<std::tuple<std::string, RelationKind, std::string>> triples;
  triples.reserve(edge_n);
  for (std::uint64_t i = 0; i < edge_n; ++i) {
    auto c1 = in.u32();
    auto rel = in.u8();
    auto c2 = in.u32();
    if (c1 >= vocab_n || c2 >= vocab_n || rel >= kRelationCount) {
      throw ParseError("store edge out of range");
    }
    triples.emplace_back(vocabulary[c1], static_cast<RelationKind>(rel), vocabulary[c2]);
  }
  const auto pool_n = in.u64();
  if (pool_n > in.remaining() / 4) throw ParseError("store pool count corrupt");
  std::vector<Concept> pool_entries;
  pool_entries.reserve(pool_n);
  for (std::uint64_t i = 0; i < pool_n; ++i) pool_entries.emplace_back(in.str());
  if (in.remaining() != 0) throw ParseError("trailing bytes in store file");

  KnowledgeIndex index{FactStore::from_triples(triples), DictionaryPool(std::move(pool_entries))};
  if (index.store.vocabulary().size() != vocab_n) {
    throw ParseError("store vocabulary does not match its edges");
  }
  return index;
}

void save_store(const FactStore& store, const DictionaryPool& pool,
                const std::filesystem::path& path) {
  const auto bytes = serialize_store(store, pool);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write store file: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failure: " + path.string());
}

KnowledgeIndex load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open store file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_store(buf.str());
}

}  // namespace ccprobe

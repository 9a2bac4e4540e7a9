#pragma once
// Deterministic synthetic corpora: an assertion dump with some rows that
// ingestion must drop, a word list with frequencies, and question/choice
// anchors built around the generated edges.

#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ccprobe/extraction.hpp"

namespace ccprobe {

struct SynthOptions {
  std::uint64_t seed = 1;
  std::size_t concepts = 300;
  std::size_t edges = 1500;
  std::size_t anchors = 100;
  std::size_t extra_words = 100;  // pool words that are not concepts
  double multiword_rate = 0.15;
  std::size_t noise_rows = 30;  // foreign-language, unselected-relation and malformed rows
};

struct SynthCorpus {
  std::vector<std::string> concepts;
  std::vector<std::tuple<std::string, RelationKind, std::string>> edges;  // as emitted, may repeat
  std::string dump_tsv;
  std::vector<std::string> words;
  std::vector<std::pair<std::string, std::uint64_t>> frequencies;
  std::vector<AnchorExample> anchors;
};

SynthCorpus generate_synthetic(const SynthOptions& options);

struct SynthFiles {
  std::filesystem::path dump;
  std::filesystem::path words;
  std::filesystem::path frequencies;
  std::filesystem::path dataset;
  std::filesystem::path config;  // run.conf pointing at the files above
};

// Writes dump.tsv, words.txt, frequencies.tsv, dataset.jsonl and run.conf
// into `dir` (created if needed).
SynthFiles write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& dir,
                           std::uint64_t run_seed);

}  // namespace ccprobe

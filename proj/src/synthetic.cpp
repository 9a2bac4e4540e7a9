#include "ccprobe/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "ccprobe/artifacts.hpp"
#include "ccprobe/dataset.hpp"
#include "ccprobe/errors.hpp"
#include "ccprobe/hashing.hpp"
#include "ccprobe/text.hpp"

namespace ccprobe {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string pseudo_word(std::mt19937_64& rng) {
  const auto syllables = 2 + uniform_index(rng, 2);
  std::string w;
  for (std::uint64_t i = 0; i < syllables; ++i) {
    w.push_back(kConsonants[uniform_index(rng, kConsonants.size())]);
    w.push_back(kVowels[uniform_index(rng, kVowels.size())]);
  }
  return w;
}

std::string uri_term(const std::string& label) {
  std::string out = label;
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

std::string dump_row(std::string_view rel, std::string_view lang1, const std::string& a,
                     std::string_view lang2, const std::string& b) {
  const std::string start = "/c/" + std::string(lang1) + "/" + uri_term(a);
  const std::string end = "/c/" + std::string(lang2) + "/" + uri_term(b);
  return "/a/[/r/" + std::string(rel) + "/," + start + "/," + end + "/]\t/r/" + std::string(rel) +
         "\t" + start + "/n\t" + end + "\t{\"weight\": 1.0}\n";
}

std::string question_for(const std::string& a, const std::string& b, std::size_t style) {
  switch (style % 4) {
    case 0: return "Where would you find a " + a + " next to the " + b + "?";
    case 1: return "What happens when the " + a + " meets some " + b + "?";
    case 2: return "Why might someone bring " + a + " to a " + b + "?";
    default: return "The " + a + " was kept beside the " + b + ", what is it?";
  }
}

}  // namespace

SynthCorpus generate_synthetic(const SynthOptions& o) {
  if (o.concepts < 8) throw PreconditionError("synthetic corpus needs at least 8 concepts");
  auto rng = keyed_engine(o.seed, {"synthetic"});
  SynthCorpus c;

  std::unordered_set<std::string> taken;
  auto fresh_word = [&] {
    for (;;) {
      auto w = pseudo_word(rng);
      if (!is_stopword(w) && taken.insert(w).second) return w;
    }
  };
  std::vector<std::string> single;
  while (c.concepts.size() < o.concepts) {
    const bool multi = !single.empty() &&
                       static_cast<double>(uniform_index(rng, 1000)) < o.multiword_rate * 1000.0;
    if (multi) {
      auto label = single[uniform_index(rng, single.size())] + " " + fresh_word();
      if (taken.insert(label).second) c.concepts.push_back(std::move(label));
    } else {
      single.push_back(fresh_word());
      c.concepts.push_back(single.back());
    }
  }

  std::vector<std::vector<std::size_t>> neighbors(c.concepts.size());
  for (std::size_t e = 0; e < o.edges; ++e) {
    const auto a = uniform_index(rng, c.concepts.size());
    auto b = uniform_index(rng, c.concepts.size());
    if (b == a) b = (b + 1) % c.concepts.size();
    const auto rel = kAllRelations[uniform_index(rng, kRelationCount)];
    c.edges.emplace_back(c.concepts[a], rel, c.concepts[b]);
    neighbors[a].push_back(b);
    neighbors[b].push_back(a);
    c.dump_tsv += dump_row(relation_name(rel), "en", c.concepts[a], "en", c.concepts[b]);
    if (o.noise_rows && e % std::max<std::size_t>(1, o.edges / o.noise_rows) == 0) {
      switch (uniform_index(rng, 3)) {
        case 0: c.dump_tsv += dump_row(relation_name(rel), "fr", c.concepts[a], "en", c.concepts[b]); break;
        case 1: c.dump_tsv += dump_row("HasProperty", "en", c.concepts[a], "en", c.concepts[b]); break;
        default: c.dump_tsv += "/a/[broken]\t/r/IsA\n"; break;
      }
    }
  }

  c.words = single;
  for (std::size_t i = 0; i < o.extra_words; ++i) c.words.push_back(fresh_word());
  std::sort(c.words.begin(), c.words.end());
  for (const auto& w : c.words) c.frequencies.emplace_back(w, 1 + uniform_index(rng, 100000));

  for (std::size_t i = 0; i < o.anchors; ++i) {
    AnchorExample anchor;
    anchor.id = "syn-" + std::to_string(i);
    const auto& [q1, rel, q2] = c.edges[uniform_index(rng, c.edges.size())];
    (void)rel;
    anchor.question = question_for(q1, q2, i);
    std::set<std::string> used{q1, q2};
    const auto a = static_cast<std::size_t>(
        std::find(c.concepts.begin(), c.concepts.end(), q1) - c.concepts.begin());
    std::vector<std::string> choices;
    if (!neighbors[a].empty()) {
      const auto& n = c.concepts[neighbors[a][uniform_index(rng, neighbors[a].size())]];
      if (used.insert(n).second) choices.push_back(n);
    }
    while (choices.size() < kChoiceCount) {
      const auto& pick = c.concepts[uniform_index(rng, c.concepts.size())];
      if (used.insert(pick).second) choices.push_back(pick);
    }
    // The neighbor (when present) is the gold answer; shuffle positions.
    anchor.answer_index = uniform_index(rng, kChoiceCount);
    std::swap(choices[0], choices[anchor.answer_index]);
    std::copy(choices.begin(), choices.end(), anchor.choices.begin());
    anchor.validate();
    c.anchors.push_back(std::move(anchor));
  }
  return c;
}

SynthFiles write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& dir,
                           std::uint64_t run_seed) {
  std::filesystem::create_directories(dir);
  SynthFiles f{dir / "dump.tsv", dir / "words.txt", dir / "frequencies.tsv",
               dir / "dataset.jsonl", dir / "run.conf"};
  write_file_atomic(f.dump, corpus.dump_tsv);
  std::string words, freqs, dataset;
  for (const auto& w : corpus.words) words += w + "\n";
  for (const auto& [w, n] : corpus.frequencies) freqs += w + "\t" + std::to_string(n) + "\n";
  for (const auto& a : corpus.anchors) dataset += to_dataset_line(a) + "\n";
  write_file_atomic(f.words, words);
  write_file_atomic(f.frequencies, freqs);
  write_file_atomic(f.dataset, dataset);
  const std::string conf =
      "# synthetic corpus\n"
      "dump = dump.tsv\n"
      "dataset = dataset.jsonl\n"
      "word_list = words.txt\n"
      "frequency_list = frequencies.tsv\n"
      "output_dir = run\n"
      "seed = " + std::to_string(run_seed) + "\n"
      "backend = mock\n"
      "mock.knowledge_rate = 0.7\n"
      "mock.coupling = 1.0\n"
      "concept_min_count = 3\n";
  write_file_atomic(f.config, conf);
  return f;
}

}  // namespace ccprobe

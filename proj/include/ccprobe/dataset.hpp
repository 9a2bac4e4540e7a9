#pragma once
// CommonsenseQA-style line-delimited dataset records:
//
//   {"id": "...", "answerKey": "A",
//    "question": {"stem": "...", "choices": [{"label": "A", "text": "..."}, ...]}}
//
// Exactly five labeled choices; answerKey names one of the labels. Raw text is
// preserved; normalization happens only inside extraction.

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "ccprobe/extraction.hpp"

namespace ccprobe {

struct LoadedDataset {
  std::vector<AnchorExample> anchors;
  std::vector<std::string> warnings;
};

// Any malformed record is a ParseError naming its 1-based line. Blank lines
// are skipped; an empty input yields zero anchors and a warning.
LoadedDataset load_dataset(std::istream& in, const std::string& source_name = "<stream>");
LoadedDataset load_dataset(const std::filesystem::path& path);

// One record in the layout above (labels A-E).
std::string to_dataset_line(const AnchorExample& anchor);

}  // namespace ccprobe

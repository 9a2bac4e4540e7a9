#include "ccprobe/dataset.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "ccprobe/errors.hpp"

namespace ccprobe {

using nlohmann::json;

namespace {

AnchorExample parse_record(const json& doc) {
  AnchorExample anchor;
  anchor.id = doc.at("id").get<std::string>();
  const auto& question = doc.at("question");
  anchor.question = question.at("stem").get<std::string>();
  const auto& choices = question.at("choices");
  if (!choices.is_array() || choices.size() != kChoiceCount) {
    throw std::runtime_error("expected " + std::to_string(kChoiceCount) + " choices, found " +
                             std::to_string(choices.is_array() ? choices.size() : 0));
  }
  const auto key = doc.at("answerKey").get<std::string>();
  std::set<std::string> labels;
  bool found = false;
  for (std::size_t k = 0; k < kChoiceCount; ++k) {
    const auto label = choices[k].at("label").get<std::string>();
    if (!labels.insert(label).second) throw std::runtime_error("duplicate choice label " + label);
    anchor.choices[k] = choices[k].at("text").get<std::string>();
    if (normalize_label(anchor.choices[k]).empty()) throw std::runtime_error("empty choice text");
    if (label == key) {
      anchor.answer_index = k;
      found = true;
    }
  }
  if (!found) throw std::runtime_error("answerKey '" + key + "' matches no choice label");
  anchor.validate();
  return anchor;
}

}  // namespace

LoadedDataset load_dataset(std::istream& in, const std::string& source_name) {
  LoadedDataset out;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto anchor = parse_record(json::parse(line));
      if (!ids.insert(anchor.id).second) throw std::runtime_error("duplicate id " + anchor.id);
      out.anchors.push_back(std::move(anchor));
    } catch (const std::exception& e) {
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw DataError("read failure in " + source_name);
  if (out.anchors.empty()) out.warnings.push_back(source_name + ": dataset has no records");
  return out;
}

LoadedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset: " + path.string());
  return load_dataset(in, path.string());
}

std::string to_dataset_line(const AnchorExample& anchor) {
  static constexpr const char* kLabels[kChoiceCount] = {"A", "B", "C", "D", "E"};
  json choices = json::array();
  for (std::size_t k = 0; k < kChoiceCount; ++k) {
    choices.push_back({{"label", kLabels[k]}, {"text", anchor.choices[k]}});
  }
  json doc = {{"id", anchor.id},
              {"answerKey", kLabels[anchor.answer_index]},
              {"question", {{"stem", anchor.question}, {"choices", std::move(choices)}}}};
  return doc.dump();
}

}  // namespace ccprobe

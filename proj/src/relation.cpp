#include "ccprobe/relation.hpp"

namespace ccprobe {

namespace {

constexpr std::array<std::string_view, kRelationCount> kNames = {
    "Antonym", "AtLocation", "CapableOf", "Causes",    "Desires",
    "FormOf",  "HasA",       "IsA",       "MadeOf",    "PartOf",
    "RelatedTo", "SimilarTo", "Synonym",  "UsedFor",
};

}  // namespace

std::string_view relation_name(RelationKind r) noexcept {
  return kNames[relation_index(r)];
}

std::optional<RelationKind> parse_relation(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return kAllRelations[i];
  }
  return std::nullopt;
}

std::optional<RelationKind> parse_relation_uri(std::string_view uri) noexcept {
  constexpr std::string_view prefix = "/r/";
  if (!uri.starts_with(prefix)) return std::nullopt;
  uri.remove_prefix(prefix.size());
  if (uri.ends_with('/')) uri.remove_suffix(1);
  return parse_relation(uri);
}

}  // namespace ccprobe

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ccprobe {

// Lowercase (ASCII), underscores to spaces, whitespace runs collapsed to one
// space, surrounding whitespace trimmed.
std::string normalize_label(std::string_view raw);

// Splits an already-normalized label on single spaces.
std::vector<std::string> split_words(std::string_view label);

// Tokenizes free text (questions, answer choices) into lowercase surface
// tokens. Word characters are ASCII letters, digits, apostrophes, hyphens and
// any non-ASCII byte; leading/trailing apostrophes and hyphens are stripped.
std::vector<std::string> tokenize_text(std::string_view text);

bool is_stopword(std::string_view word);

// A normalized knowledge-graph concept label. The invariants (non-empty,
// normalized) are enforced at construction.
class Concept {
 public:
  // Normalizes `raw`; throws PreconditionError if it normalizes to empty.
  explicit Concept(std::string_view raw);

  const std::string& label() const noexcept { return label_; }
  std::vector<std::string> words() const { return split_words(label_); }

  friend bool operator==(const Concept&, const Concept&) = default;
  friend auto operator<=>(const Concept&, const Concept&) = default;

 private:
  std::string label_;
};

}  // namespace ccprobe

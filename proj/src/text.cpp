#include "ccprobe/text.hpp"

#include <algorithm>
#include <array>

#include "ccprobe/errors.hpp"

namespace ccprobe {

namespace {

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v' || c == '_';
}

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'' ||
         c == '-' || u >= 0x80;
}

// Sorted for binary search.
constexpr std::string_view kStopwords[] = {
    "a", "about", "above", "after", "again", "against",
    "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before",
    "being", "below", "between", "both", "but", "by",
    "can", "could", "did", "do", "does", "doing",
    "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "he",
    "her", "here", "hers", "herself", "him", "himself",
    "his", "how", "i", "if", "in", "into",
    "is", "it", "it's", "its", "itself", "just",
    "me", "might", "more", "most", "must", "my",
    "myself", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other",
    "our", "ours", "out", "over", "own", "same",
    "she", "should", "so", "some", "such", "than",
    "that", "the", "their", "them", "then", "there",
    "these", "they", "this", "those", "through", "to",
    "too", "under", "until", "up", "very", "was",
    "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with",
    "would", "you", "you're", "your", "yours", "yourself",
    "yourselves",
};

}  // namespace

std::string normalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(ascii_lower(c));
  }
  return out;
}

std::vector<std::string> split_words(std::string_view label) {
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start < label.size()) {
    auto end = label.find(' ', start);
    if (end == std::string_view::npos) end = label.size();
    if (end > start) words.emplace_back(label.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

std::vector<std::string> tokenize_text(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    auto first = current.find_first_not_of("'-");
    auto last = current.find_last_not_of("'-");
    if (first != std::string::npos) {
      tokens.push_back(current.substr(first, last - first + 1));
    }
    current.clear();
  };
  for (char c : text) {
    char lc = ascii_lower(c);
    if (is_word_char(lc)) {
      current.push_back(lc);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

bool is_stopword(std::string_view word) {
  return std::binary_search(std::begin(kStopwords), std::end(kStopwords), word);
}

Concept::Concept(std::string_view raw) : label_(normalize_label(raw)) {
  if (label_.empty()) {
    throw PreconditionError("concept label is empty after normalization");
  }
}

}  // namespace ccprobe

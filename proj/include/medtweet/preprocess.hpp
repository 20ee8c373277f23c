#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "medtweet/data_io.hpp"
#include "medtweet/errors.hpp"
#include "medtweet/strings.hpp"

namespace medtweet {

// Emoticon/emoji surface strings mapped to replacement phrases. Keys are
// unique, phrases are nonempty and tab/newline-free, and no key may equal a
// phrase (a replaced phrase must never be matchable again).
class EmoticonMap {
 public:
  struct Entry {
    std::string key;
    std::string phrase;
  };

  void add(std::string key, std::string phrase) {
    if (key.empty()) throw invalid_input("emoticon key must be nonempty");
    if (trim(phrase).empty()) throw invalid_input("replacement phrase must be nonempty");
    detail::check_field(key, "emoticon key");
    detail::check_field(phrase, "replacement phrase");
    if (keys_.count(key)) throw invalid_input("duplicate emoticon key \"" + key + "\"");
    if (phrases_.count(key))
      throw invalid_input("emoticon key \"" + key + "\" equals an existing phrase");
    if (keys_.count(phrase))
      throw invalid_input("phrase \"" + phrase + "\" equals an existing emoticon key");
    keys_.insert(key);
    phrases_.insert(phrase);
    // Longest key first, so the scan always prefers the longest match.
    auto pos = std::find_if(entries_.begin(), entries_.end(),
                            [&](const Entry& e) { return e.key.size() < key.size(); });
    entries_.insert(pos, Entry{std::move(key), std::move(phrase)});
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;  // sorted by key length, longest first
  std::unordered_set<std::string> keys_;
  std::unordered_set<std::string> phrases_;
};

// Override file: UTF-8 TSV, two columns `surface\tphrase`, no header.
inline EmoticonMap load_emoticon_map(const std::string& path) {
  std::vector<std::string> lines = detail::read_tsv_lines(path);
  EmoticonMap map;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::string> f = detail::split_row(path, i + 1, lines[i], 2);
    try {
      map.add(f[0], f[1]);
    } catch (const invalid_input& e) {
      throw format_error(path, i + 1, e.what());
    }
  }
  return map;
}

inline const EmoticonMap& default_emoticon_map() {
  static const EmoticonMap map = [] {
    EmoticonMap m;
    m.add(":)", "smiling face");
    m.add(":-)", "smiling face");
    m.add(":))", "beaming face");
    m.add("=)", "smiling face");
    m.add(":D", "grinning face");
    m.add(":-D", "grinning face");
    m.add("xD", "laughing face");
    m.add("XD", "laughing face");
    m.add(":(", "frowning face");
    m.add(":-(", "frowning face");
    m.add("=(", "frowning face");
    m.add(":'(", "crying face");
    m.add(";)", "winking face");
    m.add(";-)", "winking face");
    m.add(":P", "face with tongue");
    m.add(":-P", "face with tongue");
    m.add(":p", "face with tongue");
    m.add(":|", "neutral face");
    m.add(":O", "surprised face");
    m.add(":o", "surprised face");
    m.add(":-/", "confused face");
    m.add("<3", "red heart");
    m.add("</3", "broken heart");
    m.add("¯\\_(ツ)_/¯", "shrug");
    m.add("\U0001F600", "grinning face");
    m.add("\U0001F601", "beaming face");
    m.add("\U0001F602", "face with tears of joy");
    m.add("\U0001F923", "rolling on the floor laughing");
    m.add("\U0001F60A", "smiling face with smiling eyes");
    m.add("\U0001F60D", "smiling face with heart eyes");
    m.add("\U0001F62D", "loudly crying face");
    m.add("\U0001F622", "crying face");
    m.add("\U0001F621", "angry face");
    m.add("\U0001F44D", "thumbs up");
    m.add("\U0001F44E", "thumbs down");
    m.add("❤️", "red heart");
    m.add("❤", "red heart");
    m.add("\U0001F495", "two hearts");
    m.add("\U0001F64F", "folded hands");
    m.add("\U0001F637", "face with medical mask");
    m.add("\U0001F922", "nauseated face");
    m.add("\U0001F92E", "vomiting face");
    m.add("\U0001F634", "sleeping face");
    m.add("\U0001F525", "fire");
    return m;
  }();
  return map;
}

// Replaces every @handle that starts the string or follows whitespace with
// the literal @USER. Handles are `@` plus one or more ASCII word characters;
// an embedded `@` (email addresses) is left alone.
inline std::string normalize_mentions(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool at_boundary = (i == 0) || is_ascii_space(text[i - 1]);
    if (text[i] == '@' && at_boundary) {
      std::size_t j = i + 1;
      while (j < text.size() && is_word_char(text[j])) ++j;
      if (j > i + 1) {
        out += "@USER";
        i = j;
        continue;
      }
    }
    out += text[i];
    ++i;
  }
  return out;
}

// Replaces every substring starting with http://, https://, or www. up to
// the next whitespace with the literal HTTPURL.
inline std::string normalize_urls(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::string_view rest = text.substr(i);
    if (starts_with(rest, "http://") || starts_with(rest, "https://") ||
        starts_with(rest, "www.")) {
      std::size_t j = i;
      while (j < text.size() && !is_ascii_space(text[j])) ++j;
      out += "HTTPURL";
      i = j;
      continue;
    }
    out += text[i];
    ++i;
  }
  return out;
}

// Single left-to-right pass; at each position the longest matching key wins
// and its replacement is never rescanned.
inline std::string translate_emoticons(std::string_view text, const EmoticonMap& map) {
  if (map.empty()) return std::string(text);
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const EmoticonMap::Entry* hit = nullptr;
    for (const EmoticonMap::Entry& e : map.entries()) {
      if (e.key[0] != text[i] || e.key.size() > text.size() - i) continue;
      if (text.substr(i, e.key.size()) == e.key) {
        hit = &e;
        break;
      }
    }
    if (hit) {
      out += hit->phrase;
      i += hit->key.size();
    } else {
      out += text[i];
      ++i;
    }
  }
  return out;
}

// Full normalization: emoticons, then mentions, then URLs. The pass order is
// fixed; emoticon keys are consumed before the URL scan runs.
inline std::string preprocess_tweet(std::string_view text, const EmoticonMap& map) {
  return normalize_urls(normalize_mentions(translate_emoticons(text, map)));
}

inline std::string preprocess_tweet(std::string_view text) {
  return preprocess_tweet(text, default_emoticon_map());
}

}  // namespace medtweet

#pragma once

#include <string>
#include <utility>
#include <vector>

// Hand-checked input/output pairs for preprocess_tweet with the builtin
// emoticon map. Byte-exact.
namespace testsupport {

inline const std::vector<std::pair<std::string, std::string>>& golden_preprocess_cases() {
  static const std::vector<std::pair<std::string, std::string>> cases = {
      {"@mary migraine gone!", "@USER migraine gone!"},
      {"", ""},
      {"mail me a@b.com", "mail me a@b.com"},
      {"see https://t.co/xyz now", "see HTTPURL now"},
      {"no links here", "no links here"},
      {"www.example.com/a?b=1", "HTTPURL"},
      {"great day :)", "great day smiling face"},
      {"plain text", "plain text"},
      {"@bob try https://x.io :)", "@USER try HTTPURL smiling face"},
      {"HTTPURL", "HTTPURL"},
      {"@USER", "@USER"},
      {"@alice @bob hi", "@USER @USER hi"},
      {"x@y @z_1", "x@y @USER"},
      {"http://a.b c www.d.e", "HTTPURL c HTTPURL"},
      {"love it <3", "love it red heart"},
      {"that was hilarious \U0001F602", "that was hilarious face with tears of joy"},
      {"\U0001F62D i cant", "loudly crying face i cant"},
      {"ugh :-(", "ugh frowning face"},
      {"thanks doc :))", "thanks doc beaming face"},
      {"xD so funny", "laughing face so funny"},
      {"@dr_smith said www.site.org/info :P", "@USER said HTTPURL face with tongue"},
      {"a http://x", "a HTTPURL"},
      {"nested @in@side", "nested @USER@side"},
      {"\U0001F64F please help \U0001F64F", "folded hands please help folded hands"},
      {"meh :| ok", "meh neutral face ok"},
      {"WWW.UPPER.COM", "WWW.UPPER.COM"},
      {"semi:)colon", "semismiling facecolon"},
      {"@ alone", "@ alone"},
      {"https:// x", "HTTPURL x"},
      {"broke up </3 sad", "broke up broken heart sad"},
  };
  return cases;
}

}  // namespace testsupport

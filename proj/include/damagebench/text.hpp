//------------------------------------------------------------------------------
//
//   Copyright 2026 The damagebench Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "damagebench/errors.hpp"

namespace damagebench::text {

/// NFKC normalization followed by full Unicode lowercasing. Lexicon terms and
/// descriptions both pass through here before any matching, so fullwidth
/// digits and "％" in Japanese output match ASCII patterns.
inline std::string normalize(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) {
    throw std::runtime_error("ICU NFKC normalizer unavailable");
  }
  const auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString normalized = nfkc->normalize(src, status);
  if (U_FAILURE(status)) {
    throw std::runtime_error("ICU NFKC normalization failed");
  }
  normalized.toLower(icu::Locale::getRoot());
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

/// Number of Unicode scalar values in well-formed UTF-8.
inline std::size_t utf8_length(std::string_view utf8) noexcept {
  std::size_t n = 0;
  for (const char c : utf8) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++n;
    }
  }
  return n;
}

inline bool is_ascii_word_char(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

/// Finds `term` in `haystack` (both already normalized). A match may not cut
/// through an ASCII word: if the term starts (ends) with an ASCII word
/// character, the preceding (following) character must not be one. Terms in
/// scripts without word spacing therefore match as plain substrings.
inline std::size_t find_term(std::string_view haystack, std::string_view term, std::size_t from = 0) noexcept {
  if (term.empty()) {
    return std::string_view::npos;
  }
  const bool check_front = is_ascii_word_char(term.front());
  const bool check_back = is_ascii_word_char(term.back());
  for (std::size_t pos = haystack.find(term, from); pos != std::string_view::npos;
       pos = haystack.find(term, pos + 1)) {
    const bool front_ok = !check_front || pos == 0 || !is_ascii_word_char(haystack[pos - 1]);
    const std::size_t end = pos + term.size();
    const bool back_ok = !check_back || end == haystack.size() || !is_ascii_word_char(haystack[end]);
    if (front_ok && back_ok) {
      return pos;
    }
  }
  return std::string_view::npos;
}

inline bool contains_term(std::string_view haystack, std::string_view term) noexcept {
  return find_term(haystack, term) != std::string_view::npos;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

} // namespace damagebench::text

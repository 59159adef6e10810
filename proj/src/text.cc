#include "ctxmine/text.h"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>

namespace ctxmine::text {
namespace {

// Decodes one code point starting at byte `i`; malformed input decodes to
// U+FFFD so callers never stall.
UChar32 next_cp(std::string_view s, int32_t& i) {
  UChar32 c;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i,
          static_cast<int32_t>(s.size()), c);
  return c < 0 ? 0xFFFD : c;
}

void append_cp(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool err = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), n, U8_MAX_LENGTH, c, err);
  if (!err) out.append(buf, static_cast<std::size_t>(n));
}

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char ch) { return static_cast<unsigned char>(ch) < 0x80; });
}

char ascii_lower(char ch) {
  return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
}

bool is_word_cp(UChar32 c) {
  return u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

bool is_apostrophe(UChar32 c) {
  return c == 0x27 || c == 0x2019 || c == 0x02BC;
}

bool is_hyphen(UChar32 c) { return c == 0x2D || c == 0x2010 || c == 0x2011; }

bool is_terminator(UChar32 c) {
  return c == '.' || c == '!' || c == '?' || c == 0x2026;
}

bool is_closing_quote(UChar32 c) {
  return c == '"' || c == '\'' || c == 0xBB || c == 0x201D || c == 0x2019 ||
         c == ')' || c == ']';
}

bool is_opening_quote(UChar32 c) {
  return c == '"' || c == '\'' || c == 0xAB || c == 0x201C || c == 0x2018 ||
         c == 0x201E || c == 0x201A || c == '(' || c == '[' || c == 0xBF ||
         c == 0xA1;
}

struct Cp {
  UChar32 c;
  int32_t begin;
  int32_t end;
};

std::vector<Cp> decode(std::string_view s) {
  std::vector<Cp> out;
  out.reserve(s.size());
  int32_t i = 0;
  while (i < static_cast<int32_t>(s.size())) {
    int32_t b = i;
    UChar32 c = next_cp(s, i);
    out.push_back({c, b, i});
  }
  return out;
}

constexpr std::array<std::string_view, 10> kTitles = {
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "mme", "mlle"};

// True when the period at cps[dot] closes an initial or a title.
bool is_abbreviation(const std::vector<Cp>& cps, std::size_t dot,
                     std::string_view text) {
  std::size_t start = dot;
  while (start > 0 && u_isalpha(cps[start - 1].c)) --start;
  if (start == dot) return false;
  if (start > 0 && is_word_cp(cps[start - 1].c)) return false;
  if (dot - start == 1) return true;
  std::string word = fold_case(
      text.substr(cps[start].begin, cps[dot].begin - cps[start].begin));
  return std::find(kTitles.begin(), kTitles.end(), word) != kTitles.end();
}

bool is_closing_punct(std::string_view f) {
  static constexpr std::array<std::string_view, 15> kClosing = {
      ".", ",", ";", ":", "!", "?", ")", "]", "}", "%", "»", "”",
      "’", "…", "..."};
  return std::find(kClosing.begin(), kClosing.end(), f) != kClosing.end();
}

bool is_opening_punct(std::string_view f) {
  static constexpr std::array<std::string_view, 8> kOpening = {
      "(", "[", "{", "«", "“", "‘", "¿", "¡"};
  return std::find(kOpening.begin(), kOpening.end(), f) != kOpening.end();
}

}  // namespace

std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  if (is_ascii(s)) {
    for (char ch : s) out.push_back(ascii_lower(ch));
    return out;
  }
  int32_t i = 0;
  while (i < static_cast<int32_t>(s.size()))
    append_cp(out, u_foldCase(next_cp(s, i), U_FOLD_CASE_DEFAULT));
  return out;
}

bool equals_ignore_case(std::string_view a, std::string_view b) {
  if (is_ascii(a) && is_ascii(b)) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
             return ascii_lower(x) == ascii_lower(y);
           });
  }
  int32_t i = 0;
  int32_t j = 0;
  while (i < static_cast<int32_t>(a.size()) && j < static_cast<int32_t>(b.size())) {
    if (u_foldCase(next_cp(a, i), U_FOLD_CASE_DEFAULT) !=
        u_foldCase(next_cp(b, j), U_FOLD_CASE_DEFAULT))
      return false;
  }
  return i == static_cast<int32_t>(a.size()) && j == static_cast<int32_t>(b.size());
}

bool starts_with_ignore_case(std::string_view s, std::string_view prefix) {
  int32_t i = 0;
  int32_t j = 0;
  while (j < static_cast<int32_t>(prefix.size())) {
    if (i >= static_cast<int32_t>(s.size())) return false;
    if (u_foldCase(next_cp(s, i), U_FOLD_CASE_DEFAULT) !=
        u_foldCase(next_cp(prefix, j), U_FOLD_CASE_DEFAULT))
      return false;
  }
  return true;
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  const std::vector<Cp> cps = decode(text);
  std::string current;
  for (std::size_t k = 0; k < cps.size(); ++k) {
    const UChar32 c = cps[k].c;
    if (is_word_cp(c)) {
      current.append(text.substr(cps[k].begin, cps[k].end - cps[k].begin));
      continue;
    }
    const bool inside = !current.empty();
    const bool next_is_word = k + 1 < cps.size() && is_word_cp(cps[k + 1].c);
    if (inside && is_apostrophe(c)) {
      current.push_back('\'');
      if (next_is_word) continue;
      out.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (inside && is_hyphen(c) && next_is_word) {
      current.append(text.substr(cps[k].begin, cps[k].end - cps[k].begin));
      continue;
    }
    if (inside) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

bool contains_words(std::span<const std::string> haystack,
                    std::span<const std::string> needle, bool case_sensitive) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  auto word_matches = [case_sensitive](const std::string& hay,
                                       const std::string& want) {
    if (!want.empty() && want.back() == '\'') {
      return case_sensitive ? hay.starts_with(want)
                            : starts_with_ignore_case(hay, want);
    }
    return case_sensitive ? hay == want : equals_ignore_case(hay, want);
  };
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size() && ok; ++j)
      ok = word_matches(haystack[i + j], needle[j]);
    if (ok) return true;
  }
  return false;
}

std::string trim(std::string_view s) {
  const std::vector<Cp> cps = decode(s);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && u_isUWhiteSpace(cps[b].c)) ++b;
  while (e > b && u_isUWhiteSpace(cps[e - 1].c)) --e;
  if (b == e) return {};
  return std::string(s.substr(cps[b].begin, cps[e - 1].end - cps[b].begin));
}

std::vector<std::string> split_sentences(std::string_view text) {
  const std::vector<Cp> cps = decode(text);
  std::vector<std::size_t> starts = {0};
  std::size_t k = 0;
  while (k < cps.size()) {
    if (!is_terminator(cps[k].c)) {
      ++k;
      continue;
    }
    const std::size_t first = k;
    while (k < cps.size() && is_terminator(cps[k].c)) ++k;
    const bool single_period = k - first == 1 && cps[first].c == '.';
    std::size_t j = k;
    while (j < cps.size() && is_closing_quote(cps[j].c)) ++j;
    const std::size_t ws = j;
    while (j < cps.size() && u_isUWhiteSpace(cps[j].c)) ++j;
    if (j == ws || j >= cps.size()) continue;
    const UChar32 next = cps[j].c;
    if (!(u_isUUppercase(next) || u_istitle(next) || is_opening_quote(next)))
      continue;
    if (single_period && is_abbreviation(cps, first, text)) continue;
    starts.push_back(j);
    k = j;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const std::size_t b = starts[i];
    const std::size_t e = i + 1 < starts.size() ? starts[i + 1] : cps.size();
    if (b >= e) continue;
    std::string seg = trim(text.substr(cps[b].begin, cps[e - 1].end - cps[b].begin));
    if (!seg.empty()) out.push_back(std::move(seg));
  }
  return out;
}

std::string final_sentence(std::string_view text) {
  std::vector<std::string> segs = split_sentences(text);
  if (segs.empty()) return trim(text);
  return std::move(segs.back());
}

std::string detokenize(std::span<const std::string_view> forms) {
  std::string out;
  bool suppress_space = true;
  for (std::string_view f : forms) {
    if (!suppress_space && !is_closing_punct(f)) out.push_back(' ');
    out.append(f);
    suppress_space = is_opening_punct(f);
  }
  return out;
}

}  // namespace ctxmine::text

// UTF-8 text helpers: caseless comparison, whole-word tokenization, the
// final-sentence segmenter used at scoring time and sentence detokenization.
#ifndef CTXMINE_TEXT_H_
#define CTXMINE_TEXT_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctxmine::text {

// Simple Unicode case folding, code point by code point.
std::string fold_case(std::string_view s);
bool equals_ignore_case(std::string_view a, std::string_view b);
bool starts_with_ignore_case(std::string_view s, std::string_view prefix);

// Splits `text` into words. A word is a maximal run of letters, marks and
// digits; an apostrophe or hyphen between two word characters stays inside
// the word. An apostrophe directly after a word that is not followed by a
// word character is kept on that word (French elision, "t'"). Apostrophe
// variants are normalized to U+0027.
std::vector<std::string> words(std::string_view text);

// True when `needle` (already split into words) occurs as a contiguous run
// of whole words in `haystack`. A needle word ending in an apostrophe also
// matches a haystack word that begins with it ("t'" matches "t'aime").
bool contains_words(std::span<const std::string> haystack,
                    std::span<const std::string> needle, bool case_sensitive);

// Sentence segmentation of MT output. Boundaries follow '.', '!', '?' or
// U+2026 runs (plus closing quotes) when whitespace and then an uppercase
// letter or an opening quote follows. A period after a single-letter initial
// or a short title abbreviation is not a boundary.
std::vector<std::string> split_sentences(std::string_view text);
// Last segment of `text`, or the whole trimmed text when there is no
// boundary.
std::string final_sentence(std::string_view text);

std::string trim(std::string_view s);

// Joins token forms with single spaces, then drops the space before closing
// punctuation and after opening punctuation.
std::string detokenize(std::span<const std::string_view> forms);

}  // namespace ctxmine::text

#endif  // CTXMINE_TEXT_H_

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace prct {

// Character counts throughout the toolkit are Unicode scalar values, not
// bytes. Inputs are assumed to be valid UTF-8.
std::size_t utf8_length(std::string_view s);

inline bool is_space_char(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// A word is a maximal run of non-whitespace. Offsets/lengths are in bytes;
// char_len is the word's length in Unicode scalars.
struct WordSpan {
    std::size_t byte_pos = 0;
    std::size_t byte_len = 0;
    std::size_t char_len = 0;
};

std::vector<WordSpan> split_words(std::string_view s);

// Whitespace-delimited tokens as owned strings.
std::vector<std::string> word_tokens(std::string_view s);

// Byte offset of the n-th Unicode scalar (clamped to s.size()).
std::size_t byte_offset_of_char(std::string_view s, std::size_t char_index);

} // namespace prct

#include "prct/text.hpp"

namespace prct {

namespace {
inline bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }
} // namespace

std::size_t utf8_length(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char b : s)
        if (!is_continuation(b)) ++n;
    return n;
}

std::vector<WordSpan> split_words(std::string_view s) {
    std::vector<WordSpan> words;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space_char(s[i])) ++i;
        if (i >= s.size()) break;
        std::size_t start = i;
        while (i < s.size() && !is_space_char(s[i])) ++i;
        WordSpan w;
        w.byte_pos = start;
        w.byte_len = i - start;
        w.char_len = utf8_length(s.substr(start, i - start));
        words.push_back(w);
    }
    return words;
}

std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    for (const WordSpan& w : split_words(s))
        out.emplace_back(s.substr(w.byte_pos, w.byte_len));
    return out;
}

std::size_t byte_offset_of_char(std::string_view s, std::size_t char_index) {
    std::size_t seen = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_continuation(static_cast<unsigned char>(s[i]))) {
            if (seen == char_index) return i;
            ++seen;
        }
        ++i;
    }
    return s.size();
}

} // namespace prct

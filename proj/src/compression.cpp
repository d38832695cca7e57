#include "prct/compression.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "prct/errors.hpp"
#include "prct/text.hpp"

namespace prct {

namespace {

double clamp_target(double t) { return std::min(1.0, std::max(0.1, t)); }

// Longest prefix of whole words fitting `budget_chars`, minimum one word.
// Returns the retained slice (leading/trailing whitespace dropped).
std::string_view word_prefix(std::string_view text, std::size_t budget_chars) {
    std::vector<WordSpan> words = split_words(text);
    if (words.empty()) return std::string_view{};
    std::size_t end_byte = words[0].byte_pos + words[0].byte_len;
    for (std::size_t k = 1; k < words.size(); ++k) {
        std::size_t cand_end = words[k].byte_pos + words[k].byte_len;
        std::size_t cand_chars =
            utf8_length(text.substr(words[0].byte_pos, cand_end - words[0].byte_pos));
        if (cand_chars > budget_chars) break;
        end_byte = cand_end;
    }
    return text.substr(words[0].byte_pos, end_byte - words[0].byte_pos);
}

// Advances a byte offset to the end of the word it lands inside, so a cut
// never splits a word.
std::size_t snap_forward(std::string_view text, std::size_t byte_pos) {
    if (byte_pos == 0 || byte_pos >= text.size()) return std::min(byte_pos, text.size());
    if (is_space_char(text[byte_pos]) || is_space_char(text[byte_pos - 1])) return byte_pos;
    while (byte_pos < text.size() && !is_space_char(text[byte_pos])) ++byte_pos;
    return byte_pos;
}

struct Segment {
    std::string label;
    std::string_view slice;
    double target = 1.0;
};

CompressionOutcome run_segments(std::string_view text, const std::vector<Segment>& segments) {
    CompressionOutcome out;
    out.original_chars = utf8_length(text);
    std::string joined;
    for (const Segment& seg : segments) {
        std::size_t seg_chars = utf8_length(seg.slice);
        if (seg_chars == 0 || split_words(seg.slice).empty()) continue;
        std::size_t budget = std::size_t(std::ceil(seg.target * double(seg_chars)));
        std::string_view kept = word_prefix(seg.slice, budget);
        if (kept.empty()) continue;
        if (!joined.empty()) joined += ' ';
        joined.append(kept);
        SegmentOutcome so;
        so.label = seg.label;
        so.target_r = seg.target;
        so.realized_r = double(utf8_length(kept)) / double(seg_chars);
        out.per_segment.push_back(std::move(so));
    }
    out.compressed_text = std::move(joined);
    out.retained_chars = utf8_length(out.compressed_text);
    out.realized_ratio =
        out.original_chars == 0 ? 1.0 : double(out.retained_chars) / double(out.original_chars);
    return out;
}

} // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::none: return "none";
        case Strategy::uniform: return "uniform";
        case Strategy::adaptive: return "adaptive";
        case Strategy::recency: return "recency";
    }
    return "none";
}

Strategy strategy_from_name(std::string_view name) {
    if (name == "none") return Strategy::none;
    if (name == "uniform") return Strategy::uniform;
    if (name == "adaptive") return Strategy::adaptive;
    if (name == "recency") return Strategy::recency;
    throw DegenerateInputError("unknown compression strategy: " + std::string(name));
}

double shannon_entropy(std::string_view chunk) {
    if (chunk.empty()) throw DegenerateInputError("shannon_entropy of empty chunk");
    std::unordered_map<char32_t, std::size_t> freq;
    std::size_t total = 0;
    std::size_t i = 0;
    while (i < chunk.size()) {
        // decode one UTF-8 scalar
        unsigned char lead = static_cast<unsigned char>(chunk[i]);
        char32_t cp = lead;
        std::size_t len = 1;
        if (lead >= 0xF0) len = 4;
        else if (lead >= 0xE0) len = 3;
        else if (lead >= 0xC0) len = 2;
        if (len > 1 && i + len <= chunk.size()) {
            cp = lead & (0xFF >> (len + 1));
            for (std::size_t k = 1; k < len; ++k)
                cp = (cp << 6) | (static_cast<unsigned char>(chunk[i + k]) & 0x3F);
        }
        ++freq[cp];
        ++total;
        i += len;
    }
    double h = 0.0;
    for (const auto& [cp, count] : freq) {
        double p = double(count) / double(total);
        h -= p * std::log2(p);
    }
    return h < 0.0 ? 0.0 : h;
}

CompressionOutcome uniform_truncate(std::string_view text, double r) {
    if (!(r > 0.0 && r <= 1.0))
        throw DegenerateInputError("uniform_truncate requires r in (0, 1]");
    CompressionOutcome out;
    out.original_chars = utf8_length(text);
    if (out.original_chars == 0 || split_words(text).empty())
        throw DegenerateInputError("uniform_truncate: text contains no words");
    std::size_t budget = std::size_t(std::ceil(r * double(out.original_chars)));
    std::string_view kept = word_prefix(text, budget);
    out.compressed_text = std::string(kept);
    out.retained_chars = utf8_length(kept);
    out.realized_ratio = double(out.retained_chars) / double(out.original_chars);
    return out;
}

CompressionOutcome adaptive_compress(std::string_view text, double r, int chunk_chars) {
    if (chunk_chars < 1) throw DegenerateInputError("adaptive_compress requires chunk_chars >= 1");
    if (!(r > 0.0 && r <= 1.0))
        throw DegenerateInputError("adaptive_compress requires r in (0, 1]");
    if (split_words(text).empty())
        throw DegenerateInputError("adaptive_compress: text contains no words");

    std::size_t total_chars = utf8_length(text);
    std::vector<std::string_view> chunks;
    std::size_t consumed_chars = 0;
    std::size_t byte_pos = 0;
    while (byte_pos < text.size()) {
        std::size_t next_chars = std::min(consumed_chars + std::size_t(chunk_chars), total_chars);
        std::size_t next_byte = byte_offset_of_char(text, next_chars);
        next_byte = snap_forward(text, next_byte);
        if (next_byte <= byte_pos) next_byte = text.size();
        chunks.push_back(text.substr(byte_pos, next_byte - byte_pos));
        consumed_chars = utf8_length(text.substr(0, next_byte));
        byte_pos = next_byte;
    }

    std::vector<double> entropies;
    entropies.reserve(chunks.size());
    for (std::string_view c : chunks) entropies.push_back(shannon_entropy(c));
    std::vector<double> sorted = entropies;
    std::sort(sorted.begin(), sorted.end());
    double med = sorted.size() % 2 == 1
                     ? sorted[sorted.size() / 2]
                     : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);

    std::vector<Segment> segments;
    segments.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        Segment seg;
        seg.label = "chunk_" + std::to_string(i);
        seg.slice = chunks[i];
        seg.target = clamp_target(entropies[i] < med ? r / 2.0 : r * 1.5);
        segments.push_back(std::move(seg));
    }
    return run_segments(text, segments);
}

CompressionOutcome recency_compress(std::string_view text, double r) {
    if (!(r > 0.0 && r <= 1.0))
        throw DegenerateInputError("recency_compress requires r in (0, 1]");
    if (split_words(text).empty())
        throw DegenerateInputError("recency_compress: text contains no words");

    std::size_t total_chars = utf8_length(text);
    std::size_t b1_chars = std::size_t(std::floor(0.2 * double(total_chars)));
    std::size_t b2_chars = std::size_t(std::floor(0.8 * double(total_chars)));
    std::size_t b1 = snap_forward(text, byte_offset_of_char(text, b1_chars));
    std::size_t b2 = std::max(b1, snap_forward(text, byte_offset_of_char(text, b2_chars)));

    std::vector<Segment> segments = {
        {"preamble", text.substr(0, b1), clamp_target(r / 2.0)},
        {"body", text.substr(b1, b2 - b1), clamp_target(r)},
        {"recent", text.substr(b2), clamp_target(r * 1.5)},
    };
    return run_segments(text, segments);
}

CompressionOutcome compress(std::string_view text, const CompressionSpec& spec) {
    if (text.empty()) throw DegenerateInputError("compress: empty text");
    if (!(spec.target_retention > 0.0 && spec.target_retention <= 1.0))
        throw DegenerateInputError("compress: target retention must be in (0, 1]");
    if (spec.strategy == Strategy::none && spec.target_retention != 1.0)
        throw DegenerateInputError("compress: strategy `none` requires r == 1.0");

    switch (spec.strategy) {
        case Strategy::none: {
            CompressionOutcome out;
            out.compressed_text = std::string(text);
            out.original_chars = utf8_length(text);
            out.retained_chars = out.original_chars;
            out.realized_ratio = 1.0;
            return out;
        }
        case Strategy::uniform:
            return uniform_truncate(text, spec.target_retention);
        case Strategy::adaptive:
            return adaptive_compress(text, spec.target_retention, spec.chunk_chars);
        case Strategy::recency:
            return recency_compress(text, spec.target_retention);
    }
    throw DegenerateInputError("compress: unknown strategy");
}

} // namespace prct

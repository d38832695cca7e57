#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace prct {

enum class Strategy { none, uniform, adaptive, recency };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);

struct CompressionSpec {
    Strategy strategy = Strategy::none;
    double target_retention = 1.0; // r in (0, 1]; must be 1.0 for `none`
    int chunk_chars = 200;         // adaptive only
};

struct SegmentOutcome {
    std::string label;
    double target_r = 1.0;
    double realized_r = 1.0;
};

struct CompressionOutcome {
    std::string compressed_text;
    std::size_t original_chars = 0;
    std::size_t retained_chars = 0;
    double realized_ratio = 1.0;
    std::vector<SegmentOutcome> per_segment; // filled by adaptive and recency
};

// Dispatches on spec.strategy. All strategies preserve whole words (maximal
// runs of non-whitespace); `none` is the identity. Throws
// DegenerateInputError on text with no words or on an invalid spec.
CompressionOutcome compress(std::string_view text, const CompressionSpec& spec);

// Keeps the longest prefix of whole words (with their separating whitespace)
// whose character count fits ceil(r * chars(text)); always keeps the first
// word.
CompressionOutcome uniform_truncate(std::string_view text, double r);

// Bits per character of the chunk's character-frequency distribution.
double shannon_entropy(std::string_view chunk);

// Splits into consecutive chunks of ~chunk_chars characters (boundaries
// snapped forward so words stay whole), budgets each chunk by its entropy
// relative to the per-chunk median (below-median -> r/2, at-or-above ->
// r*1.5, clamped to [0.1, 1.0]), and truncates chunks independently.
CompressionOutcome adaptive_compress(std::string_view text, double r, int chunk_chars);

// Splits at 20% / 80% of characters (snapped forward to word boundaries)
// into preamble / body / recent segments with targets r/2, r, r*1.5
// (clamped to [0.1, 1.0]).
CompressionOutcome recency_compress(std::string_view text, double r);

} // namespace prct

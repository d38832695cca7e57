#include "prct/rng.hpp"

#include "prct/sha256.hpp"

namespace prct::rng {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    Sha256 h;
    std::uint8_t le[8];
    for (int i = 0; i < 8; ++i) le[i] = std::uint8_t(seed >> (8 * i));
    h.update(le, 8);
    h.update(label);
    auto d = h.digest();
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out = (out << 8) | d[i];
    return out;
}

} // namespace prct::rng

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace prct {

// Incremental SHA-256 (FIPS 180-4).
class Sha256 {
public:
    Sha256();

    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }

    // Finalizes and returns the 32-byte digest. The object must not be
    // updated afterwards.
    std::array<std::uint8_t, 32> digest();

    // Lowercase hex of digest().
    std::string hex_digest();

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_;
    std::uint64_t bit_length_ = 0;
    std::size_t buffer_len_ = 0;
    bool finalized_ = false;
};

std::string sha256_hex(std::string_view data);

// First 16 hex characters of the SHA-256 of `data`; used for stable ids.
std::string sha256_hex16(std::string_view data);

// Digest of a file's exact bytes. Throws IngestError if unreadable.
std::string sha256_file_hex(const std::string& path);

} // namespace prct

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cae {

// Incremental SHA-256. Used for parameter digests (frozen-teacher checks)
// and config digests.
class Sha256 {
public:
    Sha256();
    void update(const void* data, size_t len);
    std::array<uint8_t, 32> finish();

    static std::string hex_of(const void* data, size_t len);
    static std::string hex_of(const std::string& s);

private:
    void process_block(const uint8_t* block);

    uint32_t h_[8];
    uint8_t buffer_[64];
    size_t buffer_len_ = 0;
    uint64_t total_len_ = 0;
};

std::string to_hex(const std::array<uint8_t, 32>& digest);

}  // namespace cae

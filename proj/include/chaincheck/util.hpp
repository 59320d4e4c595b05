#ifndef CHAINCHECK_UTIL_HPP
#define CHAINCHECK_UTIL_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chaincheck {

// FNV-1a, 64-bit. Stable content hash for provenance checks between
// serialized artifacts (CFG <-> offset table <-> chain sets).
inline uint64_t fnv1a64(std::span<const uint8_t> data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (uint8_t b : data) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(std::span<const uint8_t>(
        reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

std::string to_hex(std::span<const uint8_t> bytes);
std::string to_hex_u64(uint64_t v);

// Strict parser for even-length lowercase hex. Throws std::invalid_argument.
std::vector<uint8_t> parse_hex_bytes(const std::string& s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const uint8_t> bytes);

// Little-endian scalar append/read helpers for the binary formats.
inline void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline uint32_t get_u32(std::span<const uint8_t> in, size_t off) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[off + i]) << (8 * i);
    return v;
}

inline uint64_t get_u64(std::span<const uint8_t> in, size_t off) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[off + i]) << (8 * i);
    return v;
}

} // namespace chaincheck

#endif

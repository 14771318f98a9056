#pragma once

#include "spheroid/state.hpp"

#include <cstdint>
#include <string>

namespace spheroid {

inline constexpr std::uint32_t kSnapshotVersion = 1;

// Binary layout (little endian), see docs/formats.md:
//   "SPHSNAP1" | u32 version | u32 N | f64 t | f64 z | u32 config_hash |
//   u32 len | len bytes code version | f64 c[N] | f64 p[N] | u32 crc32
// The trailing CRC-32 covers every preceding byte.
struct Snapshot {
    State state;
    std::uint32_t format_version = kSnapshotVersion;
    std::uint32_t config_hash = 0;
    std::string code_version;
};

std::string encode_snapshot(const Snapshot& snap);
// Throws FormatError on bad magic, unsupported version, length or checksum
// mismatch (a truncated file fails the checksum).
Snapshot decode_snapshot(const std::string& bytes);

void save_snapshot(const Snapshot& snap, const std::string& path);
Snapshot load_snapshot(const std::string& path);
// Also rejects a grid size different from `expected_n`.
Snapshot load_snapshot(const std::string& path, int expected_n);

const char* code_version();

} // namespace spheroid

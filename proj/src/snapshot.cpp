#include "spheroid/snapshot.hpp"

#include "spheroid/error.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace spheroid {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'H', 'S', 'N', 'A', 'P', '1'};

static_assert(std::endian::native == std::endian::little,
              "snapshot encoding assumes a little-endian host");

template <class T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    template <class T>
    T get() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string get_bytes(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError("snapshot truncated");
    }
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t checksum(const char* data, std::size_t n) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

} // namespace

const char* code_version() { return "spheroid 1.0.0"; }

std::string encode_snapshot(const Snapshot& snap) {
    const State& s = snap.state;
    const auto n = static_cast<std::uint32_t>(s.grid.size());
    if (s.c.size() != n || s.p.size() != n)
        throw DomainError("snapshot arrays do not match the grid size");
    std::string out(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kSnapshotVersion);
    put<std::uint32_t>(out, n);
    put<double>(out, s.t);
    put<double>(out, s.z);
    put<std::uint32_t>(out, snap.config_hash);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(snap.code_version.size()));
    out += snap.code_version;
    for (double v : s.c) put<double>(out, v);
    for (double v : s.p) put<double>(out, v);
    put<std::uint32_t>(out, checksum(out.data(), out.size()));
    return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw FormatError("not a snapshot file (bad magic)");
    // Check the trailing CRC before trusting any length field.
    if (bytes.size() < sizeof kMagic + 4)
        throw FormatError("snapshot checksum mismatch (file truncated)");
    std::uint32_t stored;
    std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
    if (checksum(bytes.data(), bytes.size() - 4) != stored)
        throw FormatError("snapshot checksum mismatch (file truncated or corrupted)");

    Reader in(bytes);
    in.get_bytes(sizeof kMagic);
    Snapshot snap;
    snap.format_version = in.get<std::uint32_t>();
    if (snap.format_version != kSnapshotVersion)
        throw FormatError("unsupported snapshot version " + std::to_string(snap.format_version));
    const auto n = in.get<std::uint32_t>();
    if (n < 3) throw FormatError("snapshot grid size " + std::to_string(n) + " < 3");
    snap.state.t = in.get<double>();
    snap.state.z = in.get<double>();
    snap.config_hash = in.get<std::uint32_t>();
    const auto len = in.get<std::uint32_t>();
    snap.code_version = in.get_bytes(len);
    if (bytes.size() - in.pos() != 16ull * n + 4)
        throw FormatError("snapshot payload length does not match N = " + std::to_string(n));
    snap.state.grid = Grid(static_cast<int>(n));
    snap.state.c.resize(n);
    snap.state.p.resize(n);
    for (auto& v : snap.state.c) v = in.get<double>();
    for (auto& v : snap.state.p) v = in.get<double>();
    return snap;
}

void save_snapshot(const Snapshot& snap, const std::string& path) {
    const std::string bytes = encode_snapshot(snap);
    // Write to a temporary name first so a crash never leaves a partial file
    // under the final name.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write snapshot " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed for snapshot " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot rename snapshot to " + path);
}

Snapshot load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_snapshot(ss.str());
}

Snapshot load_snapshot(const std::string& path, int expected_n) {
    Snapshot snap = load_snapshot(path);
    if (snap.state.grid.size() != expected_n)
        throw FormatError("snapshot grid N = " + std::to_string(snap.state.grid.size()) +
                          " does not match the configured N = " + std::to_string(expected_n));
    return snap;
}

} // namespace spheroid

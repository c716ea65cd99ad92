#include "hal/approx/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "hal/common/error.hpp"

namespace hal::approx {

namespace {

constexpr char kMagic[8] = {'H', 'A', 'L', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put(std::string& out, T value) {
    out.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

class Cursor {
public:
    explicit Cursor(const std::string& data, std::size_t end) : data_(data), end_(end) {}

    template <typename T>
    auto take() -> T {
        need(sizeof(T));
        T value;
        std::memcpy(&value, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    auto take_bytes(std::size_t n) -> std::string {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    [[nodiscard]] auto pos() const -> std::size_t { return pos_; }
    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }

private:
    void need(std::size_t n) const {
        if (n > end_ - pos_) {
            throw Error("checkpoint: truncated");
        }
    }
    const std::string& data_;
    std::size_t end_;
    std::size_t pos_ = 0;
};

}    // namespace

auto crc32_of(const std::string& bytes) -> std::uint32_t {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), chunk);
        off += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

void CheckpointWriter::add(const std::string& name, std::string bytes) {
    sections_[name] = std::move(bytes);
}

auto CheckpointWriter::bytes() const -> std::string {
    std::string out(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(sections_.size()));
    for (const auto& [name, data] : sections_) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put<std::uint64_t>(out, data.size());
        out += data;
    }
    put<std::uint32_t>(out, crc32_of(out));
    return out;
}

void CheckpointWriter::save(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw Error("checkpoint: cannot write " + tmp);
        }
        const auto data = bytes();
        f.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!f) {
            throw Error("checkpoint: write failed for " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw Error("checkpoint: cannot move into place " + path);
    }
}

auto CheckpointReader::parse(const std::string& bytes) -> CheckpointReader {
    if (bytes.size() < sizeof(kMagic) + 12 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw Error("checkpoint: not a checkpoint file");
    }
    const std::size_t body = bytes.size() - sizeof(std::uint32_t);
    std::uint32_t stored = 0;
    std::memcpy(&stored, bytes.data() + body, sizeof(stored));
    if (crc32_of(bytes.substr(0, body)) != stored) {
        throw ChecksumError("checkpoint: CRC mismatch, file is corrupt");
    }
    Cursor cur(bytes, body);
    cur.skip(sizeof(kMagic));
    CheckpointReader r;
    r.version_ = cur.take<std::uint32_t>();
    if (r.version_ != kCheckpointVersion) {
        throw Error("checkpoint: unsupported version " + std::to_string(r.version_));
    }
    const auto count = cur.take<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name = cur.take_bytes(cur.take<std::uint32_t>());
        const auto size = cur.take<std::uint64_t>();
        r.sections_[name] = cur.take_bytes(static_cast<std::size_t>(size));
    }
    if (cur.pos() != body) {
        throw Error("checkpoint: trailing bytes");
    }
    return r;
}

auto CheckpointReader::load(const std::string& path) -> CheckpointReader {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw Error("checkpoint: cannot open " + path);
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

auto CheckpointReader::get(const std::string& name) const -> const std::string& {
    const auto it = sections_.find(name);
    if (it == sections_.end()) {
        throw Error("checkpoint: missing section '" + name + "'");
    }
    return it->second;
}

}    // namespace hal::approx

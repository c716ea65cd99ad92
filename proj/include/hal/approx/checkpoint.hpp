// File: checkpoint.hpp
// Description: Versioned, CRC-protected container of named binary sections

#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace hal::approx {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointWriter {
public:
    void add(const std::string& name, std::string bytes);
    [[nodiscard]] auto bytes() const -> std::string;
    void save(const std::string& path) const;

private:
    std::map<std::string, std::string> sections_;
};

// Layout: "HALCKPT\0" | u32 version | u32 count | {u32 name_len, name,
// u64 size, bytes}* | u32 crc32 of everything before it.
class CheckpointReader {
public:
    static auto parse(const std::string& bytes) -> CheckpointReader;
    static auto load(const std::string& path) -> CheckpointReader;

    [[nodiscard]] auto has(const std::string& name) const -> bool { return sections_.count(name) > 0; }
    [[nodiscard]] auto get(const std::string& name) const -> const std::string&;
    [[nodiscard]] auto version() const -> std::uint32_t { return version_; }
    [[nodiscard]] auto sections() const -> const std::map<std::string, std::string>& { return sections_; }

private:
    std::uint32_t version_ = 0;
    std::map<std::string, std::string> sections_;
};

auto crc32_of(const std::string& bytes) -> std::uint32_t;

}    // namespace hal::approx

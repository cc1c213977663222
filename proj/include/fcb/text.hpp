#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Small text/file helpers shared by the table readers and writers.
namespace fcb::text {

std::vector<std::string> split(std::string_view line, char delim);
std::string_view trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, char delim);

/// Splits into lines, dropping a trailing '\r' per line.
std::vector<std::string> lines(std::string_view text);

/// Strict full-string numeric parses; throw ParseError on junk.
double parse_double(std::string_view s, std::size_t row = 0);
long long parse_int(std::string_view s, std::size_t row = 0);

/// Shortest round-trippable decimal for a double ("%.17g" trimmed).
std::string format_double(double v);
/// Fixed-precision decimal, for reports and SVG coordinates.
std::string format_fixed(double v, int decimals);

std::string read_file(const std::filesystem::path& file);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& file);
/// Writes via a temporary sibling and rename, creating parent directories.
void write_file(const std::filesystem::path& file, std::string_view contents);
void write_bytes(const std::filesystem::path& file, std::span<const std::uint8_t> bytes);

/// Round half away from zero to an integer.
long long round_half_away(double v);

/// FNV-1a 64-bit, incremental.
class Fnv1a {
public:
    void update(std::span<const std::uint8_t> bytes);
    void update(std::string_view s);
    void update_u64(std::uint64_t v);
    std::uint64_t digest() const noexcept { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 14695981039346656037ull;
};

}  // namespace fcb::text

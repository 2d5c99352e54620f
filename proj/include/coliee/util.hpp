#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace coliee {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so a
/// reader never observes a half-written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Calls `fn(line_number, line)` for every non-blank line of a JSON-lines file
/// and wraps JSON syntax errors into a parse error naming file and line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const json&)>& fn);

std::string to_jsonl(const std::vector<json>& records);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::string trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);
std::vector<std::string> split_whitespace(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Shell-style '*' / '?' wildcard match; also accepts inclusive numeric ranges
/// written as "lo..hi" (e.g. "001..525"), which match ids that parse as
/// integers in that range.
bool id_pattern_match(std::string_view pattern, std::string_view id);

std::string sha256_hex(std::string_view data);

/// mt19937_64 is fully specified by the standard; the index draw below uses
/// rejection sampling instead of std::uniform_int_distribution so results do
/// not depend on the standard library vendor.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : m_gen(seed) {}

    /// Uniform in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n);

    /// First `count` entries of a uniformly random permutation of [0, n).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

  private:
    std::mt19937_64 m_gen;
};

/// Worker cap used by the parallel helpers; 0 means hardware concurrency.
void set_max_jobs(std::size_t jobs) noexcept;
std::size_t max_jobs() noexcept;

/// Runs fn(i) for i in [0, n) on up to max_jobs() threads. Callers write into
/// pre-sized per-index slots so the reduction order stays deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace coliee

#pragma once
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace nqp {

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy mirrored by the CLI exit codes: 2 usage, 3 I/O, 4 numeric gate.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericGateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Round-trip-safe decimal representation (17 significant digits).
std::string fmt17(double v);

std::uint64_t fnv1a64(const void* data, std::size_t n,
                      std::uint64_t h = 14695981039346656037ull);
std::string hex64(std::uint64_t v);

// Write-to-temp-then-rename so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace nqp

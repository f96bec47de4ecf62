#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ccnn {

inline constexpr const char* kToolVersion = "0.1.0";

uint64_t fnv1a64(const std::string& bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// "# tool=ccnn <version> config_hash=<hex> seed=<seed>" comment line placed
// at the top of every CSV output.
std::string provenance_line(uint64_t config_hash, uint64_t seed);

std::string format_double(double x);  // %.17g, round-trip faithful

}  // namespace ccnn

#pragma once

// Line-oriented text persistence for spanning histograms.
//
//   # bperc spanning histogram
//   # tool=bperc version=0.1.0 config_hash=<hex> seed=<u64>
//   L 64
//   model sq2N-2
//   sweep sites
//   spanning top-bottom
//   param 0.15
//   replicas 100000
//   seed 42
//   engine 1
//   capacity 4096
//   barrier_count 100000
//   barrier_sum 1234567
//   barrier_sum_sq 98765432
//   2381 3          <- sparse `n count` lines, ascending n
//   ...
//   nonspanning 0

#include <filesystem>
#include <iosfwd>
#include <string>

#include "bperc/engine.hpp"

namespace bperc {

inline constexpr const char* kToolName = "bperc";
inline constexpr const char* kToolVersion = "0.1.0";

struct AuditInfo {
  std::string config_hash = "none";
  std::uint64_t seed = 0;
};

std::string audit_line(const AuditInfo& audit);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

void write_histogram(std::ostream& out, const SpanningHistogram& hist, const AuditInfo& audit);
SpanningHistogram read_histogram(std::istream& in);

void save_histogram(const std::filesystem::path& path, const SpanningHistogram& hist,
                    const AuditInfo& audit);
SpanningHistogram load_histogram(const std::filesystem::path& path);

}  // namespace bperc

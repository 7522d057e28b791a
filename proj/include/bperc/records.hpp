#pragma once

// Key-value record files used for thresholds, FSS results and fit
// parameters:
//
//   # bperc <title>
//   # tool=bperc version=0.1.0 config_hash=<hex> seed=<u64>
//   record threshold
//   L 64
//   param 0.1
//   chi_cL 0.6123 0.0004
//   end
//
// Values are whitespace-separated tokens; doubles use shortest round-trip
// text so files reparse losslessly.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bperc/histogram_io.hpp"

namespace bperc {

struct Record {
  std::string kind;
  std::vector<std::pair<std::string, std::vector<std::string>>> fields;

  Record& set(const std::string& key, std::vector<std::string> values);
  Record& set(const std::string& key, const std::string& value);
  Record& set(const std::string& key, double value);
  Record& set(const std::string& key, double value, double error);
  Record& set_int(const std::string& key, long long value);

  bool has(const std::string& key) const;
  const std::vector<std::string>& values(const std::string& key) const;  // throws if absent
  std::string text(const std::string& key) const;
  double number(const std::string& key, std::size_t index = 0) const;
  long long integer(const std::string& key) const;
  std::optional<double> maybe_number(const std::string& key, std::size_t index = 0) const;

  friend bool operator==(const Record&, const Record&) = default;
};

struct RecordFile {
  std::string title;
  AuditInfo audit;
  std::vector<Record> records;

  std::vector<const Record*> of_kind(const std::string& kind) const;
};

void write_records(std::ostream& out, const RecordFile& file);
RecordFile read_records(std::istream& in);

void save_records(const std::filesystem::path& path, const RecordFile& file);
RecordFile load_records(const std::filesystem::path& path);

// Writes text atomically (temporary file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

// Parses the audit line written by audit_line(); nullopt if absent.
std::optional<AuditInfo> parse_audit_line(const std::string& line);

}  // namespace bperc

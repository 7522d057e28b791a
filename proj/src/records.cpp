#include "bperc/records.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bperc/errors.hpp"

namespace bperc {

Record& Record::set(const std::string& key, std::vector<std::string> vals) {
  if (key.empty() || key.find_first_of(" \t\n") != std::string::npos)
    fail(ErrorCode::domain, "record key must be a single token");
  for (const auto& v : vals)
    if (v.empty() || v.find_first_of(" \t\n") != std::string::npos)
      fail(ErrorCode::domain, "record value for '" + key + "' must be a single token");
  for (auto& f : fields) {
    if (f.first == key) {
      f.second = std::move(vals);
      return *this;
    }
  }
  fields.emplace_back(key, std::move(vals));
  return *this;
}

Record& Record::set(const std::string& key, const std::string& value) {
  return set(key, std::vector<std::string>{value});
}

Record& Record::set(const std::string& key, double value) {
  return set(key, std::vector<std::string>{format_double(value)});
}

Record& Record::set(const std::string& key, double value, double error) {
  return set(key, std::vector<std::string>{format_double(value), format_double(error)});
}

Record& Record::set_int(const std::string& key, long long value) {
  return set(key, std::vector<std::string>{std::to_string(value)});
}

bool Record::has(const std::string& key) const {
  for (const auto& f : fields)
    if (f.first == key) return true;
  return false;
}

const std::vector<std::string>& Record::values(const std::string& key) const {
  for (const auto& f : fields)
    if (f.first == key) return f.second;
  fail(ErrorCode::io, "record '" + kind + "' has no field '" + key + "'");
}

std::string Record::text(const std::string& key) const {
  const auto& v = values(key);
  if (v.empty()) fail(ErrorCode::io, "field '" + key + "' is empty");
  return v.front();
}

double Record::number(const std::string& key, std::size_t index) const {
  const auto& v = values(key);
  if (index >= v.size()) fail(ErrorCode::io, "field '" + key + "' has too few values");
  const std::string& s = v[index];
  double out = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(ErrorCode::io, "field '" + key + "': bad number '" + s + "'");
  return out;
}

long long Record::integer(const std::string& key) const {
  const std::string s = text(key);
  long long out = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(ErrorCode::io, "field '" + key + "': bad integer '" + s + "'");
  return out;
}

std::optional<double> Record::maybe_number(const std::string& key, std::size_t index) const {
  if (!has(key) || values(key).size() <= index) return std::nullopt;
  return number(key, index);
}

std::vector<const Record*> RecordFile::of_kind(const std::string& kind) const {
  std::vector<const Record*> out;
  for (const auto& r : records)
    if (r.kind == kind) out.push_back(&r);
  return out;
}

void write_records(std::ostream& out, const RecordFile& file) {
  out << "# bperc " << file.title << '\n' << audit_line(file.audit) << '\n';
  for (const auto& r : file.records) {
    out << "record " << r.kind << '\n';
    for (const auto& [key, vals] : r.fields) {
      out << key;
      for (const auto& v : vals) out << ' ' << v;
      out << '\n';
    }
    out << "end\n";
  }
}

std::optional<AuditInfo> parse_audit_line(const std::string& line) {
  if (line.rfind("# tool=", 0) != 0) return std::nullopt;
  std::istringstream in(line.substr(2));
  AuditInfo audit;
  bool have_hash = false, have_seed = false;
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "config_hash") {
      audit.config_hash = value;
      have_hash = true;
    } else if (key == "seed") {
      const auto res = std::from_chars(value.data(), value.data() + value.size(), audit.seed);
      have_seed = res.ec == std::errc{};
    }
  }
  if (!have_hash || !have_seed) return std::nullopt;
  return audit;
}

RecordFile read_records(std::istream& in) {
  RecordFile file;
  std::string line;
  int number = 0;
  Record* current = nullptr;
  auto error = [&](const std::string& what) {
    fail(ErrorCode::io, "record line " + std::to_string(number) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (number == 1 && line.rfind("# bperc ", 0) == 0) file.title = line.substr(8);
      if (auto a = parse_audit_line(line)) file.audit = *a;
      continue;
    }
    std::istringstream tokens(line);
    std::string key;
    tokens >> key;
    std::vector<std::string> vals;
    for (std::string v; tokens >> v;) vals.push_back(v);
    if (key == "record") {
      if (current) error("nested record");
      if (vals.size() != 1) error("record needs exactly one kind");
      file.records.push_back(Record{vals[0], {}});
      current = &file.records.back();
    } else if (key == "end") {
      if (!current) error("'end' outside a record");
      current = nullptr;
    } else {
      if (!current) error("field '" + key + "' outside a record");
      if (current->has(key)) error("duplicate field '" + key + "'");
      current->fields.emplace_back(key, std::move(vals));
    }
  }
  if (current) error("unterminated record '" + current->kind + "'");
  return file;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(ErrorCode::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

void save_records(const std::filesystem::path& path, const RecordFile& file) {
  std::ostringstream out;
  write_records(out, file);
  write_file_atomic(path, out.str());
}

RecordFile load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  try {
    return read_records(in);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace bperc

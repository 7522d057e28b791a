#include "bperc/histogram_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bperc/errors.hpp"

namespace bperc {

std::string audit_line(const AuditInfo& audit) {
  std::ostringstream out;
  out << "# tool=" << kToolName << " version=" << kToolVersion << " config_hash=" << audit.config_hash
      << " seed=" << audit.seed;
  return out.str();
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_histogram(std::ostream& out, const SpanningHistogram& hist, const AuditInfo& audit) {
  out << "# bperc spanning histogram\n" << audit_line(audit) << '\n';
  out << "L " << hist.side << '\n'
      << "model " << model_name(hist.model) << '\n'
      << "sweep " << sweep_name(hist.sweep) << '\n'
      << "spanning " << spanning_name(hist.spanning) << '\n'
      << "param " << format_double(hist.param) << '\n'
      << "replicas " << hist.replicas << '\n'
      << "seed " << hist.seed << '\n'
      << "engine " << kEngineVersion << '\n'
      << "capacity " << hist.capacity() << '\n'
      << "barrier_count " << hist.barriers.count << '\n'
      << "barrier_sum " << hist.barriers.sum << '\n'
      << "barrier_sum_sq " << hist.barriers.sum_sq << '\n';
  for (std::size_t n = 0; n < hist.counts.size(); ++n)
    if (hist.counts[n]) out << n << ' ' << hist.counts[n] << '\n';
  out << "nonspanning " << hist.nonspanning << '\n';
}

namespace {

[[noreturn]] void parse_error(int line, const std::string& what) {
  fail(ErrorCode::io, "histogram line " + std::to_string(line) + ": " + what);
}

template <class T>
T parse_number(const std::string& text, int line) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    parse_error(line, "bad number '" + text + "'");
  return value;
}

}  // namespace

SpanningHistogram read_histogram(std::istream& in) {
  SpanningHistogram hist;
  std::string line;
  int line_no = 0;
  bool have_capacity = false, have_nonspanning = false;
  std::uint64_t declared_replicas = 0;
  std::string model, sweep = "sites", spanning = "top-bottom";

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key, value, extra;
    fields >> key >> value;
    if (value.empty() || (fields >> extra)) parse_error(line_no, "expected two fields");

    if (key[0] >= '0' && key[0] <= '9') {
      if (!have_capacity) parse_error(line_no, "count line before capacity");
      const auto n = parse_number<std::size_t>(key, line_no);
      if (n >= hist.counts.size()) parse_error(line_no, "n exceeds capacity");
      hist.counts[n] += parse_number<std::uint64_t>(value, line_no);
    } else if (key == "L") {
      hist.side = parse_number<int>(value, line_no);
    } else if (key == "model") {
      model = value;
    } else if (key == "sweep") {
      sweep = value;
    } else if (key == "spanning") {
      spanning = value;
    } else if (key == "param") {
      hist.param = parse_number<double>(value, line_no);
    } else if (key == "replicas") {
      declared_replicas = parse_number<std::uint64_t>(value, line_no);
    } else if (key == "seed") {
      hist.seed = parse_number<std::uint64_t>(value, line_no);
    } else if (key == "engine") {
      if (parse_number<int>(value, line_no) != kEngineVersion) parse_error(line_no, "unsupported engine version");
    } else if (key == "capacity") {
      hist.counts.assign(parse_number<std::size_t>(value, line_no) + 1, 0);
      have_capacity = true;
    } else if (key == "barrier_count") {
      hist.barriers.count = parse_number<std::uint64_t>(value, line_no);
    } else if (key == "barrier_sum") {
      hist.barriers.sum = parse_number<std::uint64_t>(value, line_no);
    } else if (key == "barrier_sum_sq") {
      hist.barriers.sum_sq = parse_number<std::uint64_t>(value, line_no);
    } else if (key == "nonspanning") {
      hist.nonspanning = parse_number<std::uint64_t>(value, line_no);
      have_nonspanning = true;
    } else {
      parse_error(line_no, "unknown key '" + key + "'");
    }
  }

  const auto m = parse_model(model);
  const auto s = parse_sweep(sweep);
  const auto sp = parse_spanning(spanning);
  if (!m) parse_error(line_no, "missing or unknown model '" + model + "'");
  if (!s || !sp) parse_error(line_no, "bad sweep or spanning mode");
  if (!have_capacity || !have_nonspanning) parse_error(line_no, "truncated histogram");
  hist.model = *m;
  hist.sweep = *s;
  hist.spanning = *sp;

  const SpanningHistogram expected = empty_histogram(hist.side, hist.model, hist.sweep, hist.spanning,
                                                     hist.param, hist.seed);
  if (expected.counts.size() != hist.counts.size()) parse_error(line_no, "capacity does not match L");

  std::uint64_t total = hist.nonspanning;
  for (std::uint64_t c : hist.counts) total += c;
  if (total != declared_replicas) parse_error(line_no, "counts do not sum to replicas");
  hist.replicas = declared_replicas;
  return hist;
}

void save_histogram(const std::filesystem::path& path, const SpanningHistogram& hist,
                    const AuditInfo& audit) {
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + tmp.string());
    write_histogram(out, hist, audit);
    if (!out) fail(ErrorCode::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SpanningHistogram load_histogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  try {
    return read_histogram(in);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace bperc

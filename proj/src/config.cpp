#include "bperc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bperc/errors.hpp"
#include "bperc/histogram_io.hpp"

namespace bperc {

namespace {

int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.line < 0 ? 0 : mark.line + 1;
}

[[noreturn]] void bad(const std::string& field, const YAML::Node& node, const std::string& msg) {
  throw ConfigError(field, line_of(node), msg);
}

std::string scalar_text(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) bad(field, node, "expected a scalar value");
  return node.Scalar();
}

double as_double(const YAML::Node& node, const std::string& field) {
  const std::string s = scalar_text(node, field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    bad(field, node, "expected a number, got '" + s + "'");
  return v;
}

std::uint64_t as_u64(const YAML::Node& node, const std::string& field) {
  const std::string s = scalar_text(node, field);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  // Accept integral floats such as 1e5.
  double d = 0.0;
  auto [p2, e2] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (e2 == std::errc() && p2 == s.data() + s.size() && d >= 0 && d <= 9007199254740992.0 && d == std::floor(d))
    return static_cast<std::uint64_t>(d);
  bad(field, node, "expected a non-negative integer, got '" + s + "'");
}

int as_int(const YAML::Node& node, const std::string& field) {
  const std::uint64_t v = as_u64(node, field);
  if (v > 1000000) bad(field, node, "value too large");
  return static_cast<int>(v);
}

BarrierModel as_model(const YAML::Node& node, const std::string& field) {
  const std::string s = scalar_text(node, field);
  if (auto m = parse_model(s)) return *m;
  bad(field, node, "unknown model '" + s + "'");
}

void check_keys(const YAML::Node& map, const std::string& prefix, std::initializer_list<const char*> known) {
  if (!map.IsMap()) bad(prefix, map, "expected a mapping");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      const std::string field = prefix.empty() ? key : prefix + "." + key;
      bad(field, kv.first, "unknown key");
    }
  }
}

std::vector<double> expand_range(const YAML::Node& node, BarrierModel model) {
  check_keys(node, "param_range", {"start", "stop", "step"});
  const double start = node["start"] ? as_double(node["start"], "param_range.start") : 0.0;
  const double stop = node["stop"] ? as_double(node["stop"], "param_range.stop") : 0.5;
  const double step = node["step"] ? as_double(node["step"], "param_range.step") : default_param_step(model);
  if (!(step > 0)) bad("param_range.step", node, "step must be positive");
  if (stop < start) bad("param_range.stop", node, "stop must not be below start");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) {
    // Round to 12 digits so 0.1 + 0.05 * 2 prints as 0.2.
    const double v = std::round((start + step * static_cast<double>(k)) * 1e12) / 1e12;
    out.push_back(v);
  }
  return out;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

double default_param_step(BarrierModel model) { return closes_two_bonds(model) ? 0.025 : 0.05; }

CampaignConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("<syntax>", e.mark.line < 0 ? 0 : e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) throw ConfigError("<root>", line_of(root), "configuration must be a mapping");
  check_keys(root, "", {"model", "sizes", "params", "param_range", "replicas", "seed", "sweep", "spanning",
                        "epsilon", "chi_grid", "cost", "snapshot", "output", "workers"});

  CampaignConfig cfg;
  if (!root["model"]) throw ConfigError("model", 0, "required key missing");
  cfg.model = as_model(root["model"], "model");

  if (const auto n = root["sizes"]) {
    if (!n.IsSequence() || n.size() == 0) bad("sizes", n, "expected a non-empty list of lattice sides");
    cfg.sizes.clear();
    for (const auto& item : n) {
      const int side = as_int(item, "sizes");
      if (side < 2) bad("sizes", item, "lattice side must be at least 2");
      if (!cfg.sizes.empty() && side <= cfg.sizes.back()) bad("sizes", item, "sizes must be strictly ascending");
      cfg.sizes.push_back(side);
    }
  }

  if (root["params"] && root["param_range"]) bad("param_range", root["param_range"], "give either params or param_range");
  if (const auto n = root["params"]) {
    if (!n.IsSequence() || n.size() == 0) bad("params", n, "expected a non-empty list");
    for (const auto& item : n) {
      const double v = as_double(item, "params");
      if (v < 0.0 || v > 1.0) bad("params", item, "value must lie in [0, 1]");
      cfg.params.push_back(v);
    }
  } else if (const auto r = root["param_range"]) {
    cfg.params = expand_range(r, cfg.model);
  } else {
    cfg.params = expand_range(YAML::Node(YAML::NodeType::Map), cfg.model);
  }
  for (double v : cfg.params)
    if (v < 0.0 || v > 1.0) bad("param_range", root["param_range"], "range leaves [0, 1]");
  {
    std::set<double> seen;
    for (double v : cfg.params)
      if (!seen.insert(v).second) bad("params", root["params"], "duplicate value " + format_double(v));
  }

  if (const auto n = root["replicas"]) {
    cfg.replicas = as_u64(n, "replicas");
    if (cfg.replicas < 1) bad("replicas", n, "need at least one replica");
  }
  if (const auto n = root["seed"]) cfg.seed = as_u64(n, "seed");
  if (const auto n = root["sweep"]) {
    const std::string s = scalar_text(n, "sweep");
    const auto k = parse_sweep(s);
    if (!k) bad("sweep", n, "expected 'sites' or 'bonds'");
    cfg.sweep = *k;
    if (cfg.sweep == SweepKind::bonds && cfg.model != BarrierModel::joint_site_bond)
      bad("sweep", n, "bond sweeps require model 'joint'");
  }
  if (const auto n = root["spanning"]) {
    const auto k = parse_spanning(scalar_text(n, "spanning"));
    if (!k) bad("spanning", n, "expected 'top-bottom' or 'either'");
    cfg.spanning = *k;
  }
  if (const auto n = root["epsilon"]) {
    cfg.threshold.epsilon = as_double(n, "epsilon");
    if (!(cfg.threshold.epsilon > 0 && cfg.threshold.epsilon < 0.5)) bad("epsilon", n, "must lie in (0, 0.5)");
  }
  if (const auto g = root["chi_grid"]) {
    check_keys(g, "chi_grid", {"lo", "hi", "rough_points", "window_points"});
    if (g["lo"]) cfg.threshold.rough_lo = as_double(g["lo"], "chi_grid.lo");
    if (g["hi"]) cfg.threshold.rough_hi = as_double(g["hi"], "chi_grid.hi");
    if (g["rough_points"]) cfg.threshold.rough_points = as_u64(g["rough_points"], "chi_grid.rough_points");
    if (g["window_points"]) cfg.threshold.window_points = as_u64(g["window_points"], "chi_grid.window_points");
    if (!(cfg.threshold.rough_lo >= 0 && cfg.threshold.rough_hi <= 1 && cfg.threshold.rough_lo < cfg.threshold.rough_hi))
      bad("chi_grid", g, "need 0 <= lo < hi <= 1");
    if (cfg.threshold.rough_points < 5) bad("chi_grid.rough_points", g, "need at least 5 points");
    if (cfg.threshold.window_points < 3) bad("chi_grid.window_points", g, "need at least 3 points");
  }
  if (const auto c = root["cost"]) {
    check_keys(c, "cost", {"lo", "hi", "points"});
    if (c["lo"]) cfg.cost_lo = as_double(c["lo"], "cost.lo");
    if (c["hi"]) cfg.cost_hi = as_double(c["hi"], "cost.hi");
    if (c["points"]) cfg.cost_points = as_u64(c["points"], "cost.points");
    if (!(cfg.cost_lo < cfg.cost_hi && cfg.cost_hi <= 1.0)) bad("cost", c, "need lo < hi <= 1");
    if (cfg.cost_points < 2) bad("cost.points", c, "need at least 2 points");
  }
  if (const auto s = root["snapshot"]) {
    check_keys(s, "snapshot", {"side", "chi", "q_b", "p_d", "models"});
    if (s["side"]) {
      cfg.snapshot.side = as_int(s["side"], "snapshot.side");
      if (cfg.snapshot.side < 2) bad("snapshot.side", s["side"], "lattice side must be at least 2");
    }
    if (s["chi"]) cfg.snapshot.chi = as_double(s["chi"], "snapshot.chi");
    if (cfg.snapshot.chi < 0 || cfg.snapshot.chi > 1) bad("snapshot.chi", s, "must lie in [0, 1]");
    if (s["q_b"] && s["p_d"]) bad("snapshot.p_d", s["p_d"], "give either q_b or p_d");
    if (s["p_d"]) {
      cfg.snapshot.q_b.reset();
      cfg.snapshot.p_d = as_double(s["p_d"], "snapshot.p_d");
      if (*cfg.snapshot.p_d < 0 || *cfg.snapshot.p_d > 1) bad("snapshot.p_d", s["p_d"], "must lie in [0, 1]");
    }
    if (s["q_b"]) {
      cfg.snapshot.q_b = as_double(s["q_b"], "snapshot.q_b");
      if (*cfg.snapshot.q_b < 0 || *cfg.snapshot.q_b > 1) bad("snapshot.q_b", s["q_b"], "must lie in [0, 1]");
    }
    if (const auto m = s["models"]) {
      if (!m.IsSequence()) bad("snapshot.models", m, "expected a list");
      for (const auto& item : m) {
        if (item.IsScalar() && item.Scalar() == "all") {
          cfg.snapshot.models.assign(kAllModels.begin(), kAllModels.end());
          continue;
        }
        cfg.snapshot.models.push_back(as_model(item, "snapshot.models"));
      }
    }
  }
  if (const auto n = root["output"]) cfg.output = scalar_text(n, "output");
  if (const auto n = root["workers"]) {
    const std::uint64_t w = as_u64(n, "workers");
    if (w < 1 || w > 4096) bad("workers", n, "must lie in [1, 4096]");
    cfg.workers = static_cast<unsigned>(w);
  }
  return cfg;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", 0, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate_config(const CampaignConfig& config) {
  if (config.sizes.empty()) throw ConfigError("sizes", 0, "no lattice sizes");
  for (std::size_t k = 0; k < config.sizes.size(); ++k) {
    if (config.sizes[k] < 2) throw ConfigError("sizes", 0, "lattice side must be at least 2");
    if (k > 0 && config.sizes[k] <= config.sizes[k - 1]) throw ConfigError("sizes", 0, "sizes must be strictly ascending");
  }
  if (config.params.empty()) throw ConfigError("params", 0, "no parameter values");
  for (double p : config.params)
    if (!(p >= 0 && p <= 1)) throw ConfigError("params", 0, "value must lie in [0, 1]");
  if (config.replicas < 1) throw ConfigError("replicas", 0, "need at least one replica");
  if (config.sweep == SweepKind::bonds && config.model != BarrierModel::joint_site_bond)
    throw ConfigError("sweep", 0, "bond sweeps require model 'joint'");
  if (!(config.threshold.epsilon > 0 && config.threshold.epsilon < 0.5))
    throw ConfigError("epsilon", 0, "must lie in (0, 0.5)");
  if (config.workers < 1) throw ConfigError("workers", 0, "need at least one worker");
}

std::string CampaignConfig::canonical() const {
  std::ostringstream out;
  out << "model=" << model_name(model) << '\n';
  out << "sizes=";
  for (std::size_t k = 0; k < sizes.size(); ++k) out << (k ? "," : "") << sizes[k];
  out << "\nparams=";
  for (std::size_t k = 0; k < params.size(); ++k) out << (k ? "," : "") << format_double(params[k]);
  out << "\nreplicas=" << replicas << "\nseed=" << seed << "\nsweep=" << sweep_name(sweep)
      << "\nspanning=" << spanning_name(spanning) << "\nepsilon=" << format_double(threshold.epsilon)
      << "\nchi_grid=" << format_double(threshold.rough_lo) << ',' << format_double(threshold.rough_hi) << ','
      << threshold.rough_points << ',' << threshold.window_points << "\ncost=" << format_double(cost_lo) << ','
      << format_double(cost_hi) << ',' << cost_points << "\nsnapshot=" << snapshot.side << ','
      << format_double(snapshot.chi) << ',';
  if (snapshot.q_b) out << "q_b:" << format_double(*snapshot.q_b);
  if (snapshot.p_d) out << "p_d:" << format_double(*snapshot.p_d);
  for (BarrierModel m : snapshot.models) out << ',' << model_name(m);
  out << "\nengine=" << kEngineVersion << '\n';
  return out.str();
}

std::string CampaignConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
  return buf;
}

}  // namespace bperc

#include "bperc/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "bperc/costmodel.hpp"
#include "bperc/errors.hpp"
#include "bperc/fitting.hpp"
#include "bperc/records.hpp"

namespace bperc {

namespace fs = std::filesystem;

namespace {

void say(const CommandOptions& opts, const std::string& line) {
  if (opts.log) *opts.log << line << '\n';
}

AuditInfo audit_of(const CampaignConfig& cfg, const CommandOptions& opts) {
  AuditInfo a;
  a.config_hash = opts.config_path ? cfg.hash() : "none";
  a.seed = cfg.seed;
  return a;
}

std::string header(const std::string& title, const AuditInfo& audit) {
  return "# bperc " + title + "\n" + audit_line(audit) + "\n";
}

std::string curve_filename(int side, double param) {
  return "L" + std::to_string(side) + "_p" + format_double(param) + ".curve";
}

// Parses "L<side>_p<param>.hist".
std::optional<std::pair<int, double>> parse_histogram_name(const std::string& name) {
  if (name.size() < 8 || name[0] != 'L' || !name.ends_with(".hist")) return std::nullopt;
  const auto us = name.find("_p");
  if (us == std::string::npos) return std::nullopt;
  int side = 0;
  double param = 0;
  const char* b = name.data();
  if (auto r = std::from_chars(b + 1, b + us, side); r.ec != std::errc{} || r.ptr != b + us) return std::nullopt;
  const char* e = b + name.size() - 5;
  if (auto r = std::from_chars(b + us + 2, e, param); r.ec != std::errc{} || r.ptr != e) return std::nullopt;
  return std::make_pair(side, param);
}

struct Cell {
  int side;
  double param;
};

bool same_campaign(const SpanningHistogram& h, const CampaignConfig& cfg, int side, double param) {
  return h.side == side && h.model == cfg.model && h.sweep == cfg.sweep && h.spanning == cfg.spanning &&
         double_bits(h.param) == double_bits(param) && h.seed == cfg.seed;
}

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

}  // namespace

CampaignConfig effective_config(const CommandOptions& options) {
  CampaignConfig cfg;
  if (options.config_path) cfg = load_config(*options.config_path);
  if (options.seed) cfg.seed = *options.seed;
  if (options.workers) cfg.workers = *options.workers;
  if (options.out) cfg.output = options.out->string();
  if (!options.config_path && cfg.params.empty()) cfg.params = {0.0};
  validate_config(cfg);
  return cfg;
}

fs::path output_directory(const CampaignConfig& config, const CommandOptions& options) {
  return options.out ? *options.out : fs::path(config.output);
}

std::string histogram_filename(int side, double param) {
  return "L" + std::to_string(side) + "_p" + format_double(param) + ".hist";
}

void write_curve(std::ostream& out, const PercolationCurve& curve, double param, const AuditInfo& audit) {
  out << header("percolation curve", audit);
  out << "# L " << curve.side << " param " << format_double(param) << '\n';
  out << "# chi P\n";
  for (std::size_t k = 0; k < curve.size(); ++k)
    out << format_double(curve.chi[k]) << ' ' << format_double(curve.P[k]) << '\n';
}

PercolationCurve read_curve(std::istream& in) {
  PercolationCurve curve;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream t(line.substr(1));
      std::string key;
      if (t >> key && key == "L") t >> curve.side;
      continue;
    }
    std::istringstream t(line);
    std::string a, b, extra;
    if (!(t >> a >> b) || (t >> extra))
      fail(ErrorCode::io, "curve line " + std::to_string(number) + ": expected 'chi P'");
    double chi = 0, p = 0;
    auto r1 = std::from_chars(a.data(), a.data() + a.size(), chi);
    auto r2 = std::from_chars(b.data(), b.data() + b.size(), p);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != a.data() + a.size() || r2.ptr != b.data() + b.size())
      fail(ErrorCode::io, "curve line " + std::to_string(number) + ": bad number");
    curve.chi.push_back(chi);
    curve.P.push_back(p);
  }
  return curve;
}

CommandReport cmd_validate_config(const CommandOptions& options) {
  if (!options.config_path) throw ConfigError("--config", 0, "validate-config needs --config");
  const CampaignConfig cfg = effective_config(options);
  say(options, cfg.canonical() + "hash=" + cfg.hash());
  return {};
}

CommandReport cmd_simulate(const CommandOptions& options) {
  if (!options.config_path) throw ConfigError("--config", 0, "simulate needs --config");
  const CampaignConfig cfg = effective_config(options);
  const fs::path dir = output_directory(cfg, options) / "histograms";
  fs::create_directories(dir);
  const AuditInfo audit = audit_of(cfg, options);

  CommandReport report;
  for (int side : cfg.sizes) {
    for (double param : cfg.params) {
      const fs::path path = dir / histogram_filename(side, param);
      CampaignParams cp;
      cp.side = side;
      cp.model = cfg.model;
      cp.param = param;
      cp.sweep = cfg.sweep;
      cp.spanning = cfg.spanning;
      cp.seed = cfg.seed;
      cp.workers = cfg.workers;
      cp.replicas = cfg.replicas;

      std::optional<SpanningHistogram> existing;
      if (fs::exists(path) && !options.force) {
        existing = load_histogram(path);
        if (!same_campaign(*existing, cfg, side, param) || existing->replicas > cfg.replicas)
          fail(ErrorCode::io, path.string() + " belongs to a different campaign; rerun with --force to overwrite");
        if (existing->replicas == cfg.replicas) {
          ++report.skipped;
          say(options, "skip " + path.filename().string() + " (complete)");
          continue;
        }
        // Resume: replica streams are indexed, so topping up is exact.
        cp.first_replica = existing->replicas;
        cp.replicas = cfg.replicas - existing->replicas;
      }
      SpanningHistogram h = run_campaign(cp);
      if (existing) {
        existing->merge(h);
        h = std::move(*existing);
      }
      save_histogram(path, h, audit);
      report.written.push_back(path);
      say(options, "wrote " + path.filename().string() + " replicas=" + std::to_string(h.replicas) +
                       " nonspanning=" + std::to_string(h.nonspanning));
    }
  }
  return report;
}

CommandReport cmd_analyze(const CommandOptions& options) {
  const CampaignConfig cfg = effective_config(options);
  const fs::path out = output_directory(cfg, options);
  const fs::path hist_dir = out / "histograms";
  const AuditInfo audit = audit_of(cfg, options);

  std::vector<Cell> cells;
  if (options.config_path) {
    std::vector<std::string> missing;
    for (int side : cfg.sizes)
      for (double param : cfg.params) {
        cells.push_back({side, param});
        if (!fs::exists(hist_dir / histogram_filename(side, param)))
          missing.push_back((hist_dir / histogram_filename(side, param)).string());
      }
    if (!missing.empty()) {
      std::string msg = "missing " + std::to_string(missing.size()) + " histogram file(s):";
      for (const auto& m : missing) msg += "\n  " + m;
      fail(ErrorCode::io, msg);
    }
  } else {
    if (!fs::is_directory(hist_dir)) fail(ErrorCode::io, "no histogram directory " + hist_dir.string());
    for (const auto& entry : fs::directory_iterator(hist_dir))
      if (auto c = parse_histogram_name(entry.path().filename().string())) cells.push_back({c->first, c->second});
    if (cells.empty()) fail(ErrorCode::io, "no histogram files in " + hist_dir.string());
    std::sort(cells.begin(), cells.end(),
              [](const Cell& a, const Cell& b) { return a.param != b.param ? a.param < b.param : a.side < b.side; });
  }

  CommandReport report;
  RecordFile thresholds{"thresholds", audit, {}};
  std::map<double, std::vector<const Record*>> by_param;
  std::map<double, std::optional<BarrierFraction>> barrier_by_param;
  std::map<double, int> barrier_side;
  std::optional<BarrierModel> model;
  std::optional<SweepKind> sweep;

  thresholds.records.reserve(cells.size());
  for (const Cell& c : cells) {
    const fs::path hpath = hist_dir / histogram_filename(c.side, c.param);
    const SpanningHistogram h = load_histogram(hpath);
    if (model && (*model != h.model || *sweep != h.sweep))
      fail(ErrorCode::io, hpath.string() + ": histograms mix models or sweep kinds");
    model = h.model;
    sweep = h.sweep;

    Record r{"threshold", {}};
    r.set_int("L", c.side);
    r.set("param", c.param);
    r.set("model", std::string(model_name(h.model)));
    r.set("sweep", std::string(sweep_name(h.sweep)));
    r.set_int("replicas", static_cast<long long>(h.replicas));
    r.set_int("nonspanning", static_cast<long long>(h.nonspanning));
    if (h.barriers.count > 0) {
      const BarrierFraction qb = effective_barrier_fraction(h);
      r.set("q_b", qb.value, qb.standard_error);
      if (!barrier_side.count(c.param) || c.side > barrier_side[c.param]) {
        barrier_side[c.param] = c.side;
        barrier_by_param[c.param] = qb;
      }
    }
    try {
      const ThresholdEstimate est = estimate_threshold(cumulative(h), h.side, cfg.threshold);
      r.set("status", "ok");
      r.set("chi_cL", est.refined.chi_cL);
      r.set("delta", est.refined.delta);
      r.set("rough", est.rough.chi_cL_star, est.rough.delta_star);
      r.set("window", est.rough.window.lo, est.rough.window.hi);
      r.set_int("logit_points", static_cast<long long>(est.refined.points));

      std::ostringstream text;
      write_curve(text, est.rough_curve, c.param, audit);
      const fs::path cpath = out / "curves" / curve_filename(c.side, c.param);
      write_file_atomic(cpath, text.str());
      report.written.push_back(cpath);
    } catch (const Error& e) {
      r.set("status", error_code_name(e.code()));
      std::string msg = e.what();
      for (char& ch : msg)
        if (ch == ' ' || ch == '\t' || ch == '\n') ch = '_';
      r.set("reason", msg.empty() ? std::string("-") : msg);
      const std::string line = "L=" + std::to_string(c.side) + " param=" + format_double(c.param) + ": " +
                               error_code_name(e.code()) + " (" + e.what() + ")";
      if (e.code() == ErrorCode::threshold_not_reached)
        report.notes.push_back(line);
      else
        report.warnings.push_back(line);
      say(options, line);
    }
    thresholds.records.push_back(std::move(r));
  }
  for (const Record& r : thresholds.records) by_param[r.number("param")].push_back(&r);

  RecordFile fss{"finite-size scaling", audit, {}};
  for (const auto& [param, recs] : by_param) {
    Record f{"fss", {}};
    f.set("param", param);
    if (auto it = barrier_by_param.find(param); it != barrier_by_param.end() && it->second)
      f.set("q_b", it->second->value, it->second->standard_error);

    bool not_reached = false;
    std::vector<ScalingPoint> chis, widths;
    for (const Record* r : recs) {
      const std::string status = r->text("status");
      if (status == "THRESHOLD_NOT_REACHED") not_reached = true;
      if (status != "ok") continue;
      const double side = static_cast<double>(r->integer("L"));
      chis.push_back({side, r->number("chi_cL")});
      widths.push_back({side, r->number("delta")});
    }
    f.set_int("sizes", static_cast<long long>(chis.size()));
    if (!chis.empty()) f.set("chi_cL_largest", chis.back().value);
    if (not_reached) {
      f.set("status", "THRESHOLD_NOT_REACHED");
      report.notes.push_back("param=" + format_double(param) + ": THRESHOLD_NOT_REACHED, excluded from curve fits");
      fss.records.push_back(std::move(f));
      continue;
    }
    try {
      const FssFit fit = fit_threshold_scaling(chis);
      f.set("status", fit.poor_scaling ? "poor_scaling" : "ok");
      f.set("chi_c", fit.chi_c_inf, fit.chi_c_se);
      f.set("alpha", fit.alpha);
      f.set("amplitude", fit.amplitude);
      f.set("r_squared", fit.r_squared);
      if (fit.poor_scaling)
        report.warnings.push_back("param=" + format_double(param) + ": poor threshold scaling, R^2=" +
                                  format_double(fit.r_squared));
    } catch (const Error& e) {
      f.set("status", error_code_name(e.code()));
      report.warnings.push_back("param=" + format_double(param) + ": " + e.what());
    }
    try {
      const WidthScalingFit w = fit_width_scaling(widths);
      f.set("nu", w.nu, w.nu_se);
      f.set_int("nu_low_confidence", w.low_confidence ? 1 : 0);
    } catch (const Error&) {
    }
    fss.records.push_back(std::move(f));
  }

  save_records(out / "thresholds.txt", thresholds);
  save_records(out / "fss.txt", fss);
  report.written.push_back(out / "thresholds.txt");
  report.written.push_back(out / "fss.txt");
  for (const auto& w : report.warnings) say(options, "warning: " + w);
  return report;
}

namespace {

std::string table(const std::string& title, const AuditInfo& audit, const std::string& extra,
                  const std::string& columns, const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  out << header(title, audit);
  if (!extra.empty()) out << extra;
  out << "# " << columns << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << fmt(row[k]);
    out << '\n';
  }
  return out.str();
}

Record qexp_record(BarrierModel model, const QExpFit& f, std::size_t points, const std::string& source) {
  Record r{"qexp", {}};
  r.set("model", std::string(model_name(model)));
  r.set("source", source);
  r.set("lambda", f.lambda, f.lambda_se);
  r.set("q", f.q, f.q_se);
  r.set("p_cs", f.p_cs);
  r.set("residual_norm", f.residual_norm);
  r.set_int("points", static_cast<long long>(points));
  return r;
}

Record power_record(BarrierModel model, const PowerLawFit& f, std::size_t points, const std::string& source) {
  Record r{"power_law", {}};
  r.set("model", std::string(model_name(model)));
  r.set("source", source);
  r.set("sigma", f.sigma, f.sigma_se);
  r.set("tau", f.tau, f.tau_se);
  r.set("residual_norm", f.residual_norm);
  r.set_int("points", static_cast<long long>(points));
  return r;
}

std::string cost_table(BarrierModel model, const QExpFit& qexp, const PowerLawFit& power, const CampaignConfig& cfg,
                       const AuditInfo& audit, const std::string& source) {
  const CostCurve curve = cost_curve(qexp, power, cfg.cost_lo, cfg.cost_hi, cfg.cost_points);
  std::vector<std::vector<double>> rows;
  for (const CostResult& c : curve.rows) rows.push_back({c.chi_c, c.q_b_model, c.eta, c.eta_se, c.q_b_joint});
  std::ostringstream extra;
  extra << "# model " << model_name(model) << " parameters " << source << " lambda " << format_double(qexp.lambda)
        << " q " << format_double(qexp.q) << " sigma " << format_double(power.sigma) << " tau "
        << format_double(power.tau) << '\n'
        << "# skipped " << curve.skipped << " grid points with p_d > 1\n";
  return table("relative cost", audit, extra.str(), "chi_c q_b eta eta_se q_b_joint", rows);
}

}  // namespace

CommandReport cmd_curves(const CommandOptions& options) {
  const CampaignConfig cfg = effective_config(options);
  const fs::path out = output_directory(cfg, options);
  const AuditInfo audit = audit_of(cfg, options);
  const RecordFile fss = load_records(out / "fss.txt");
  CommandReport report;

  struct Row {
    double param;
    std::optional<double> chi, chi_se, qb, qb_se;
  };
  std::vector<Row> rows;
  for (const Record* r : fss.of_kind("fss")) {
    Row row{r->number("param"), {}, {}, {}, {}};
    const std::string status = r->text("status");
    if ((status == "ok" || status == "poor_scaling") && r->has("chi_c")) {
      row.chi = r->number("chi_c");
      row.chi_se = r->number("chi_c", 1);
    }
    row.qb = r->maybe_number("q_b");
    row.qb_se = r->maybe_number("q_b", 1);
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.param < b.param; });

  auto emit = [&](const std::string& name, const std::string& text) {
    write_file_atomic(out / name, text);
    report.written.push_back(out / name);
  };
  const JointCurve joint;

  if (cfg.model == BarrierModel::joint_site_bond) {
    std::vector<std::vector<double>> t;
    double worst = 0;
    for (const Row& r : rows) {
      if (!r.chi) continue;
      if (cfg.sweep == SweepKind::bonds) {
        // param = p_s, measured threshold = p_b.
        double expected = std::nan("");
        if (r.param >= joint.p_cs) expected = joint.bond_threshold(r.param);
        if (std::isfinite(expected)) worst = std::max(worst, std::abs(*r.chi - expected));
        t.push_back({r.param, *r.chi, *r.chi_se, expected, *r.chi - expected});
      } else {
        // param = q_b, measured threshold = chi_c; invert p_b = B/(p_s + A).
        double expected = joint.b() / (1.0 - r.param) - joint.a();
        if (!(expected >= joint.p_cs && expected <= 1.0)) expected = std::nan("");
        if (std::isfinite(expected)) worst = std::max(worst, std::abs(*r.chi - expected));
        t.push_back({r.param, *r.chi, *r.chi_se, expected, *r.chi - expected});
      }
    }
    if (t.empty()) fail(ErrorCode::insufficient_data, "no extrapolated thresholds in fss.txt");
    const bool bonds = cfg.sweep == SweepKind::bonds;
    emit("joint.txt", table(bonds ? "joint critical curve (bond sweep)" : "joint critical curve (site sweep)", audit,
                            "# max_abs_diff " + format_double(worst) + "\n",
                            bonds ? "p_s p_b p_b_se p_b_joint_curve diff" : "q_b chi_c chi_c_se chi_c_joint_curve diff",
                            t));
    RecordFile params{"fit parameters", audit, {}};
    Record r{"joint_curve", {}};
    r.set("sweep", std::string(sweep_name(cfg.sweep)));
    r.set("max_abs_diff", worst);
    r.set_int("points", static_cast<long long>(t.size()));
    params.records.push_back(r);
    save_records(out / "params.txt", params);
    report.written.push_back(out / "params.txt");
    return report;
  }

  std::vector<CurvePoint> chi_points, qb_points;
  for (const Row& r : rows) {
    if (r.chi) chi_points.push_back({r.param, *r.chi, r.chi_se.value_or(0.0)});
    if (r.qb && r.param > 0) qb_points.push_back({r.param, *r.qb, r.qb_se.value_or(0.0)});
  }
  if (chi_points.size() < 4)
    fail(ErrorCode::insufficient_data, "q-exponential fit needs at least four extrapolated thresholds, have " +
                                           std::to_string(chi_points.size()));
  if (qb_points.size() < 3)
    fail(ErrorCode::insufficient_data, "power-law fit needs at least three p_d > 0 points");

  const QExpFit qexp = fit_qexp_curve(chi_points);
  const PowerLawFit power = fit_power_law(qb_points);
  for (double se : {qexp.lambda_se, qexp.q_se, power.sigma_se, power.tau_se})
    if (!std::isfinite(se)) report.warnings.push_back("non-finite parameter standard error");

  RecordFile params{"fit parameters", audit, {}};
  params.records.push_back(qexp_record(cfg.model, qexp, chi_points.size(), "fit"));
  params.records.push_back(power_record(cfg.model, power, qb_points.size(), "fit"));
  save_records(out / "params.txt", params);
  report.written.push_back(out / "params.txt");

  std::vector<std::vector<double>> a, b, c;
  for (const CurvePoint& p : chi_points) a.push_back({p.x, p.y, p.error, qexp.critical_susceptibility(p.x)});
  for (const CurvePoint& p : qb_points) b.push_back({p.x, p.y, p.error, power.evaluate(p.x)});
  for (const Row& r : rows) {
    if (!r.chi) continue;
    const double qb = r.qb.value_or(0.0);
    const double model_chi = qexp.critical_susceptibility(r.param);
    double joint_chi = joint.b() / (1.0 - qb) - joint.a();
    if (!(joint_chi >= joint.p_cs && joint_chi <= 1.0)) joint_chi = std::nan("");
    c.push_back({qb, *r.chi, r.chi_se.value_or(0.0), model_chi, joint_chi});
  }
  emit("fig3a.txt", table("critical susceptibility vs p_d", audit, "", "p_d chi_c chi_c_se chi_c_qexp", a));
  emit("fig3b.txt", table("effective barrier fraction vs p_d", audit, "", "p_d q_b q_b_se q_b_power_law", b));
  emit("fig3c.txt", table("critical susceptibility vs q_b", audit, "", "q_b chi_c chi_c_se chi_c_qexp chi_c_joint_curve", c));
  emit("cost_" + std::string(model_name(cfg.model)) + ".txt", cost_table(cfg.model, qexp, power, cfg, audit, "fit"));
  for (const auto& w : report.warnings) say(options, "warning: " + w);
  return report;
}

CommandReport cmd_cost(const CommandOptions& options) {
  const CampaignConfig cfg = effective_config(options);
  const fs::path out = output_directory(cfg, options);
  const AuditInfo audit = audit_of(cfg, options);
  CommandReport report;

  std::vector<BarrierModel> models;
  if (options.config_path) {
    if (cfg.model == BarrierModel::joint_site_bond)
      throw ConfigError("model", 0, "the joint model is the cost baseline; choose a barrier model");
    models.push_back(cfg.model);
  } else {
    for (BarrierModel m : kAllModels)
      if (m != BarrierModel::joint_site_bond) models.push_back(m);
  }

  std::optional<RecordFile> fitted;
  if (options.config_path && fs::exists(out / "params.txt")) fitted = load_records(out / "params.txt");

  for (BarrierModel m : models) {
    StrategyParameters p = *reference_parameters(m);
    std::string source = "reference";
    if (fitted) {
      const Record* qe = nullptr;
      const Record* pw = nullptr;
      for (const Record* r : fitted->of_kind("qexp"))
        if (r->text("model") == model_name(m)) qe = r;
      for (const Record* r : fitted->of_kind("power_law"))
        if (r->text("model") == model_name(m)) pw = r;
      if (qe && pw) {
        p.qexp.lambda = qe->number("lambda");
        p.qexp.lambda_se = qe->number("lambda", 1);
        p.qexp.q = qe->number("q");
        p.qexp.q_se = qe->number("q", 1);
        p.qexp.p_cs = qe->number("p_cs");
        p.power.sigma = pw->number("sigma");
        p.power.sigma_se = pw->number("sigma", 1);
        p.power.tau = pw->number("tau");
        p.power.tau_se = pw->number("tau", 1);
        source = "fit";
      }
    }
    const fs::path path = out / ("cost_" + std::string(model_name(m)) + ".txt");
    write_file_atomic(path, cost_table(m, p.qexp, p.power, cfg, audit, source));
    report.written.push_back(path);
    say(options, "wrote " + path.string() + " (" + source + " parameters)");
  }
  return report;
}

SnapshotTarget snapshot_parameter(BarrierModel model, double q_b) {
  if (!(q_b >= 0.0 && q_b <= 1.0)) fail(ErrorCode::domain, "q_b must lie in [0, 1]");
  if (model == BarrierModel::joint_site_bond) return {q_b, false, q_b};
  const PowerLawFit power = reference_parameters(model)->power;
  const double p_d = std::pow(q_b / power.sigma, 1.0 / power.tau);
  if (p_d > 1.0) return {1.0, true, p_d};
  return {p_d, false, p_d};
}

CommandReport cmd_snapshot(const CommandOptions& options) {
  CampaignConfig cfg = effective_config(options);
  const fs::path out = output_directory(cfg, options);
  const AuditInfo audit = audit_of(cfg, options);
  CommandReport report;

  std::vector<BarrierModel> models = cfg.snapshot.models;
  if (models.empty()) {
    if (options.config_path)
      models.push_back(cfg.model);
    else
      models.assign(kAllModels.begin(), kAllModels.end());
  }

  for (BarrierModel m : models) {
    SnapshotParams sp;
    sp.side = cfg.snapshot.side;
    sp.model = m;
    sp.chi = cfg.snapshot.chi;
    sp.seed = cfg.seed;
    sp.spanning = cfg.spanning;
    std::ostringstream extra;
    extra << "# model " << model_name(m) << " L " << sp.side << " chi " << format_double(sp.chi);
    if (cfg.snapshot.p_d) {
      if (m == BarrierModel::joint_site_bond)
        throw ConfigError("snapshot.p_d", 0, "the joint model takes q_b, not p_d");
      sp.param = *cfg.snapshot.p_d;
      extra << " p_d " << format_double(sp.param);
    } else {
      const double target = cfg.snapshot.q_b.value_or(0.475);
      const SnapshotTarget t = snapshot_parameter(m, target);
      sp.param = t.param;
      extra << " q_b_target " << format_double(target);
      if (m != BarrierModel::joint_site_bond) extra << " p_d " << format_double(t.param);
      if (t.clamped) {
        extra << " clamped_from " << format_double(t.unclamped);
        report.notes.push_back(std::string(model_name(m)) + ": p_d clamped to 1 (needed " +
                               format_double(t.unclamped) + ")");
      }
    }
    const Snapshot snap = snapshot_largest_cluster(sp);
    const double bonds = static_cast<double>(LatticeGeometry(sp.side).total_bonds());
    extra << "\n# q_b_realized " << format_double(static_cast<double>(snap.closed_bonds) / bonds) << " occupied "
          << snap.occupied << " largest_size " << snap.largest_size << " largest_spans "
          << (snap.largest_spans ? 1 : 0) << "\n# state 0 unoccupied, 1 other cluster, 2 largest cluster\n# i j state\n";

    std::string text = header("largest cluster snapshot", audit) + extra.str();
    const auto side = static_cast<std::size_t>(sp.side);
    text.reserve(text.size() + snap.states.size() * 10);
    for (std::size_t s = 0; s < snap.states.size(); ++s) {
      text += std::to_string(s / side);
      text += ' ';
      text += std::to_string(s % side);
      text += ' ';
      text += static_cast<char>('0' + static_cast<int>(snap.states[s]));
      text += '\n';
    }
    const fs::path path = out / ("snapshot_" + std::string(model_name(m)) + ".txt");
    write_file_atomic(path, text);
    report.written.push_back(path);
    say(options, "wrote " + path.string());
  }
  return report;
}

}  // namespace bperc

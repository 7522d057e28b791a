#include "bperc/bperc.h"

#include <cstring>
#include <iostream>
#include <new>
#include <string>
#include <vector>

#include "bperc/analysis.hpp"
#include "bperc/config.hpp"
#include "bperc/costmodel.hpp"
#include "bperc/engine.hpp"
#include "bperc/errors.hpp"
#include "bperc/fitting.hpp"
#include "bperc/histogram_io.hpp"
#include "bperc/pipeline.hpp"

struct bperc_histogram {
  bperc::SpanningHistogram h;
};

struct bperc_config {
  bperc::CampaignConfig c;
};

namespace {

thread_local std::string last_error;

bperc_status status_of(bperc::ErrorCode code) {
  using bperc::ErrorCode;
  switch (code) {
    case ErrorCode::domain: return BPERC_E_DOMAIN;
    case ErrorCode::io: return BPERC_E_IO;
    case ErrorCode::config: return BPERC_E_CONFIG;
    case ErrorCode::threshold_not_reached: return BPERC_E_THRESHOLD_NOT_REACHED;
    case ErrorCode::insufficient_data: return BPERC_E_INSUFFICIENT_DATA;
    case ErrorCode::fit_failure: return BPERC_E_FIT_FAILURE;
    case ErrorCode::out_of_range: return BPERC_E_OUT_OF_RANGE;
    case ErrorCode::undefined_ratio: return BPERC_E_UNDEFINED_RATIO;
  }
  return BPERC_E_INTERNAL;
}

bperc_status invalid(const char* what) {
  last_error = what;
  return BPERC_E_INVALID_ARGUMENT;
}

template <class F>
bperc_status guarded(F&& body) {
  try {
    body();
    return BPERC_OK;
  } catch (const bperc::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return BPERC_E_IO;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return BPERC_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return BPERC_E_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return BPERC_E_INTERNAL;
  }
}

constexpr bperc::BarrierModel kModels[] = {
    bperc::BarrierModel::sq2n_1, bperc::BarrierModel::sq2n_2, bperc::BarrierModel::sq2n_2_corners,
    bperc::BarrierModel::sq2n_2_parallels, bperc::BarrierModel::joint_site_bond};

bool valid_model(bperc_model m) { return m >= BPERC_SQ2N_1 && m <= BPERC_JOINT; }

bperc::BarrierModel to_cpp(bperc_model m) { return kModels[m]; }

bperc_model to_c(bperc::BarrierModel m) {
  for (int k = 0; k < 5; ++k)
    if (kModels[k] == m) return static_cast<bperc_model>(k);
  return BPERC_SQ2N_1;
}

bperc::QExpFit to_cpp(const bperc_qexp& q) {
  bperc::QExpFit f;
  f.lambda = q.lambda;
  f.q = q.q;
  f.lambda_se = q.lambda_se;
  f.q_se = q.q_se;
  f.p_cs = q.p_cs > 0 ? q.p_cs : bperc::kSiteThreshold;
  return f;
}

bperc::PowerLawFit to_cpp(const bperc_power_law& p) {
  bperc::PowerLawFit f;
  f.sigma = p.sigma;
  f.tau = p.tau;
  f.sigma_se = p.sigma_se;
  f.tau_se = p.tau_se;
  return f;
}

std::vector<bperc::CurvePoint> points(const double* x, const double* y, const double* err, std::size_t n) {
  std::vector<bperc::CurvePoint> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = {x[k], y[k], err ? err[k] : 0.0};
  return out;
}

std::vector<bperc::ScalingPoint> scaling(const double* sizes, const double* v, std::size_t n) {
  std::vector<bperc::ScalingPoint> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = {sizes[k], v[k]};
  return out;
}

bperc::CommandOptions to_cpp(const bperc_command_options& o) {
  bperc::CommandOptions out;
  if (o.config_path) out.config_path = o.config_path;
  if (o.out_dir) out.out = o.out_dir;
  if (o.workers > 0) out.workers = o.workers;
  if (o.has_seed) out.seed = o.seed;
  out.force = o.force != 0;
  if (o.verbose) out.log = &std::cerr;
  return out;
}

using Command = bperc::CommandReport (*)(const bperc::CommandOptions&);

bperc_status run_command(Command cmd, const bperc_command_options* options, bperc_command_result* result) {
  if (!options) return invalid("options must not be null");
  return guarded([&] {
    const bperc::CommandReport r = cmd(to_cpp(*options));
    if (options->verbose)
      for (const auto& n : r.notes) std::cerr << "note: " << n << '\n';
    if (result) {
      result->files_written = r.written.size();
      result->files_skipped = r.skipped;
      result->warnings = r.warnings.size();
      result->notes = r.notes.size();
    }
  });
}

}  // namespace

extern "C" {

const char* bperc_version(void) { return bperc::kToolVersion; }

const char* bperc_last_error(void) { return last_error.c_str(); }

const char* bperc_status_name(bperc_status status) {
  switch (status) {
    case BPERC_OK: return "ok";
    case BPERC_E_DOMAIN: return "domain_error";
    case BPERC_E_IO: return "io_error";
    case BPERC_E_CONFIG: return "config_error";
    case BPERC_E_THRESHOLD_NOT_REACHED: return "THRESHOLD_NOT_REACHED";
    case BPERC_E_INSUFFICIENT_DATA: return "insufficient_data";
    case BPERC_E_FIT_FAILURE: return "fit_failure";
    case BPERC_E_OUT_OF_RANGE: return "out_of_range";
    case BPERC_E_UNDEFINED_RATIO: return "undefined_ratio";
    case BPERC_E_INVALID_ARGUMENT: return "invalid_argument";
    case BPERC_E_INTERNAL: return "internal_error";
  }
  return "unknown";
}

bperc_status bperc_model_from_name(const char* name, bperc_model* out) {
  if (!name || !out) return invalid("null argument");
  const auto m = bperc::parse_model(name);
  if (!m) return invalid("unknown model name");
  *out = to_c(*m);
  return BPERC_OK;
}

const char* bperc_model_name(bperc_model model) {
  if (!valid_model(model)) return "unknown";
  return bperc::model_name(to_cpp(model)).data();
}

bperc_status bperc_campaign_run(const bperc_campaign_params* params, bperc_histogram** out) {
  if (!params || !out) return invalid("null argument");
  if (!valid_model(params->model)) return invalid("bad model");
  *out = nullptr;
  return guarded([&] {
    bperc::CampaignParams p;
    p.side = params->side;
    p.model = to_cpp(params->model);
    p.param = params->param;
    p.sweep = params->sweep == BPERC_SWEEP_BONDS ? bperc::SweepKind::bonds : bperc::SweepKind::sites;
    p.spanning = params->spanning == BPERC_SPAN_EITHER ? bperc::SpanningMode::either : bperc::SpanningMode::top_bottom;
    p.replicas = params->replicas;
    p.first_replica = params->first_replica;
    p.seed = params->seed;
    p.workers = params->workers ? params->workers : 1;
    *out = new bperc_histogram{bperc::run_campaign(p)};
  });
}

bperc_status bperc_histogram_merge(bperc_histogram* into, const bperc_histogram* other) {
  if (!into || !other) return invalid("null argument");
  return guarded([&] { into->h.merge(other->h); });
}

bperc_status bperc_histogram_info_get(const bperc_histogram* hist, bperc_histogram_info* out) {
  if (!hist || !out) return invalid("null argument");
  const auto& h = hist->h;
  out->side = h.side;
  out->model = to_c(h.model);
  out->sweep = h.sweep == bperc::SweepKind::bonds ? BPERC_SWEEP_BONDS : BPERC_SWEEP_SITES;
  out->spanning = h.spanning == bperc::SpanningMode::either ? BPERC_SPAN_EITHER : BPERC_SPAN_TOP_BOTTOM;
  out->param = h.param;
  out->seed = h.seed;
  out->replicas = h.replicas;
  out->nonspanning = h.nonspanning;
  out->capacity = h.capacity();
  out->barrier_count = h.barriers.count;
  out->barrier_sum = h.barriers.sum;
  out->barrier_sum_sq = h.barriers.sum_sq;
  return BPERC_OK;
}

bperc_status bperc_histogram_count(const bperc_histogram* hist, size_t n, uint64_t* out) {
  if (!hist || !out) return invalid("null argument");
  if (n >= hist->h.counts.size()) return invalid("n exceeds histogram capacity");
  *out = hist->h.counts[n];
  return BPERC_OK;
}

bperc_status bperc_histogram_equal(const bperc_histogram* a, const bperc_histogram* b, int* out) {
  if (!a || !b || !out) return invalid("null argument");
  *out = a->h == b->h ? 1 : 0;
  return BPERC_OK;
}

bperc_status bperc_histogram_save(const bperc_histogram* hist, const char* path, const char* config_hash) {
  if (!hist || !path) return invalid("null argument");
  return guarded([&] {
    bperc::AuditInfo audit;
    if (config_hash) audit.config_hash = config_hash;
    audit.seed = hist->h.seed;
    bperc::save_histogram(path, hist->h, audit);
  });
}

bperc_status bperc_histogram_load(const char* path, bperc_histogram** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new bperc_histogram{bperc::load_histogram(path)}; });
}

void bperc_histogram_free(bperc_histogram* hist) { delete hist; }

bperc_status bperc_percolation_curve(const bperc_histogram* hist, const double* chi, size_t n, double* p_out) {
  if (!hist || (n && (!chi || !p_out))) return invalid("null argument");
  return guarded([&] {
    const auto curve = bperc::percolation_probability(bperc::cumulative(hist->h), std::span<const double>(chi, n),
                                                      hist->h.side);
    std::copy(curve.P.begin(), curve.P.end(), p_out);
  });
}

bperc_status bperc_threshold_estimate(const bperc_histogram* hist, double epsilon, bperc_threshold* out) {
  if (!hist || !out) return invalid("null argument");
  return guarded([&] {
    bperc::ThresholdOptions opts;
    if (epsilon > 0) opts.epsilon = epsilon;
    const auto est = bperc::estimate_threshold(bperc::cumulative(hist->h), hist->h.side, opts);
    out->chi_cL = est.refined.chi_cL;
    out->delta = est.refined.delta;
    out->rough_chi_cL = est.rough.chi_cL_star;
    out->rough_delta = est.rough.delta_star;
    out->window_lo = est.rough.window.lo;
    out->window_hi = est.rough.window.hi;
    out->logit_points = est.refined.points;
  });
}

bperc_status bperc_barrier_fraction_get(const bperc_histogram* hist, bperc_barrier_fraction* out) {
  if (!hist || !out) return invalid("null argument");
  return guarded([&] {
    const auto f = bperc::effective_barrier_fraction(hist->h);
    out->value = f.value;
    out->standard_error = f.standard_error;
  });
}

bperc_status bperc_fit_threshold_scaling(const double* sizes, const double* chi_cL, size_t n, bperc_fss* out) {
  if (!sizes || !chi_cL || !out) return invalid("null argument");
  return guarded([&] {
    const auto fit = bperc::fit_threshold_scaling(scaling(sizes, chi_cL, n));
    out->alpha = fit.alpha;
    out->chi_c = fit.chi_c_inf;
    out->chi_c_se = fit.chi_c_se;
    out->amplitude = fit.amplitude;
    out->r_squared = fit.r_squared;
    out->poor_scaling = fit.poor_scaling ? 1 : 0;
  });
}

bperc_status bperc_fit_width_scaling(const double* sizes, const double* delta, size_t n, bperc_width_scaling* out) {
  if (!sizes || !delta || !out) return invalid("null argument");
  return guarded([&] {
    const auto fit = bperc::fit_width_scaling(scaling(sizes, delta, n));
    out->nu = fit.nu;
    out->nu_se = fit.nu_se;
    out->low_confidence = fit.low_confidence ? 1 : 0;
  });
}

bperc_status bperc_fit_qexp(const double* p_d, const double* chi_c, const double* errors, size_t n, bperc_qexp* out) {
  if (!p_d || !chi_c || !out) return invalid("null argument");
  return guarded([&] {
    const auto fit = bperc::fit_qexp_curve(points(p_d, chi_c, errors, n));
    *out = {fit.lambda, fit.q, fit.lambda_se, fit.q_se, fit.p_cs};
  });
}

bperc_status bperc_fit_power_law(const double* p_d, const double* q_b, const double* errors, size_t n,
                                 bperc_power_law* out) {
  if (!p_d || !q_b || !out) return invalid("null argument");
  return guarded([&] {
    const auto fit = bperc::fit_power_law(points(p_d, q_b, errors, n));
    *out = {fit.sigma, fit.tau, fit.sigma_se, fit.tau_se};
  });
}

bperc_status bperc_reference_parameters(bperc_model model, bperc_qexp* qexp, bperc_power_law* power) {
  if (!valid_model(model)) return invalid("bad model");
  const auto p = bperc::reference_parameters(to_cpp(model));
  if (!p) {
    last_error = "the joint model has no barrier-curve parameters";
    return BPERC_E_DOMAIN;
  }
  if (qexp) *qexp = {p->qexp.lambda, p->qexp.q, p->qexp.lambda_se, p->qexp.q_se, p->qexp.p_cs};
  if (power) *power = {p->power.sigma, p->power.tau, p->power.sigma_se, p->power.tau_se};
  return BPERC_OK;
}

bperc_status bperc_chi_of_pd(const bperc_qexp* qexp, double p_d, double* out) {
  if (!qexp || !out) return invalid("null argument");
  return guarded([&] { *out = to_cpp(*qexp).critical_susceptibility(p_d); });
}

bperc_status bperc_pd_of_chi(const bperc_qexp* qexp, double chi, double* out) {
  if (!qexp || !out) return invalid("null argument");
  return guarded([&] { *out = bperc::pd_of_chi(chi, to_cpp(*qexp)); });
}

bperc_status bperc_relative_cost(const bperc_qexp* qexp, const bperc_power_law* power, double chi, bperc_cost* out) {
  if (!qexp || !power || !out) return invalid("null argument");
  return guarded([&] {
    const auto c = bperc::relative_cost(chi, to_cpp(*qexp), to_cpp(*power));
    *out = {c.chi_c, c.q_b_model, c.q_b_joint, c.eta, c.eta_se};
  });
}

bperc_status bperc_snapshot(const bperc_snapshot_params* params, uint8_t* states, size_t n,
                            bperc_snapshot_info* info) {
  if (!params || !states) return invalid("null argument");
  if (!valid_model(params->model)) return invalid("bad model");
  if (params->side < 2 || n != static_cast<size_t>(params->side) * static_cast<size_t>(params->side))
    return invalid("states must hold side*side entries");
  return guarded([&] {
    bperc::SnapshotParams p;
    p.side = params->side;
    p.model = to_cpp(params->model);
    p.param = params->param;
    p.chi = params->chi;
    p.seed = params->seed;
    p.spanning = params->spanning == BPERC_SPAN_EITHER ? bperc::SpanningMode::either : bperc::SpanningMode::top_bottom;
    const auto snap = bperc::snapshot_largest_cluster(p);
    for (size_t k = 0; k < n; ++k) states[k] = static_cast<uint8_t>(snap.states[k]);
    if (info) *info = {snap.occupied, snap.largest_size, snap.largest_spans ? 1 : 0, snap.closed_bonds};
  });
}

bperc_status bperc_config_load(const char* path, bperc_config** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    auto cfg = bperc::load_config(path);
    bperc::validate_config(cfg);
    *out = new bperc_config{std::move(cfg)};
  });
}

bperc_status bperc_config_parse(const char* yaml_text, bperc_config** out) {
  if (!yaml_text || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    auto cfg = bperc::parse_config(yaml_text);
    bperc::validate_config(cfg);
    *out = new bperc_config{std::move(cfg)};
  });
}

bperc_status bperc_config_hash(const bperc_config* config, char* buf, size_t size) {
  if (!config || !buf) return invalid("null argument");
  const std::string h = config->c.hash();
  if (size < h.size() + 1) return invalid("buffer too small");
  std::memcpy(buf, h.c_str(), h.size() + 1);
  return BPERC_OK;
}

void bperc_config_free(bperc_config* config) { delete config; }

bperc_status bperc_cmd_simulate(const bperc_command_options* o, bperc_command_result* r) {
  return run_command(bperc::cmd_simulate, o, r);
}
bperc_status bperc_cmd_analyze(const bperc_command_options* o, bperc_command_result* r) {
  return run_command(bperc::cmd_analyze, o, r);
}
bperc_status bperc_cmd_curves(const bperc_command_options* o, bperc_command_result* r) {
  return run_command(bperc::cmd_curves, o, r);
}
bperc_status bperc_cmd_cost(const bperc_command_options* o, bperc_command_result* r) {
  return run_command(bperc::cmd_cost, o, r);
}
bperc_status bperc_cmd_snapshot(const bperc_command_options* o, bperc_command_result* r) {
  return run_command(bperc::cmd_snapshot, o, r);
}
bperc_status bperc_cmd_validate_config(const bperc_command_options* o, bperc_command_result* r) {
  return run_command(bperc::cmd_validate_config, o, r);
}

}  // extern "C"

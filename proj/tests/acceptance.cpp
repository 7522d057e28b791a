// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are pinned
// below. Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bperc/analysis.hpp"
#include "bperc/costmodel.hpp"
#include "bperc/engine.hpp"
#include "bperc/errors.hpp"
#include "bperc/fitting.hpp"
#include "bperc/lattice.hpp"
#include "bperc/pipeline.hpp"
#include "bperc/rng.hpp"
#include "bperc/union_find.hpp"

using namespace bperc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// ---- pinned tolerances and settings ----
constexpr std::uint64_t kSeed = 20251015;
const std::vector<int> kSizes = {32, 48, 64, 96, 128};
constexpr std::uint64_t kReplicas = 100000;
// pure-site campaign shared by 1, 3 and 4; alpha is not resolved at 1e5
constexpr std::uint64_t kSiteReplicas = 400000;
constexpr std::uint64_t kBondReplicas = 20000;

constexpr double kC1Target = 0.5927, kC1Tol = 0.003;
constexpr double kC2Tol = 0.01, kC2Pcb = 0.5, kC2PcbTol = 0.01;
constexpr double kC3Nu = 1.33, kC3Tol = 0.15;
constexpr double kC4Lo = -2.2, kC4Hi = -1.3;
constexpr double kC5Lambda = 0.360, kC5LambdaTol = 0.05, kC5ChiTol = 0.02;
constexpr double kC5RefQ = 0.153;
constexpr double kC6Sigma = 0.816, kC6Tau = 0.903, kC6Tol = 0.03, kC6Sigmas = 3.0;
constexpr int kC6Side = 128, kC6Draws = 2000;
constexpr double kC7Lo = -10.0, kC7Hi = -5.0, kC7At = 0.8, kC7Eta = -8.6, kC7EtaTol = 0.3;
constexpr double kC8Seconds = 60.0;

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int digits = 5) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

struct SizeEstimate {
  int side;
  double chi_cL;
  double delta;
  std::optional<BarrierFraction> q_b;
};

struct Extrapolation {
  std::vector<SizeEstimate> sizes;
  FssFit fit;
};

Extrapolation extrapolate(BarrierModel model, double param, SweepKind sweep, std::uint64_t replicas) {
  Extrapolation ex;
  std::vector<ScalingPoint> pts;
  for (int side : kSizes) {
    const auto t0 = Clock::now();
    CampaignParams p{side, model, param, sweep, SpanningMode::top_bottom, replicas, 0, kSeed, workers()};
    const SpanningHistogram h = run_campaign(p);
    const ThresholdEstimate est = estimate_threshold(cumulative(h), side);
    SizeEstimate s{side, est.refined.chi_cL, est.refined.delta, std::nullopt};
    if (h.barriers.count > 0) s.q_b = effective_barrier_fraction(h);
    ex.sizes.push_back(s);
    pts.push_back({static_cast<double>(side), s.chi_cL});
    std::fprintf(stderr, "  %s param=%g sweep=%s L=%d: chi_cL=%.6f delta=%.5f (%.1fs)\n",
                 std::string(model_name(model)).c_str(), param, std::string(sweep_name(sweep)).c_str(), side,
                 s.chi_cL, s.delta, seconds_since(t0));
  }
  ex.fit = fit_threshold_scaling(pts);
  return ex;
}

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s | %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

// ---- criteria 1, 3, 4: pure site percolation ----

std::optional<Extrapolation> site_campaign;

const Extrapolation& pure_site() {
  if (!site_campaign) site_campaign = extrapolate(BarrierModel::sq2n_1, 0.0, SweepKind::sites, kSiteReplicas);
  return *site_campaign;
}

void criterion1() {
  const auto& ex = pure_site();
  const double c = ex.fit.chi_c_inf;
  report(1, std::abs(c - kC1Target) <= kC1Tol, "pure-site threshold",
         "chi_c=" + num(c, 7) + " +- " + num(ex.fit.chi_c_se, 2) + " target " + num(kC1Target) + " +- " +
             num(kC1Tol) + " (alpha=" + num(ex.fit.alpha, 4) + ", R^2=" + num(ex.fit.r_squared, 6) + ")");
}

void criterion3() {
  const auto& ex = pure_site();
  std::vector<ScalingPoint> w;
  for (const auto& s : ex.sizes) w.push_back({static_cast<double>(s.side), s.delta});
  const WidthScalingFit f = fit_width_scaling(w);
  report(3, std::abs(f.nu - kC3Nu) <= kC3Tol && w.size() >= 4, "correlation-length exponent",
         "nu=" + num(f.nu, 4) + " +- " + num(f.nu_se, 2) + " from " + std::to_string(w.size()) +
             " sizes, target " + num(kC3Nu) + " +- " + num(kC3Tol));
}

void criterion4() {
  const auto& ex = pure_site();
  const double a = ex.fit.alpha;
  report(4, a > kC4Lo && a < kC4Hi, "convergence exponent",
         "alpha=" + num(a, 4) + " required in (" + num(kC4Lo) + ", " + num(kC4Hi) + ")");
}

// ---- criterion 2: joint model bond sweeps ----

void criterion2() {
  bool pass = true;
  std::string detail;
  double pcb = std::nan("");
  for (double ps : {0.7, 0.8, 1.0}) {
    const Extrapolation ex = extrapolate(BarrierModel::joint_site_bond, ps, SweepKind::bonds, kBondReplicas);
    const double pb = ex.fit.chi_c_inf;
    // Oracle: empirical critical curve written out directly.
    const double a = (kBondThreshold - kSiteThreshold) / (1.0 - kBondThreshold);
    const double b = kBondThreshold * (1.0 - kSiteThreshold) / (1.0 - kBondThreshold);
    const double expected = b / (ps + a);
    const double diff = pb - expected;
    pass = pass && std::abs(diff) <= kC2Tol;
    if (ps == 1.0) pcb = pb;
    detail += "p_s=" + num(ps, 2) + ": p_b=" + num(pb, 5) + " curve=" + num(expected, 5) + " diff=" + num(diff, 2) +
              "; ";
  }
  pass = pass && std::abs(pcb - kC2Pcb) <= kC2PcbTol;
  report(2, pass, "joint critical curve",
         detail + "p_cb=" + num(pcb, 5) + " target " + num(kC2Pcb) + " +- " + num(kC2PcbTol));
}

// ---- criterion 5: sq2N-1 critical curve ----

void criterion5() {
  std::vector<CurvePoint> pts;
  const auto& zero = pure_site();
  pts.push_back({0.0, zero.fit.chi_c_inf, zero.fit.chi_c_se});
  double chi05 = std::nan("");
  for (double pd : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const Extrapolation ex = extrapolate(BarrierModel::sq2n_1, pd, SweepKind::sites, kReplicas);
    pts.push_back({pd, ex.fit.chi_c_inf, ex.fit.chi_c_se});
    std::fprintf(stderr, "  p_d=%g chi_c=%.5f alpha=%.3f\n", pd, ex.fit.chi_c_inf, ex.fit.alpha);
    if (pd == 0.5) chi05 = ex.fit.chi_c_inf;
  }
  const QExpFit f = fit_qexp_curve(pts);
  // Oracle: p_cs / e_q(-lambda p_d) with the published sq2N-1 row.
  const double one_minus_q = 1.0 - kC5RefQ;
  const double predicted = kSiteThreshold / std::pow(1.0 - one_minus_q * kC5Lambda * 0.5, 1.0 / one_minus_q);
  const bool pass = std::abs(f.lambda - kC5Lambda) <= kC5LambdaTol && std::abs(chi05 - predicted) <= kC5ChiTol;
  report(5, pass, "sq2N-1 critical curve refit",
         "lambda=" + num(f.lambda, 4) + " +- " + num(f.lambda_se, 2) + " q=" + num(f.q, 3) + " target lambda " +
             num(kC5Lambda) + " +- " + num(kC5LambdaTol) + "; chi_c(0.5)=" + num(chi05, 5) + " predicted " +
             num(predicted, 5) + " +- " + num(kC5ChiTol));
}

// ---- criterion 6: barrier power law and collapse ----

struct QbPoint {
  double mean, se;
};

QbPoint measure_qb(BarrierModel model, double pd) {
  const LatticeGeometry g(kC6Side);
  BarrierAllocator alloc(g);
  BondGrid grid(g);
  double sum = 0, sum_sq = 0;
  for (int k = 0; k < kC6Draws; ++k) {
    Rng rng(derive_seed({kSeed, static_cast<std::uint64_t>(model), double_bits(pd), static_cast<std::uint64_t>(k)}));
    const double q = static_cast<double>(alloc.allocate(grid, model, pd, rng).newly_closed) /
                     static_cast<double>(g.total_bonds());
    sum += q;
    sum_sq += q * q;
  }
  const double n = kC6Draws;
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1));
  return {mean, std::sqrt(var / n)};
}

void criterion6() {
  // The grid runs in steps of 0.025 up to where the published sq2N-2 curve
  // reaches chi_c = 1.
  const double pd_max = pd_of_chi(1.0 - 1e-12, reference_parameters(BarrierModel::sq2n_2)->qexp);
  std::vector<double> grid;
  for (int k = 1; 0.025 * k <= pd_max + 1e-12; ++k) grid.push_back(0.025 * k);

  const std::array<BarrierModel, 3> models = {BarrierModel::sq2n_2, BarrierModel::sq2n_2_corners,
                                              BarrierModel::sq2n_2_parallels};
  std::map<BarrierModel, std::vector<QbPoint>> data;
  for (BarrierModel m : models)
    for (double pd : grid) data[m].push_back(measure_qb(m, pd));

  std::vector<CurvePoint> pts;
  for (std::size_t k = 0; k < grid.size(); ++k)
    pts.push_back({grid[k], data[BarrierModel::sq2n_2][k].mean, data[BarrierModel::sq2n_2][k].se});
  const PowerLawFit f = fit_power_law(pts);

  double worst_z = 0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    for (std::size_t a = 0; a < models.size(); ++a)
      for (std::size_t b = a + 1; b < models.size(); ++b) {
        const QbPoint x = data[models[a]][k], y = data[models[b]][k];
        worst_z = std::max(worst_z, std::abs(x.mean - y.mean) / std::hypot(x.se, y.se));
      }

  const bool pass = std::abs(f.sigma - kC6Sigma) <= kC6Tol && std::abs(f.tau - kC6Tau) <= kC6Tol &&
                    worst_z <= kC6Sigmas;
  report(6, pass, "barrier power law and two-bond collapse",
         "sigma=" + num(f.sigma, 4) + " tau=" + num(f.tau, 4) + " over p_d in [0.025, " + num(grid.back(), 3) +
             "] (" + std::to_string(grid.size()) + " points, L=" + std::to_string(kC6Side) + ", " +
             std::to_string(kC6Draws) + " draws), target (" + num(kC6Sigma) + ", " + num(kC6Tau) + ") +- " +
             num(kC6Tol) + "; collapse max |z|=" + num(worst_z, 3) + " <= " + num(kC6Sigmas));
}

// ---- criterion 7: relative cost of sq2N-2 corners ----

double eta_oracle(double chi, const QExpFit& qe, const PowerLawFit& pw) {
  const double r = kSiteThreshold / chi;  // e_q(-lambda p_d)
  const double pd = (1.0 - std::pow(r, 1.0 - qe.q)) / ((1.0 - qe.q) * qe.lambda);
  const double qb = pw.sigma * std::pow(pd, pw.tau);
  const double a = (kBondThreshold - kSiteThreshold) / (1.0 - kBondThreshold);
  const double b = kBondThreshold * (1.0 - kSiteThreshold) / (1.0 - kBondThreshold);
  const double joint = 1.0 - b / (chi + a);
  return 100.0 * (qb - joint) / joint;
}

void criterion7() {
  const StrategyParameters p = *reference_parameters(BarrierModel::sq2n_2_corners);
  double lo = 1e9, hi = -1e9, mismatch = 0;
  for (int k = 0; k <= 300; ++k) {
    const double chi = 0.65 + 0.30 * k / 300.0;
    const double eta = relative_cost(chi, p.qexp, p.power).eta;
    mismatch = std::max(mismatch, std::abs(eta - eta_oracle(chi, p.qexp, p.power)));
    lo = std::min(lo, eta);
    hi = std::max(hi, eta);
  }
  const double at = relative_cost(kC7At, p.qexp, p.power).eta;
  const bool pass = lo >= kC7Lo && hi <= kC7Hi && std::abs(at - kC7Eta) <= kC7EtaTol && mismatch < 1e-9;
  report(7, pass, "sq2N-2 corners cost savings",
         "eta range [" + num(lo, 4) + ", " + num(hi, 4) + "]% over chi_c in [0.65, 0.95], required within [" +
             num(kC7Lo) + ", " + num(kC7Hi) + "]; eta(0.8)=" + num(at, 4) + "% target " + num(kC7Eta) + " +- " +
             num(kC7EtaTol) + "; module vs closed form " + num(mismatch, 2));
}

// ---- criterion 8: property suites ----

bool union_find_vs_bfs(std::string& why) {
  constexpr int L = 6, N = L * L;
  Rng rng(derive_seed({kSeed, 8, 1}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 1000; ++inst) {
    std::vector<char> occ(N), right(N), down(N);
    for (int s = 0; s < N; ++s) {
      occ[s] = u(rng) < 0.65;
      right[s] = u(rng) < 0.7;
      down[s] = u(rng) < 0.7;
    }
    auto linked = [&](int s, int t) {
      if (!occ[s] || !occ[t]) return false;
      const int si = s / L, sj = s % L, ti = t / L, tj = t % L;
      if (sj == tj && ti == si + 1) return static_cast<bool>(right[s]);
      if (sj == tj && si == ti + 1) return static_cast<bool>(right[t]);
      if (si == ti && tj == sj + 1) return static_cast<bool>(down[s]);
      if (si == ti && sj == tj + 1) return static_cast<bool>(down[t]);
      return false;
    };
    UnionFind uf(N);
    for (int s = 0; s < N; ++s)
      for (int t : {s + L, s + 1})
        if (t < N && linked(s, t)) uf.unite(s, t);
    std::vector<int> label(N, -1);
    for (int s = 0; s < N; ++s) {
      if (!occ[s] || label[s] >= 0) continue;
      std::deque<int> q{s};
      label[s] = s;
      while (!q.empty()) {
        const int x = q.front();
        q.pop_front();
        for (int y = 0; y < N; ++y)
          if (label[y] < 0 && linked(x, y)) {
            label[y] = s;
            q.push_back(y);
          }
      }
    }
    for (int s = 0; s < N; ++s)
      for (int t = 0; t < N; ++t) {
        if (!occ[s] || !occ[t]) continue;
        if (uf.connected(s, t) != (label[s] == label[t])) {
          why = "instance " + std::to_string(inst) + " sites " + std::to_string(s) + "," + std::to_string(t);
          return false;
        }
      }
  }
  return true;
}

bool binomial_vs_loggamma(std::string& why) {
  double worst = 0;
  for (auto [n_total, chi] : {std::pair<std::size_t, double>{1000, 0.3}, {4096, 0.5927}, {32258, 0.66}}) {
    const auto w = binomial_weights(n_total, chi);
    const double N = static_cast<double>(n_total);
    for (std::size_t n = 0; n <= n_total; ++n) {
      const double k = static_cast<double>(n);
      const double ref = std::exp(std::lgamma(N + 1) - std::lgamma(k + 1) - std::lgamma(N - k + 1) +
                                  k * std::log(chi) + (N - k) * std::log1p(-chi));
      if (ref < 1e-200 || w.at(n) == 0.0) continue;
      worst = std::max(worst, std::abs(w.at(n) - ref) / ref);
    }
  }
  why = "max rel dev " + num(worst, 3);
  return worst <= 1e-10;
}

bool window_identity(std::string& why) {
  double worst = 0;
  for (double eps : {0.05, 0.1, 0.25, 0.45})
    for (double c : {0.55, 0.6, 0.8})
      for (double w : {0.003, 0.02, 0.1}) {
        const Window win = restricted_window(c, w, eps);
        // Deviation in units of the conditioning-scaled ulp: chi - c cancels.
        const double unit = std::numeric_limits<double>::epsilon() * std::max(1.0, c / w);
        worst = std::max(worst, std::abs(sigmoid(win.lo, c, w) - (0.5 - eps)) / unit);
        worst = std::max(worst, std::abs(sigmoid(win.hi, c, w) - (0.5 + eps)) / unit);
      }
  why = "max dev " + num(worst, 3) + " ulp*c/w";
  return worst <= 4.0;
}

bool monotone_curves(std::string& why) {
  for (BarrierModel m : kAllModels) {
    const double param = m == BarrierModel::joint_site_bond ? 0.2 : 0.3;
    CampaignParams p{24, m, param, SweepKind::sites, SpanningMode::top_bottom, 400, 0, kSeed, workers()};
    const auto curve = percolation_probability(cumulative(run_campaign(p)), uniform_grid(0.0, 1.0, 501), 24);
    for (std::size_t k = 1; k < curve.size(); ++k)
      if (curve.P[k] < curve.P[k - 1] - 1e-12) {
        why = std::string(model_name(m)) + " decreases at chi=" + num(curve.chi[k]);
        return false;
      }
  }
  return true;
}

bool qexp_properties(std::string& why) {
  double worst = 0;
  // Limits: q -> 1 gives exp, and e_q(0) = 1.
  for (double x : {-0.5, -0.1, 0.0, 0.3}) {
    worst = std::max(worst, std::abs(q_exponential(x, 1.0) - std::exp(x)));
    worst = std::max(worst, std::abs(q_exponential(x, 1.0 - 1e-9) - std::exp(x)) * 1e-3);
  }
  worst = std::max(worst, std::abs(q_exponential(0.0, 0.4) - 1.0));
  worst = std::max(worst, std::abs(q_exponential(0.2, 0.0) - 1.2));
  if (worst > 1e-12) {
    why = "q-exponential limits off by " + num(worst, 3);
    return false;
  }
  double trip = 0;
  for (BarrierModel m : {BarrierModel::sq2n_1, BarrierModel::sq2n_2, BarrierModel::sq2n_2_corners,
                         BarrierModel::sq2n_2_parallels}) {
    const QExpFit q = reference_parameters(m)->qexp;
    for (int k = 0; k <= 200; ++k) {
      const double pd = k / 200.0;
      const double chi = q.critical_susceptibility(pd);
      if (chi > 1.0) continue;
      trip = std::max(trip, std::abs(pd_of_chi(chi, q) - pd));
    }
  }
  why = "round-trip max dev " + num(trip, 3);
  return trip <= 1e-12;
}

bool pipeline_determinism(std::string& why) {
  const fs::path root = fs::temp_directory_path() / ("bperc_acceptance_" + std::to_string(kSeed));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "config.yaml";
  std::ofstream(cfg) << "model: sq2N-1\nsizes: [8, 12, 16, 24]\nparams: [0.0, 0.1, 0.2, 0.3]\nreplicas: 1500\nseed: 3\n";

  auto run = [&](unsigned w, const fs::path& out) {
    CommandOptions o;
    o.config_path = cfg;
    o.out = out;
    o.workers = w;
    cmd_simulate(o);
    cmd_analyze(o);
    try {
      cmd_curves(o);
    } catch (const Error& e) {
      std::ofstream(out / "curves_error.txt") << e.what() << '\n';
    }
  };
  run(1, root / "w1");
  run(3, root / "w3");

  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "w1")) {
    if (!e.is_regular_file()) continue;
    const fs::path other = root / "w3" / fs::relative(e.path(), root / "w1");
    std::ifstream a(e.path()), b(other);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    if (!fs::exists(other) || sa.str() != sb.str()) {
      why = "differs: " + fs::relative(e.path(), root / "w1").string();
      return false;
    }
    ++compared;
  }
  fs::remove_all(root);
  why = std::to_string(compared) + " files identical for 1 vs 3 workers";
  return compared > 0;
}

void criterion8() {
  const auto t0 = Clock::now();
  struct Suite {
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Suite> suites = {{"union-find vs BFS", union_find_vs_bfs},
                                     {"binomial vs log-gamma", binomial_vs_loggamma},
                                     {"window identity", window_identity},
                                     {"P_L monotone", monotone_curves},
                                     {"q-exponential", qexp_properties},
                                     {"pipeline determinism", pipeline_determinism}};
  bool pass = true;
  std::string detail;
  for (const Suite& s : suites) {
    std::string why;
    bool ok = false;
    try {
      ok = s.run(why);
    } catch (const std::exception& e) {
      why = std::string("threw: ") + e.what();
    }
    pass = pass && ok;
    detail += std::string(s.name) + (ok ? " ok" : " FAILED") + (why.empty() ? "" : " (" + why + ")") + "; ";
  }
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < kC8Seconds;
  report(8, pass, "property suites", detail + "elapsed " + num(elapsed, 3) + "s < " + num(kC8Seconds) + "s");
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int k = 1; k < argc; ++k) {
    try {
      only.insert(std::stoi(argv[k]));
    } catch (const std::exception&) {
      std::fprintf(stderr, "usage: acceptance [criterion numbers 1-8...]\n");
      return 2;
    }
  }
  const std::vector<std::pair<int, void (*)()>> criteria = {{8, criterion8}, {7, criterion7}, {6, criterion6},
                                                            {1, criterion1}, {3, criterion3}, {4, criterion4},
                                                            {2, criterion2}, {5, criterion5}};
  const auto t0 = Clock::now();
  std::set<int> ran;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    ran.insert(id);
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, "criterion " + std::to_string(id), std::string("error: ") + e.what());
    }
  }
  std::printf("acceptance: %zu/%zu passed in %.0fs (workers=%u, seed=%llu)\n", ran.size() - failures, ran.size(),
              seconds_since(t0), workers(), static_cast<unsigned long long>(kSeed));
  return failures == 0 ? 0 : 1;
}

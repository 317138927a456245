#include "momolab/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "momolab/kahan.hpp"
#include "momolab/momo.hpp"

namespace momolab {

namespace {

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_int(int64_t x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(x));
  return buf;
}

template <class T>
std::string join_list(const std::vector<T>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, double>)
      out += fmt_double(xs[i]);
    else
      out += fmt_int(static_cast<int64_t>(xs[i]));
  }
  return out;
}

std::vector<int64_t> parse_int_list(const std::string& s) {
  std::vector<int64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoll(tok));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/" + name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + dir + "/" + name);
  out << content;
}

}  // namespace

double SeededUniform::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  ExperimentConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "experiment") experiment = value;
  else if (key == "system") system = value;
  else if (key == "alpha") alpha = std::stod(value);
  else if (key == "x0") x0 = std::stod(value);
  else if (key == "m") m = std::stoll(value);
  else if (key == "offset") offset = std::stoll(value);
  else if (key == "w0_re") w0_re = std::stod(value);
  else if (key == "w0_im") w0_im = std::stod(value);
  else if (key == "w1_re") w1_re = std::stod(value);
  else if (key == "w1_im") w1_im = std::stod(value);
  else if (key == "base") base = value;
  else if (key == "blocks") blocks = value;
  else if (key == "horizon") horizon = std::stoll(value);
  else if (key == "checkpoints") checkpoints = (value == "auto" ? std::vector<int64_t>{} : parse_int_list(value));
  else if (key == "h_schedule") h_schedule = parse_int_list(value);
  else if (key == "h0_schedule") h0_schedule = parse_int_list(value);
  else if (key == "eps_schedule") eps_schedule = parse_double_list(value);
  else if (key == "scale_stages") scale_stages = std::stoll(value);
  else if (key == "dilate_a") dilate_a = std::stoll(value);
  else if (key == "dilate_eps") dilate_eps = std::stod(value);
  else if (key == "grid") grid = std::stoll(value);
  else if (key == "dictionary") dictionary = std::stoll(value);
  else if (key == "seed") seed = std::stoull(value);
  else if (key == "weights") weights = value;
  else if (key == "n_max") n_max = std::stoll(value);
  else if (key == "block_size") block_size = std::stoll(value);
  else if (key == "out_dir") out_dir = value;
  else if (key == "out_file") out_file = value;
  else throw std::invalid_argument("unknown config key: " + key);
}

std::vector<int64_t> ExperimentConfig::effective_checkpoints() const {
  std::vector<int64_t> cps = checkpoints.empty() ? default_checkpoints(horizon) : checkpoints;
  if (cps.back() > horizon)
    throw std::invalid_argument("checkpoints exceed the horizon");
  return cps;
}

nlohmann::json ExperimentConfig::echo() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["system"] = system;
  j["alpha"] = fmt_double(alpha);
  j["x0"] = fmt_double(x0);
  j["m"] = fmt_int(m);
  j["offset"] = fmt_int(offset);
  j["w0"] = fmt_double(w0_re) + "+" + fmt_double(w0_im) + "i";
  j["w1"] = fmt_double(w1_re) + "+" + fmt_double(w1_im) + "i";
  j["base"] = base;
  j["blocks"] = blocks;
  j["horizon"] = fmt_int(horizon);
  j["checkpoints"] = checkpoints.empty() ? std::string("auto") : join_list(checkpoints);
  j["h_schedule"] = join_list(h_schedule);
  j["h0_schedule"] = join_list(h0_schedule);
  j["eps_schedule"] = join_list(eps_schedule);
  j["scale_stages"] = fmt_int(scale_stages);
  j["dilate_a"] = fmt_int(dilate_a);
  j["dilate_eps"] = fmt_double(dilate_eps);
  j["grid"] = fmt_int(grid);
  j["dictionary"] = fmt_int(dictionary);
  j["seed"] = fmt_int(static_cast<int64_t>(seed));
  j["weights"] = weights;
  j["n_max"] = fmt_int(n_max);
  j["block_size"] = fmt_int(block_size);
  j["out_dir"] = out_dir;
  j["out_file"] = out_file;
  return j;
}

namespace {

MultipleBase parse_base(const std::string& desc, int64_t horizon) {
  if (desc == "prime-squares") return MultipleBase::prime_squares(horizon);
  if (desc.empty() || desc == "none") return MultipleBase{};
  return MultipleBase::from_list(parse_int_list(desc), horizon);
}

}  // namespace

ObservableSystem make_system(const ExperimentConfig& cfg) {
  if (cfg.system == "rotation") return make_rotation(cfg.alpha, cfg.x0, cfg.m);
  if (cfg.system == "thuemorse")
    return make_thue_morse(cfg.offset, {cfg.w0_re, cfg.w0_im}, {cfg.w1_re, cfg.w1_im});
  if (cfg.system == "bfree") {
    int64_t slack = 1;
    for (int64_t h : cfg.h_schedule) slack = std::max(slack, h);
    return make_bfree(parse_base(cfg.base, cfg.horizon), cfg.horizon + slack + cfg.grid + 1);
  }
  if (cfg.system == "blocks") {
    int64_t count = 1;
    while ((count + 2) * (count + 2) <= cfg.horizon) ++count;
    BlockPartition partition = BlockPartition::squares(count);
    SeededUniform rng(cfg.seed);
    std::vector<ObservableSystem> systems;
    for (int64_t k = 0; k < count; ++k) systems.push_back(make_rotation(cfg.alpha, rng.next(), cfg.m));
    return make_block_orbit(partition, std::move(systems));
  }
  throw std::invalid_argument("unknown system kind: " + cfg.system);
}

namespace {

RealSeq make_weights(const ExperimentConfig& cfg, const ArithTable& table) {
  if (cfg.weights == "mu")
    return [&table](int64_t n) { return static_cast<double>(table.mu[static_cast<size_t>(n)]); };
  if (cfg.weights == "one") return [](int64_t) { return 1.0; };
  if (cfg.weights == "zero") return [](int64_t) { return 0.0; };
  throw std::invalid_argument("unknown weights: " + cfg.weights);
}

// Starting-point grid used for the sup-norm surrogate. For the rotation the
// window modulus |(1/H) sum_h w(n+h) e(m(x0+(n+h)a))| does not depend on x0
// (the phase e(m x0) factors out), so a single representative is exact there.
std::vector<ObservableSystem> window_grid(const ExperimentConfig& cfg) {
  std::vector<ObservableSystem> fam;
  if (cfg.system == "rotation" || cfg.system == "blocks") {
    fam.push_back(make_system(cfg));
    return fam;
  }
  if (cfg.system == "thuemorse") {
    for (int64_t g = 0; g < cfg.grid; ++g)
      fam.push_back(make_thue_morse(cfg.offset + g, {cfg.w0_re, cfg.w0_im}, {cfg.w1_re, cfg.w1_im}));
    return fam;
  }
  if (cfg.system == "bfree") {
    int64_t slack = 1;
    for (int64_t h : cfg.h_schedule) slack = std::max(slack, h);
    auto base = parse_base(cfg.base, cfg.horizon);
    auto whole = make_bfree(base, cfg.horizon + slack + cfg.grid + 1);
    for (int64_t g = 0; g < cfg.grid; ++g)
      fam.push_back(ObservableSystem([whole, g](int64_t n) { return whole.eval(n + g); }, 1.0));
    return fam;
  }
  throw std::invalid_argument("unknown system kind: " + cfg.system);
}

// Explicit grid of rotation phases x0 = i/grid for the final uniform-norm
// report (recomputable per grid point, monotone under grid refinement).
std::vector<ObservableSystem> report_grid(const ExperimentConfig& cfg) {
  if (cfg.system != "rotation") return window_grid(cfg);
  std::vector<ObservableSystem> fam;
  for (int64_t g = 0; g < cfg.grid; ++g)
    fam.push_back(make_rotation(cfg.alpha, static_cast<double>(g) / static_cast<double>(cfg.grid), cfg.m));
  return fam;
}

// g[n-1] = max over the family of |(1/H) sum_{h=1..H} w(n+h) f(n+h)|,
// n = 1..horizon. Sliding windows, re-summed every 1024 steps.
std::vector<double> grid_window_abs(const std::vector<ObservableSystem>& family, const RealSeq& w,
                                    int64_t H, int64_t horizon) {
  constexpr int64_t kRefresh = 1024;
  const size_t G = family.size();
  std::vector<std::complex<double>> win(G, 0.0);
  for (size_t g = 0; g < G; ++g) {
    KahanComplex acc;
    for (int64_t h = 1; h <= H; ++h) acc.add(w(1 + h) * family[g].eval(1 + h));
    win[g] = acc.value();
  }
  std::vector<double> out(static_cast<size_t>(horizon));
  const double invH = 1.0 / static_cast<double>(H);
  for (int64_t n = 1; n <= horizon; ++n) {
    if (n > 1) {
      for (size_t g = 0; g < G; ++g)
        win[g] += w(n + H) * family[g].eval(n + H) - w(n) * family[g].eval(n);
      if (n % kRefresh == 0)
        for (size_t g = 0; g < G; ++g) {
          KahanComplex acc;
          for (int64_t h = 1; h <= H; ++h) acc.add(w(n + h) * family[g].eval(n + h));
          win[g] = acc.value();
        }
    }
    double best = 0.0;
    for (size_t g = 0; g < G; ++g) best = std::max(best, std::abs(win[g]));
    out[static_cast<size_t>(n - 1)] = best * invH;
  }
  return out;
}

struct WindowExtraction {
  std::vector<std::pair<int64_t, double>> R;           // per-H limsup reading
  std::vector<std::pair<int64_t, double>> gamma_used;  // clamped into (0,1)
  std::vector<std::pair<int64_t, DensityCertificate>> members;
  std::vector<std::pair<int64_t, int64_t>> rescan_violations;
  std::vector<std::vector<double>> window_trajectories;  // per H, at checkpoints
  DensityCertificate assembled;
};

// The H-indexed extraction: R(H) = max over checkpoints of the logarithmic
// window statistic, member sets from the running-mean threshold with
// gamma = R(H) (clamped into (0,1) so degenerate inputs stay legal), then the
// pruned-union assembly over the H0 schedule.
WindowExtraction extract_via_windows(const std::function<std::vector<double>(int64_t)>& g_builder,
                                     Phi phi, const std::vector<int64_t>& h_schedule,
                                     const std::vector<int64_t>& h0_schedule,
                                     const std::vector<int64_t>& cps, int64_t horizon) {
  WindowExtraction out;
  for (int64_t H : h_schedule) {
    std::vector<double> g = g_builder(H);
    std::vector<double> F(g.size());
    for (size_t i = 0; i < g.size(); ++i) F[i] = phi == Phi::square ? g[i] * g[i] : g[i];

    KahanSum logstat;
    std::vector<double> traj;
    size_t next_cp = 0;
    double reading = 0.0;
    for (int64_t n = 1; n <= horizon; ++n) {
      logstat.add(F[static_cast<size_t>(n - 1)] / static_cast<double>(n));
      while (next_cp < cps.size() && cps[next_cp] == n) {
        double v = logstat.value() / std::log(static_cast<double>(n));
        traj.push_back(v);
        reading = std::max(reading, v);
        ++next_cp;
      }
    }
    out.R.emplace_back(H, reading);
    out.window_trajectories.push_back(std::move(traj));

    const double gamma = std::clamp(reading, 1e-30, 1.0 - 1e-12);
    out.gamma_used.emplace_back(H, gamma);
    RealSeq F_seq = [&F](int64_t n) { return F[static_cast<size_t>(n - 1)]; };
    DensityCertificate member = cesaro_threshold_set(F_seq, gamma, horizon, cps);
    out.rescan_violations.emplace_back(H, cesaro_threshold_rescan_violations(member, F_seq));
    out.members.emplace_back(H, std::move(member));
  }
  out.assembled = assemble_full_density_set(out.R, out.members, h0_schedule, cps, horizon);
  return out;
}

// largest member of S at or below each checkpoint, plus the k largest
// members overall; deduplicated ascending
std::vector<int64_t> report_points(const IndexSet& S, const std::vector<int64_t>& cps, int64_t k) {
  std::vector<int64_t> pts;
  for (int64_t cp : cps) {
    for (int64_t n = cp; n >= 1; --n)
      if (S.contains(n)) {
        pts.push_back(n);
        break;
      }
  }
  for (int64_t n : S.largest(k)) pts.push_back(n);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::string window_csv(const std::vector<int64_t>& h_schedule, const std::vector<int64_t>& cps,
                       const std::vector<std::vector<double>>& trajectories) {
  std::string csv = "H,N,log_window_stat\n";
  for (size_t hi = 0; hi < h_schedule.size(); ++hi)
    for (size_t ci = 0; ci < cps.size(); ++ci)
      csv += fmt_int(h_schedule[hi]) + "," + fmt_int(cps[ci]) + "," +
             fmt_double(trajectories[hi][ci]) + "\n";
  return csv;
}

nlohmann::json window_summary(const WindowExtraction& ex) {
  nlohmann::json per_h = nlohmann::json::array();
  for (size_t i = 0; i < ex.R.size(); ++i) {
    per_h.push_back({{"H", ex.R[i].first},
                     {"R", ex.R[i].second},
                     {"gamma_used", ex.gamma_used[i].second},
                     {"member_rescan_violations", ex.rescan_violations[i].second},
                     {"member_count", ex.members[i].second.set.size()}});
  }
  return per_h;
}

}  // namespace

PipelineReport sarnak_density_pipeline(const ExperimentConfig& cfg, const ArithTable& table) {
  const auto cps = cfg.effective_checkpoints();
  int64_t max_h = *std::max_element(cfg.h_schedule.begin(), cfg.h_schedule.end());
  if (table.n_max < cfg.horizon + max_h)
    throw std::invalid_argument("sarnak_density_pipeline: table too small for horizon + max H");

  RealSeq w = make_weights(cfg, table);
  auto grid_fam = window_grid(cfg);
  double bound = 0.0;
  for (const auto& sys : grid_fam) bound = std::max(bound, sys.bound());

  auto g_builder = [&](int64_t H) { return grid_window_abs(grid_fam, w, H, cfg.horizon); };
  WindowExtraction ex = extract_via_windows(g_builder, Phi::identity, cfg.h_schedule,
                                            cfg.h0_schedule, cps, cfg.horizon);

  // orthogonality along A over the explicit reporting grid, plus the proof's
  // per-member bound sqrt(gamma_H*) + 2*M*||f||/H* with H* the largest
  // admitting H (membership in the pruned member set, N >= H^2)
  auto rep_fam = report_grid(cfg);
  auto pts = report_points(ex.assembled.set, cps, 10);
  std::vector<double> ortho(pts.size(), 0.0);
  {
    std::vector<KahanComplex> prefix(rep_fam.size());
    size_t next_pt = 0;
    for (int64_t n = 1; n <= cfg.horizon && next_pt < pts.size(); ++n) {
      for (size_t g = 0; g < rep_fam.size(); ++g) prefix[g].add(w(n) * rep_fam[g].eval(n));
      while (next_pt < pts.size() && pts[next_pt] == n) {
        double best = 0.0;
        for (auto& acc : prefix)
          best = std::max(best, std::abs(acc.value()) / static_cast<double>(n));
        ortho[next_pt] = best;
        ++next_pt;
      }
    }
  }
  std::string ortho_csv = "N,orthogonality,bound,admitting_H\n";
  int64_t bound_failures = 0;
  double worst_margin = 1e300;
  for (size_t i = 0; i < pts.size(); ++i) {
    int64_t n = pts[i];
    int64_t h_star = 0;
    double gamma_star = 1.0;
    for (size_t k = 0; k < ex.members.size(); ++k) {
      int64_t H = ex.members[k].first;
      if (n >= H * H && ex.members[k].second.set.contains(n)) {
        if (H > h_star) {
          h_star = H;
          gamma_star = ex.gamma_used[k].second;
        }
      }
    }
    double chain = h_star == 0 ? std::numeric_limits<double>::infinity()
                               : std::sqrt(gamma_star) + 2.0 * bound / static_cast<double>(h_star);
    if (ortho[i] > chain + 1e-9) ++bound_failures;
    worst_margin = std::min(worst_margin, chain - ortho[i]);
    ortho_csv += fmt_int(n) + "," + fmt_double(ortho[i]) + "," + fmt_double(chain) + "," +
                 fmt_int(h_star) + "\n";
  }

  std::string density_csv = "N,A_reading\n";
  for (size_t i = 0; i < cps.size(); ++i)
    density_csv += fmt_int(cps[i]) + "," + fmt_double(ex.assembled.readings[i]) + "\n";

  PipelineReport report;
  report.failed = ex.assembled.failed;
  report.summary["config"] = cfg.echo();
  report.summary["per_H"] = window_summary(ex);
  report.summary["A_final_reading"] = ex.assembled.readings.back();
  report.summary["A_failed"] = ex.assembled.failed;
  report.summary["A_failing_stage"] = ex.assembled.failing_stage;
  report.summary["grid_points_reported"] = static_cast<int64_t>(rep_fam.size());
  report.summary["window_grid_points"] = static_cast<int64_t>(grid_fam.size());
  report.summary["orthogonality_at_largest"] = ortho.empty() ? 0.0 : ortho.back();
  report.summary["bound_chain_failures"] = bound_failures;
  report.summary["bound_chain_worst_margin"] = worst_margin;
  report.certificates.push_back(ex.assembled);

  write_file(cfg.out_dir, "sarnak_window.csv", window_csv(cfg.h_schedule, cps, ex.window_trajectories));
  write_file(cfg.out_dir, "sarnak_density.csv", density_csv);
  write_file(cfg.out_dir, "sarnak_orthogonality.csv", ortho_csv);
  write_file(cfg.out_dir, "sarnak_certificate.json", ex.assembled.to_json().dump(2) + "\n");
  write_file(cfg.out_dir, "sarnak_summary.json", report.summary.dump(2) + "\n");
  return report;
}

PipelineReport erg1_pipeline(const std::vector<ObservableSystem>& dictionary,
                             const std::vector<std::complex<double>>& kappa_means,
                             const ExperimentConfig& cfg) {
  if (dictionary.size() != kappa_means.size())
    throw std::invalid_argument("erg1_pipeline: one kappa mean per observable");
  if (dictionary.empty()) throw std::invalid_argument("erg1_pipeline: empty dictionary");
  const auto cps = cfg.effective_checkpoints();

  PipelineReport report;
  nlohmann::json per_obs = nlohmann::json::array();
  std::vector<IndexSet> per_observable_sets;
  std::vector<std::vector<std::pair<int64_t, double>>> all_R;

  for (size_t i = 0; i < dictionary.size(); ++i) {
    const ObservableSystem& f = dictionary[i];
    const std::complex<double> kappa = kappa_means[i];
    Seq v = [&f, kappa](int64_t n) { return f.eval(n) - kappa; };
    auto g_builder = [&](int64_t H) {
      std::vector<ObservableSystem> one = {ObservableSystem([v](int64_t n) { return v(n); }, f.bound() + std::abs(kappa))};
      RealSeq unit = [](int64_t) { return 1.0; };
      return grid_window_abs(one, unit, H, cfg.horizon);
    };
    WindowExtraction ex = extract_via_windows(g_builder, Phi::square, cfg.h_schedule,
                                              cfg.h0_schedule, cps, cfg.horizon);
    per_obs.push_back({{"observable", static_cast<int64_t>(i)},
                       {"per_H", window_summary(ex)},
                       {"set_reading", ex.assembled.readings.back()},
                       {"failed", ex.assembled.failed}});
    report.failed = report.failed || ex.assembled.failed;
    all_R.push_back(ex.R);
    per_observable_sets.push_back(ex.assembled.set);
  }

  // one set serving the whole dictionary
  DensityCertificate joint = diagonalize_sets(per_observable_sets, cps, cfg.horizon);
  joint.witnesses["kind"] = "erg1_joint_set";
  report.failed = report.failed || joint.failed;

  // Cesàro convergence of the empirical averages toward the kappa means
  auto pts = report_points(joint.set, cps, 10);
  std::string conv_csv = "observable,N,re_mean,im_mean,re_kappa,im_kappa,abs_err\n";
  double final_worst_err = 0.0;
  for (size_t i = 0; i < dictionary.size(); ++i) {
    KahanComplex prefix;
    size_t next_pt = 0;
    for (int64_t n = 1; n <= cfg.horizon && next_pt < pts.size(); ++n) {
      prefix.add(dictionary[i].eval(n));
      while (next_pt < pts.size() && pts[next_pt] == n) {
        std::complex<double> mean = prefix.value() / static_cast<double>(n);
        double err = std::abs(mean - kappa_means[i]);
        if (n == pts.back()) final_worst_err = std::max(final_worst_err, err);
        conv_csv += fmt_int(static_cast<int64_t>(i)) + "," + fmt_int(n) + "," +
                    fmt_double(mean.real()) + "," + fmt_double(mean.imag()) + "," +
                    fmt_double(kappa_means[i].real()) + "," + fmt_double(kappa_means[i].imag()) +
                    "," + fmt_double(err) + "\n";
        ++next_pt;
      }
    }
  }

  report.summary["config"] = cfg.echo();
  report.summary["observables"] = per_obs;
  report.summary["joint_reading"] = joint.readings.back();
  report.summary["joint_failed"] = joint.failed;
  report.summary["final_worst_abs_err"] = final_worst_err;
  report.certificates.push_back(joint);

  write_file(cfg.out_dir, "erg1_convergence.csv", conv_csv);
  write_file(cfg.out_dir, "erg1_certificate.json", joint.to_json().dump(2) + "\n");
  write_file(cfg.out_dir, "erg1_summary.json", report.summary.dump(2) + "\n");
  return report;
}

PipelineReport bfree_density_pipeline(const MultipleBase& base, const ExperimentConfig& cfg) {
  const auto cps = cfg.effective_checkpoints();
  IndexSet members = bfree_set(base, cfg.horizon);
  RealSeq indicator = [&members](int64_t n) { return members.contains(n) ? 1.0 : 0.0; };

  DensityCertificate b_cert = davenport_erdos_set(indicator, cfg.eps_schedule, cfg.horizon, cps);

  auto nat = natural_density_trajectory(members, cps);
  auto logd = log_density_trajectory(members, cps);
  std::string traj_csv = "N,bfree_cesaro,bfree_logread,B_reading\n";
  for (size_t i = 0; i < cps.size(); ++i)
    traj_csv += fmt_int(cps[i]) + "," + fmt_double(nat[i]) + "," + fmt_double(logd[i]) + "," +
                fmt_double(b_cert.readings[i]) + "\n";

  // Cesàro means of the indicator along B
  auto pts = report_points(b_cert.set, cps, 10);
  std::string along_csv = "N,mean_along_B\n";
  double final_mean = 0.0;
  {
    KahanSum acc;
    size_t next_pt = 0;
    for (int64_t n = 1; n <= cfg.horizon && next_pt < pts.size(); ++n) {
      acc.add(indicator(n));
      while (next_pt < pts.size() && pts[next_pt] == n) {
        double mean = acc.value() / static_cast<double>(n);
        along_csv += fmt_int(n) + "," + fmt_double(mean) + "\n";
        if (n == pts.back()) final_mean = mean;
        ++next_pt;
      }
    }
  }

  // exact block agreement audit: membership must equal the stage predicate
  int64_t agreement_violations = 0;
  {
    const double ell = b_cert.witnesses.at("ell").get<double>();
    const auto switch_points = b_cert.witnesses.at("switch_points").get<std::vector<int64_t>>();
    const auto& eps = cfg.eps_schedule;
    KahanSum acc;
    for (int64_t n = 1; n <= cfg.horizon; ++n) {
      acc.add(indicator(n));
      double mean = acc.value() / static_cast<double>(n);
      bool expect;
      if (switch_points.empty() || n < switch_points.front()) {
        expect = true;
      } else {
        size_t k = 0;
        while (k + 1 < switch_points.size() && n >= switch_points[k + 1]) ++k;
        expect = mean > ell - eps[k];
      }
      if (b_cert.set.contains(n) != expect) ++agreement_violations;
    }
  }

  PipelineReport report;
  report.failed = b_cert.failed;
  report.summary["config"] = cfg.echo();
  report.summary["ell"] = b_cert.witnesses.at("ell");
  report.summary["final_cesaro_density"] = nat.back();
  report.summary["final_log_reading"] = logd.back();
  report.summary["B_final_reading"] = b_cert.readings.back();
  report.summary["B_failed"] = b_cert.failed;
  report.summary["mean_along_B_at_largest"] = final_mean;
  report.summary["block_agreement_violations"] = agreement_violations;
  report.certificates.push_back(b_cert);

  write_file(cfg.out_dir, "bfree_trajectory.csv", traj_csv);
  write_file(cfg.out_dir, "bfree_along_B.csv", along_csv);
  write_file(cfg.out_dir, "bfree_certificate.json", b_cert.to_json().dump(2) + "\n");
  write_file(cfg.out_dir, "bfree_summary.json", report.summary.dump(2) + "\n");
  return report;
}

PipelineReport pnt_pipeline(const ArithTable& table, const ExperimentConfig& cfg) {
  const auto cps = cfg.effective_checkpoints();
  int64_t max_h = *std::max_element(cfg.h_schedule.begin(), cfg.h_schedule.end());
  if (table.n_max < cfg.horizon + max_h)
    throw std::invalid_argument("pnt_pipeline: table too small for horizon + max H");

  // (i) square-window statistics for c = mu
  RealSeq w = make_weights(cfg, table);
  ObservableSystem unit_system([](int64_t) { return std::complex<double>(1.0, 0.0); }, 1.0);
  std::vector<ObservableSystem> one = {unit_system};
  auto g_builder = [&](int64_t H) { return grid_window_abs(one, w, H, cfg.horizon); };

  // (ii) extraction of A
  WindowExtraction ex = extract_via_windows(g_builder, Phi::square, cfg.h_schedule,
                                            cfg.h0_schedule, cps, cfg.horizon);

  auto mprefix = mertens_prefix(table);
  auto pts = report_points(ex.assembled.set, cps, 10);
  std::string mert_csv = "N,abs_mertens_mean,bound,admitting_H\n";
  int64_t bound_failures = 0;
  for (int64_t n : pts) {
    double mean = std::abs(static_cast<double>(mprefix[static_cast<size_t>(n)])) / static_cast<double>(n);
    int64_t h_star = 0;
    double gamma_star = 1.0;
    for (size_t k = 0; k < ex.members.size(); ++k) {
      int64_t H = ex.members[k].first;
      if (n >= H * H && ex.members[k].second.set.contains(n) && H > h_star) {
        h_star = H;
        gamma_star = ex.gamma_used[k].second;
      }
    }
    // phi(s) = s^2, psi(s) = s^{1/4}
    double chain = h_star == 0 ? std::numeric_limits<double>::infinity()
                               : std::pow(gamma_star, 0.25) + 2.0 / static_cast<double>(h_star);
    if (mean > chain + 1e-9) ++bound_failures;
    mert_csv += fmt_int(n) + "," + fmt_double(mean) + "," + fmt_double(chain) + "," + fmt_int(h_star) + "\n";
  }

  // (iii) nested scaled set
  DensityCertificate a_tilde = nested_scaled_set(ex.assembled.set, cps, cfg.horizon, cfg.scale_stages);

  // (iv) Mertens dilate witness
  auto U = [&mprefix](double x) {
    auto i = static_cast<int64_t>(x);
    i = std::clamp<int64_t>(i, 0, static_cast<int64_t>(mprefix.size()) - 1);
    return static_cast<double>(mprefix[static_cast<size_t>(i)]);
  };
  DilateCheckResult dilate = mertens_dilate_check(a_tilde.set, U, cfg.dilate_a, cfg.dilate_eps, cfg.horizon);

  // (v) psi(x)/x at the ten largest members of A~
  auto largest = a_tilde.set.largest(10);
  std::string psi_csv = "x,psi_over_x\n";
  double psi_min = 1e300, psi_max = -1e300;
  {
    KahanSum psi;
    size_t next = 0;
    for (int64_t n = 1; n <= cfg.horizon && next < largest.size(); ++n) {
      psi.add(table.lambda[static_cast<size_t>(n)]);
      while (next < largest.size() && largest[next] == n) {
        double ratio = psi.value() / static_cast<double>(n);
        psi_csv += fmt_int(n) + "," + fmt_double(ratio) + "\n";
        psi_min = std::min(psi_min, ratio);
        psi_max = std::max(psi_max, ratio);
        ++next;
      }
    }
  }

  std::string density_csv = "N,A_reading,Atilde_reading\n";
  for (size_t i = 0; i < cps.size(); ++i)
    density_csv += fmt_int(cps[i]) + "," + fmt_double(ex.assembled.readings[i]) + "," +
                   fmt_double(a_tilde.readings[i]) + "\n";

  PipelineReport report;
  report.failed = ex.assembled.failed || a_tilde.failed || !dilate.found;
  report.summary["config"] = cfg.echo();
  report.summary["per_H"] = window_summary(ex);
  report.summary["A_final_reading"] = ex.assembled.readings.back();
  report.summary["Atilde_final_reading"] = a_tilde.readings.back();
  report.summary["A_failed"] = ex.assembled.failed;
  report.summary["Atilde_failed"] = a_tilde.failed;
  report.summary["Atilde_failing_stage"] = a_tilde.failing_stage;
  report.summary["bound_chain_failures"] = bound_failures;
  report.summary["dilate_found"] = dilate.found;
  report.summary["dilate_X"] = dilate.X;
  report.summary["psi_ratio_min"] = largest.empty() ? 0.0 : psi_min;
  report.summary["psi_ratio_max"] = largest.empty() ? 0.0 : psi_max;
  report.certificates.push_back(ex.assembled);
  report.certificates.push_back(a_tilde);

  write_file(cfg.out_dir, "pnt_window.csv", window_csv(cfg.h_schedule, cps, ex.window_trajectories));
  write_file(cfg.out_dir, "pnt_density.csv", density_csv);
  write_file(cfg.out_dir, "pnt_mertens.csv", mert_csv);
  write_file(cfg.out_dir, "pnt_psi.csv", psi_csv);
  write_file(cfg.out_dir, "pnt_certificate_A.json", ex.assembled.to_json().dump(2) + "\n");
  write_file(cfg.out_dir, "pnt_certificate_Atilde.json", a_tilde.to_json().dump(2) + "\n");
  write_file(cfg.out_dir, "pnt_summary.json", report.summary.dump(2) + "\n");
  return report;
}

namespace {

int run_sieve(const ExperimentConfig& cfg) {
  ArithTable table = build_arith_table(cfg.n_max, cfg.block_size);
  nlohmann::json summary;
  summary["config"] = cfg.echo();
  summary["n_max"] = table.n_max;
  summary["mertens_at_n_max"] = mertens(table, table.n_max);
  summary["psi_over_x_at_n_max"] = chebyshev_psi(table, table.n_max) / static_cast<double>(table.n_max);
  summary["sqfree_count"] = table.sqfree.size();
  if (!cfg.out_file.empty()) {
    save_table(table, cfg.out_file);
    ArithTable reloaded = load_table(cfg.out_file);
    bool identical = reloaded.n_max == table.n_max && reloaded.mu == table.mu &&
                     reloaded.lambda == table.lambda && reloaded.sqfree == table.sqfree;
    summary["cache_file"] = cfg.out_file;
    summary["cache_roundtrip_identical"] = identical;
    if (!identical) {
      std::fprintf(stderr, "sieve: cache round-trip mismatch\n");
      return 2;
    }
  }
  write_file(cfg.out_dir, "sieve_summary.json", summary.dump(2) + "\n");
  std::printf("sieve: n_max=%lld M=%lld psi/x=%.6f -> %s/sieve_summary.json\n",
              static_cast<long long>(cfg.n_max),
              static_cast<long long>(summary["mertens_at_n_max"].get<int64_t>()),
              summary["psi_over_x_at_n_max"].get<double>(), cfg.out_dir.c_str());
  return 0;
}

int run_average(const ExperimentConfig& cfg) {
  ArithTable table = build_arith_table(cfg.horizon, cfg.block_size);
  RealSeq w = make_weights(cfg, table);
  ObservableSystem sys = make_system(cfg);
  Seq a = [&](int64_t n) { return w(n) * sys.eval(n); };
  auto cps = cfg.effective_checkpoints();
  AveragingReport report = AveragingReport::over(a, cps);
  std::ostringstream csv;
  report.write_csv(csv);
  write_file(cfg.out_dir, "average.csv", csv.str());
  nlohmann::json summary;
  summary["config"] = cfg.echo();
  summary["final_cesaro_abs"] = std::abs(report.cesaro.back());
  summary["final_log_abs"] = std::abs(report.log.back());
  write_file(cfg.out_dir, "average_summary.json", summary.dump(2) + "\n");
  std::printf("average: N=%lld |cesaro|=%.6g |log|=%.6g -> %s/average.csv\n",
              static_cast<long long>(cps.back()), std::abs(report.cesaro.back()),
              std::abs(report.log.back()), cfg.out_dir.c_str());
  return 0;
}

int run_momo(const ExperimentConfig& cfg) {
  if (cfg.blocks != "squares")
    throw std::invalid_argument("momo: only blocks=squares is implemented");
  ArithTable table = build_arith_table(cfg.horizon, cfg.block_size);
  RealSeq w = make_weights(cfg, table);

  int64_t count = 1;
  while ((count + 2) * (count + 2) <= cfg.horizon) ++count;
  BlockPartition partition = BlockPartition::squares(count);
  SeededUniform rng(cfg.seed);
  std::vector<ObservableSystem> systems;
  systems.reserve(static_cast<size_t>(count));
  for (int64_t k = 0; k < count; ++k) {
    if (cfg.system == "thuemorse")
      systems.push_back(make_thue_morse(static_cast<int64_t>(rng.next() * (1 << 20)),
                                        {cfg.w0_re, cfg.w0_im}, {cfg.w1_re, cfg.w1_im}));
    else
      systems.push_back(make_rotation(cfg.alpha, rng.next(), cfg.m));
  }

  auto cps = cfg.effective_checkpoints();
  std::string csv = "K,b_top,cesaro_stat,log_stat\n";
  double first_val = -1.0, last_val = -1.0;
  for (int64_t cp : cps) {
    int64_t K = 0;
    while (K + 1 <= count && partition.point(K + 2) <= cp) ++K;
    if (K < 1) continue;
    MomoStat ces = strong_momo_stat(partition, systems, w, K, Normalization::cesaro);
    MomoStat lg = strong_momo_stat(partition, systems, w, K, Normalization::logarithmic);
    csv += fmt_int(K) + "," + fmt_int(partition.point(K + 1)) + "," + fmt_double(ces.value) + "," +
           fmt_double(lg.value) + "\n";
    if (first_val < 0) first_val = ces.value;
    last_val = ces.value;
  }
  // telescoping identity on a plain orbit at a few block pairs
  ObservableSystem plain = make_system(cfg);
  double worst_tel = 0.0;
  for (int64_t k : {int64_t{1}, count / 2, count - 1}) {
    if (k < 1) continue;
    auto pair = telescoping_check(w, plain, k, partition);
    worst_tel = std::max(worst_tel, std::abs(pair.lhs - pair.rhs));
  }

  nlohmann::json summary;
  summary["config"] = cfg.echo();
  summary["stat"] = "strong_momo";
  summary["blocks"] = count;
  summary["b_top"] = partition.point(count + 1);
  summary["first_cesaro_stat"] = first_val;
  summary["final_cesaro_stat"] = last_val;
  summary["telescoping_worst_abs_diff"] = worst_tel;
  write_file(cfg.out_dir, "momo_trajectory.csv", csv);
  write_file(cfg.out_dir, "momo_summary.json", summary.dump(2) + "\n");
  std::printf("momo: K=%lld b_top=%lld stat=%.6g telescoping=%.3g -> %s/momo_trajectory.csv\n",
              static_cast<long long>(count), static_cast<long long>(partition.point(count + 1)),
              last_val, worst_tel, cfg.out_dir.c_str());
  return 0;
}

int run_extract(const ExperimentConfig& cfg) {
  int64_t max_h = *std::max_element(cfg.h_schedule.begin(), cfg.h_schedule.end());
  ArithTable table = build_arith_table(cfg.horizon + max_h + 1, cfg.block_size);
  PipelineReport report = sarnak_density_pipeline(cfg, table);
  std::printf("extract: A reading=%.4f orthogonality=%.6g failed=%d -> %s/sarnak_summary.json\n",
              report.summary["A_final_reading"].get<double>(),
              report.summary["orthogonality_at_largest"].get<double>(),
              report.failed ? 1 : 0, cfg.out_dir.c_str());
  return report.failed ? 2 : 0;
}

int run_bfree(const ExperimentConfig& cfg) {
  MultipleBase base = parse_base(cfg.base, cfg.horizon);
  PipelineReport report = bfree_density_pipeline(base, cfg);
  std::printf("bfree: density=%.6f along-B=%.6f B-reading=%.4f failed=%d -> %s/bfree_summary.json\n",
              report.summary["final_cesaro_density"].get<double>(),
              report.summary["mean_along_B_at_largest"].get<double>(),
              report.summary["B_final_reading"].get<double>(), report.failed ? 1 : 0,
              cfg.out_dir.c_str());
  return report.failed ? 2 : 0;
}

int run_pnt(const ExperimentConfig& cfg) {
  int64_t max_h = *std::max_element(cfg.h_schedule.begin(), cfg.h_schedule.end());
  ArithTable table = build_arith_table(cfg.horizon + max_h + 1, cfg.block_size);
  PipelineReport report = pnt_pipeline(table, cfg);
  std::printf("pnt: Atilde reading=%.4f X=%lld psi/x in [%.4f, %.4f] failed=%d -> %s/pnt_summary.json\n",
              report.summary["Atilde_final_reading"].get<double>(),
              static_cast<long long>(report.summary["dilate_X"].get<int64_t>()),
              report.summary["psi_ratio_min"].get<double>(),
              report.summary["psi_ratio_max"].get<double>(), report.failed ? 1 : 0,
              cfg.out_dir.c_str());
  return report.failed ? 2 : 0;
}

int run_erg1(const ExperimentConfig& cfg) {
  // dictionary of rotation characters m = 0 .. dictionary-1 along one orbit;
  // kappa means are forced by symmetry: 0 for m != 0, 1 for the constant
  std::vector<ObservableSystem> dictionary;
  std::vector<std::complex<double>> kappa;
  for (int64_t k = 0; k < cfg.dictionary; ++k) {
    dictionary.push_back(make_rotation(cfg.alpha, cfg.x0, k));
    kappa.push_back(k == 0 ? std::complex<double>(1.0, 0.0) : std::complex<double>(0.0, 0.0));
  }
  PipelineReport report = erg1_pipeline(dictionary, kappa, cfg);
  std::printf("erg1: joint reading=%.4f worst err=%.6g failed=%d -> %s/erg1_summary.json\n",
              report.summary["joint_reading"].get<double>(),
              report.summary["final_worst_abs_err"].get<double>(), report.failed ? 1 : 0,
              cfg.out_dir.c_str());
  return report.failed ? 2 : 0;
}

void add_common_options(CLI::App* sub, ExperimentConfig& cfg, std::string& config_path) {
  sub->add_option("--config", config_path, "key=value config file; flags override");
  sub->add_option("--system", cfg.system, "rotation|thuemorse|bfree|blocks");
  sub->add_option("--alpha", cfg.alpha);
  sub->add_option("--x0", cfg.x0);
  sub->add_option("--m", cfg.m);
  sub->add_option("--offset", cfg.offset);
  sub->add_option("--base", cfg.base, "generator list '2,3' or 'prime-squares'");
  sub->add_option("--horizon", cfg.horizon);
  sub->add_option("--checkpoints", [&cfg](const std::vector<std::string>& v) {
    cfg.checkpoints = v[0] == "auto" ? std::vector<int64_t>{} : parse_int_list(v[0]);
    return true;
  }, "comma list or 'auto'");
  sub->add_option("--h-schedule", [&cfg](const std::vector<std::string>& v) {
    cfg.h_schedule = parse_int_list(v[0]);
    return true;
  });
  sub->add_option("--h0-schedule", [&cfg](const std::vector<std::string>& v) {
    cfg.h0_schedule = parse_int_list(v[0]);
    return true;
  });
  sub->add_option("--eps-schedule", [&cfg](const std::vector<std::string>& v) {
    cfg.eps_schedule = parse_double_list(v[0]);
    return true;
  });
  sub->add_option("--scale-stages", cfg.scale_stages);
  sub->add_option("--dilate-a", cfg.dilate_a);
  sub->add_option("--dilate-eps", cfg.dilate_eps);
  sub->add_option("--grid", cfg.grid);
  sub->add_option("--dictionary", cfg.dictionary);
  sub->add_option("--seed", cfg.seed);
  sub->add_option("--weights", cfg.weights, "mu|one|zero");
  sub->add_option("--block-size", cfg.block_size);
  sub->add_option("--out-dir", cfg.out_dir);
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  ExperimentConfig cfg;

  // pre-scan for --config so the file's values become the defaults that the
  // remaining command-line flags then override
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      config_path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      config_path = arg.substr(9);
  }
  if (!config_path.empty()) {
    try {
      cfg = ExperimentConfig::from_file(config_path);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  }

  CLI::App app{"momo-lab: sieves, ergodic averages and density extraction experiments"};
  app.require_subcommand(1);
  std::string config_sink = config_path;  // already applied above

  auto* sieve = app.add_subcommand("sieve", "build the arithmetic table, optionally cache it");
  sieve->add_option("--n-max", cfg.n_max);
  sieve->add_option("--block-size", cfg.block_size);
  sieve->add_option("--out", cfg.out_file, "binary cache path");
  sieve->add_option("--out-dir", cfg.out_dir);
  sieve->add_option("--config", config_sink);

  auto* average = app.add_subcommand("average", "Cesàro and logarithmic averages of a weighted orbit");
  add_common_options(average, cfg, config_sink);
  auto* momo = app.add_subcommand("momo", "strong MOMO block statistics");
  add_common_options(momo, cfg, config_sink);
  auto* extract = app.add_subcommand("extract", "full-density orthogonality extraction");
  add_common_options(extract, cfg, config_sink);
  auto* bfree = app.add_subcommand("bfree", "B-free density experiment");
  add_common_options(bfree, cfg, config_sink);
  auto* pnt = app.add_subcommand("pnt", "Chowla-window to PNT-along-a-subsequence bridge");
  add_common_options(pnt, cfg, config_sink);
  auto* erg1 = app.add_subcommand("erg1", "empirical-measure subsequence extraction");
  add_common_options(erg1, cfg, config_sink);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sieve->parsed()) return run_sieve(cfg);
    if (average->parsed()) return run_average(cfg);
    if (momo->parsed()) return run_momo(cfg);
    if (extract->parsed()) return run_extract(cfg);
    if (bfree->parsed()) return run_bfree(cfg);
    if (pnt->parsed()) return run_pnt(cfg);
    if (erg1->parsed()) return run_erg1(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

}  // namespace momolab

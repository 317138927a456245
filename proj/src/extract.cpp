#include "momolab/extract.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "momolab/kahan.hpp"

namespace momolab {

namespace {

std::vector<int64_t> checkpoints_or_default(std::vector<int64_t> cps, int64_t horizon) {
  if (cps.empty()) cps = default_checkpoints(horizon);
  for (size_t i = 0; i + 1 < cps.size(); ++i)
    if (cps[i] >= cps[i + 1])
      throw std::invalid_argument("checkpoints must increase strictly");
  if (!cps.empty() && (cps.front() < 2 || cps.back() > horizon))
    throw std::invalid_argument("checkpoints must lie in [2, horizon]");
  return cps;
}

void attach_readings(DensityCertificate& cert) {
  cert.readings = log_density_trajectory(cert.set, cert.checkpoints);
}

}  // namespace

nlohmann::json DensityCertificate::to_json() const {
  nlohmann::json j;
  j["horizon"] = set.horizon();
  nlohmann::json runs = nlohmann::json::array();
  for (auto [lo, hi] : set.intervals()) runs.push_back({lo, hi});
  j["set_intervals"] = std::move(runs);
  j["checkpoints"] = checkpoints;
  j["readings"] = readings;
  j["witnesses"] = witnesses;
  j["failed"] = failed;
  j["failing_stage"] = failing_stage;
  return j;
}

DensityCertificate DensityCertificate::from_json(const nlohmann::json& j) {
  DensityCertificate cert;
  int64_t horizon = j.at("horizon").get<int64_t>();
  std::vector<std::pair<int64_t, int64_t>> runs;
  for (const auto& r : j.at("set_intervals")) runs.emplace_back(r[0].get<int64_t>(), r[1].get<int64_t>());
  cert.set = IndexSet::from_intervals(runs, horizon);
  cert.checkpoints = j.at("checkpoints").get<std::vector<int64_t>>();
  cert.readings = j.at("readings").get<std::vector<double>>();
  cert.witnesses = j.at("witnesses");
  cert.failed = j.at("failed").get<bool>();
  cert.failing_stage = j.at("failing_stage").get<int64_t>();
  return cert;
}

DensityCertificate markov_set(const RealSeq& G, double gamma, int64_t horizon,
                              std::vector<int64_t> checkpoints) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("markov_set: gamma must be in (0,1)");
  DensityCertificate cert;
  cert.checkpoints = checkpoints_or_default(std::move(checkpoints), horizon);
  const double threshold = std::sqrt(gamma);
  cert.set = IndexSet(horizon);
  for (int64_t n = 1; n <= horizon; ++n)
    if (G(n) < threshold) cert.set.insert(n);
  cert.witnesses = {{"kind", "markov_set"}, {"gamma", gamma}, {"sqrt_gamma", threshold}};
  attach_readings(cert);
  return cert;
}

DensityCertificate cesaro_threshold_set(const RealSeq& F, double gamma, int64_t horizon,
                                        std::vector<int64_t> checkpoints) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::domain_error("cesaro_threshold_set: gamma must be in (0,1)");
  DensityCertificate cert;
  cert.checkpoints = checkpoints_or_default(std::move(checkpoints), horizon);
  const double threshold = std::sqrt(gamma);
  cert.set = IndexSet(horizon);
  KahanSum running;
  for (int64_t N = 1; N <= horizon; ++N) {
    running.add(F(N));
    if (running.value() / static_cast<double>(N) <= threshold) cert.set.insert(N);
  }
  cert.witnesses = {{"kind", "cesaro_threshold_set"}, {"gamma", gamma}, {"sqrt_gamma", threshold}};
  attach_readings(cert);
  return cert;
}

int64_t markov_rescan_violations(const DensityCertificate& cert, const RealSeq& G) {
  const double threshold = cert.witnesses.at("sqrt_gamma").get<double>();
  int64_t violations = 0;
  for (int64_t n = 1; n <= cert.set.horizon(); ++n)
    if (cert.set.contains(n) != (G(n) < threshold)) ++violations;
  return violations;
}

int64_t cesaro_threshold_rescan_violations(const DensityCertificate& cert, const RealSeq& F) {
  const double threshold = cert.witnesses.at("sqrt_gamma").get<double>();
  int64_t violations = 0;
  KahanSum running;
  for (int64_t N = 1; N <= cert.set.horizon(); ++N) {
    running.add(F(N));
    bool member = running.value() / static_cast<double>(N) <= threshold;
    if (cert.set.contains(N) != member) ++violations;
  }
  return violations;
}

DensityCertificate diagonalize_sets(const std::vector<IndexSet>& family,
                                    const std::vector<int64_t>& checkpoints, int64_t horizon) {
  if (family.empty()) throw std::invalid_argument("diagonalize_sets: empty family");
  DensityCertificate cert;
  cert.checkpoints = checkpoints_or_default(checkpoints, horizon);
  const auto& cps = cert.checkpoints;

  // nest: M_k <- M_k ∩ M_{k-1} ∩ ...
  std::vector<IndexSet> nested;
  nested.reserve(family.size());
  for (size_t k = 0; k < family.size(); ++k)
    nested.push_back(k == 0 ? family[0].intersect(IndexSet::full(horizon))
                            : nested[k - 1].intersect(family[k]));

  // s_k: minimal index (>= s_{k-1}) with readings >= 1 - 1/k at every later
  // checkpoint
  std::vector<int64_t> switch_idx;
  int64_t prev = 0;
  int64_t completed = 0;
  for (size_t k = 1; k <= nested.size(); ++k) {
    const double threshold = 1.0 - 1.0 / static_cast<double>(k);
    auto readings = log_density_trajectory(nested[k - 1], cps);
    std::optional<int64_t> found;
    for (int64_t s = prev; s < static_cast<int64_t>(cps.size()); ++s) {
      bool tail_ok = true;
      for (int64_t j = s; j < static_cast<int64_t>(cps.size()); ++j)
        if (readings[static_cast<size_t>(j)] < threshold) {
          tail_ok = false;
          break;
        }
      if (tail_ok) {
        found = s;
        break;
      }
    }
    if (!found) {
      cert.failed = true;
      cert.failing_stage = static_cast<int64_t>(k);
      break;
    }
    switch_idx.push_back(*found);
    prev = *found;
    completed = static_cast<int64_t>(k);
  }

  cert.set = IndexSet(horizon);
  if (completed > 0) {
    auto copy_range = [&](const IndexSet& src, int64_t lo, int64_t hi) {
      for (int64_t n = src.next(lo); n != -1 && n <= hi; n = src.next(n + 1)) cert.set.insert(n);
    };
    copy_range(nested[0], 1, cps[static_cast<size_t>(switch_idx[0])]);
    for (int64_t k = 2; k <= completed; ++k)
      copy_range(nested[static_cast<size_t>(k - 1)],
                 cps[static_cast<size_t>(switch_idx[static_cast<size_t>(k - 2)])] + 1,
                 cps[static_cast<size_t>(switch_idx[static_cast<size_t>(k - 1)])]);
    // the deepest completed intersection continues to the horizon
    copy_range(nested[static_cast<size_t>(completed - 1)],
               cps[static_cast<size_t>(switch_idx.back())] + 1, horizon);
  }

  std::vector<int64_t> switch_points;
  for (int64_t s : switch_idx) switch_points.push_back(cps[static_cast<size_t>(s)]);
  cert.witnesses = {{"kind", "diagonalize_sets"},
                    {"stages", static_cast<int64_t>(family.size())},
                    {"completed_stages", completed},
                    {"switch_indices", switch_idx},
                    {"switch_points", switch_points}};
  attach_readings(cert);
  return cert;
}

DensityCertificate assemble_full_density_set(
    const std::vector<std::pair<int64_t, double>>& R,
    const std::vector<std::pair<int64_t, DensityCertificate>>& member_sets,
    const std::vector<int64_t>& h0_schedule, const std::vector<int64_t>& checkpoints,
    int64_t horizon) {
  if (member_sets.empty()) throw std::invalid_argument("assemble_full_density_set: no member sets");

  // prune elements below H^2
  std::vector<std::pair<int64_t, IndexSet>> pruned;
  for (const auto& [H, cert] : member_sets) {
    IndexSet s(horizon);
    const int64_t cut = H * H;
    for (int64_t n = cert.set.next(cut); n != -1 && n <= horizon; n = cert.set.next(n + 1))
      s.insert(n);
    pruned.emplace_back(H, std::move(s));
  }

  std::vector<IndexSet> family;
  for (int64_t h0 : h0_schedule) {
    IndexSet u(horizon);
    for (const auto& [H, s] : pruned)
      if (H >= h0) u = u.unite(s);
    family.push_back(std::move(u));
  }

  DensityCertificate cert = diagonalize_sets(family, checkpoints, horizon);
  cert.witnesses["kind"] = "assemble_full_density_set";
  cert.witnesses["h0_schedule"] = h0_schedule;
  nlohmann::json rj = nlohmann::json::array();
  for (const auto& [H, r] : R) rj.push_back({{"H", H}, {"R", r}, {"prune_below", H * H}});
  cert.witnesses["window_readings"] = std::move(rj);
  return cert;
}

BlockDiagonalization diagonalize_blocks(const std::vector<std::vector<int64_t>>& families,
                                        const std::function<double(int64_t, int64_t)>& g,
                                        double gamma, int64_t horizon) {
  if (families.empty()) throw std::invalid_argument("diagonalize_blocks: no families");
  if (!(gamma > 0.0)) throw std::domain_error("diagonalize_blocks: gamma must be positive");
  BlockDiagonalization out;
  out.gamma = gamma;
  const double target = gamma / 2.0;

  std::vector<int64_t> stitched;  // b_1, b_2, ...

  for (size_t li = 0; li < families.size(); ++li) {
    const int64_t level = static_cast<int64_t>(li) + 1;
    const auto& fam = families[li];
    if (fam.size() < 2 || fam.front() < 1) {
      out.failed = true;
      out.failing_stage = level;
      break;
    }

    // shift: first index into fam from which the stitched prefix can continue
    // with gaps >= level and strict growth past the current endpoint
    const int64_t prev_end = stitched.empty() ? 0 : stitched.back();
    std::optional<size_t> shift;
    for (size_t start = 0; start + 1 < fam.size(); ++start) {
      if (fam[start] < prev_end + level) continue;
      bool gaps_ok = true;
      for (size_t k = start; k + 1 < fam.size(); ++k)
        if (fam[k + 1] - fam[k] < level) {
          gaps_ok = false;
          break;
        }
      if (gaps_ok) {
        shift = start;
        break;
      }
    }
    if (!shift) {
      out.failed = true;
      out.failing_stage = level;
      break;
    }

    // cut: minimal K with (1/log b_{K+1}) * stage score >= gamma/2, summing g
    // over the stitched pairs of this stage (the seam pair included)
    std::vector<int64_t> candidate = stitched;
    if (stitched.empty()) candidate.push_back(fam[*shift]);
    KahanSum score;
    {
      // carry the score of already-stitched blocks
      for (size_t k = 0; k + 1 < stitched.size(); ++k) score.add(g(stitched[k], stitched[k + 1]));
    }
    std::optional<size_t> cut;
    for (size_t k = *shift + (stitched.empty() ? 1 : 0); k < fam.size(); ++k) {
      if (fam[k] > horizon) break;
      score.add(g(candidate.back(), fam[k]));
      candidate.push_back(fam[k]);
      double reading = score.value() / std::log(static_cast<double>(candidate.back()));
      if (reading >= target && candidate.size() >= 2) {
        cut = candidate.size();
        break;
      }
    }
    if (!cut) {
      out.failed = true;
      out.failing_stage = level;
      break;
    }
    stitched = std::move(candidate);
    out.stage_cuts.push_back(static_cast<int64_t>(stitched.size()) - 1);
    out.stage_shifts.push_back(static_cast<int64_t>(*shift));
  }

  if (stitched.size() >= 2) {
    // re-anchor at 1 if the first family did not start there
    if (stitched.front() != 1) stitched.insert(stitched.begin(), 1);
    out.partition.emplace(BlockPartition(stitched));
  }
  return out;
}

DensityCertificate davenport_erdos_set(const RealSeq& a, const std::vector<double>& eps_schedule,
                                       int64_t horizon, std::vector<int64_t> checkpoints) {
  if (eps_schedule.empty()) throw std::invalid_argument("davenport_erdos_set: empty eps schedule");
  for (size_t i = 0; i + 1 < eps_schedule.size(); ++i)
    if (eps_schedule[i] <= eps_schedule[i + 1])
      throw std::invalid_argument("davenport_erdos_set: eps schedule must decrease");

  DensityCertificate cert;
  cert.checkpoints = checkpoints_or_default(std::move(checkpoints), horizon);
  const auto& cps = cert.checkpoints;

  // limsup surrogate for l: max Cesàro mean over tail checkpoints
  std::vector<double> means(cps.size());
  {
    KahanSum acc;
    size_t next_cp = 0;
    for (int64_t n = 1; n <= horizon; ++n) {
      acc.add(a(n));
      while (next_cp < cps.size() && cps[next_cp] == n) {
        means[next_cp] = acc.value() / static_cast<double>(n);
        ++next_cp;
      }
    }
  }
  double ell = -1e300;
  std::vector<int64_t> tail_cps;
  for (size_t i = 0; i < cps.size(); ++i)
    if (cps[i] >= horizon / cps[i]) {  // cp^2 >= horizon
      ell = std::max(ell, means[i]);
      tail_cps.push_back(cps[i]);
    }

  // one pass builds every B_eps
  std::vector<IndexSet> b_eps(eps_schedule.size(), IndexSet(horizon));
  {
    KahanSum acc;
    for (int64_t n = 1; n <= horizon; ++n) {
      acc.add(a(n));
      double mean = acc.value() / static_cast<double>(n);
      for (size_t k = 0; k < eps_schedule.size(); ++k)
        if (mean > ell - eps_schedule[k]) b_eps[k].insert(n);
    }
  }

  // N_k: minimal checkpoint (strictly increasing) from which all later
  // readings of B_{eps_k} stay >= 1 - eps_k
  std::vector<int64_t> switch_idx;
  int64_t prev = 0;
  int64_t completed = 0;
  for (size_t k = 0; k < eps_schedule.size(); ++k) {
    auto readings = log_density_trajectory(b_eps[k], cps);
    std::optional<int64_t> found;
    for (int64_t s = prev; s < static_cast<int64_t>(cps.size()); ++s) {
      bool ok = true;
      for (int64_t j = s; j < static_cast<int64_t>(cps.size()); ++j)
        if (readings[static_cast<size_t>(j)] < 1.0 - eps_schedule[k]) {
          ok = false;
          break;
        }
      if (ok) {
        found = s;
        break;
      }
    }
    if (!found) {
      cert.failed = true;
      cert.failing_stage = static_cast<int64_t>(k) + 1;
      break;
    }
    switch_idx.push_back(*found);
    prev = *found;
    completed = static_cast<int64_t>(k) + 1;
  }

  // B: full below N_1, B_{eps_k} on [N_k, N_{k+1}), last stage to the horizon
  cert.set = IndexSet(horizon);
  if (completed > 0) {
    const int64_t n1 = cps[static_cast<size_t>(switch_idx[0])];
    for (int64_t n = 1; n < n1; ++n) cert.set.insert(n);
    for (int64_t k = 0; k < completed; ++k) {
      int64_t lo = cps[static_cast<size_t>(switch_idx[static_cast<size_t>(k)])];
      int64_t hi = (k + 1 < completed) ? cps[static_cast<size_t>(switch_idx[static_cast<size_t>(k + 1)])] - 1
                                       : horizon;
      const IndexSet& src = b_eps[static_cast<size_t>(k)];
      for (int64_t n = src.next(lo); n != -1 && n <= hi; n = src.next(n + 1)) cert.set.insert(n);
    }
  }

  std::vector<int64_t> switch_points;
  for (int64_t s : switch_idx) switch_points.push_back(cps[static_cast<size_t>(s)]);
  cert.witnesses = {{"kind", "davenport_erdos_set"},
                    {"ell", ell},
                    {"ell_tail_checkpoints", tail_cps},
                    {"eps_schedule", eps_schedule},
                    {"switch_points", switch_points},
                    {"completed_stages", completed}};
  attach_readings(cert);
  return cert;
}

IndexSet scaled_set(const IndexSet& A, int64_t m, int64_t horizon) {
  if (m < 1) throw std::invalid_argument("scaled_set: m must be >= 1");
  IndexSet out(horizon);
  for (int64_t j = A.next(1); j != -1; j = A.next(j + 1)) {
    if (j > horizon / m + 1) break;
    const int64_t lo = j * m;
    const int64_t hi = std::min(j * m + m - 1, horizon);
    for (int64_t n = std::max<int64_t>(lo, 1); n <= hi; ++n) out.insert(n);
  }
  return out;
}

DensityCertificate nested_scaled_set(const IndexSet& A, const std::vector<int64_t>& checkpoints,
                                     int64_t horizon, int64_t stages) {
  if (stages < 1) throw std::invalid_argument("nested_scaled_set: stages must be >= 1");
  std::vector<IndexSet> family;
  family.reserve(static_cast<size_t>(stages));
  for (int64_t m = 1; m <= stages; ++m) family.push_back(scaled_set(A, m, horizon));
  DensityCertificate cert = diagonalize_sets(family, checkpoints, horizon);
  cert.witnesses["kind"] = "nested_scaled_set";
  cert.witnesses["scale_stages"] = stages;
  return cert;
}

DilateCheckResult mertens_dilate_check(const IndexSet& A_tilde,
                                       const std::function<double(double)>& U, int64_t a,
                                       double eps, int64_t horizon) {
  if (a < 1) throw std::invalid_argument("mertens_dilate_check: a must be >= 1");
  if (!(eps > 0.0)) throw std::domain_error("mertens_dilate_check: eps must be positive");
  int64_t last_violation = 0;
  const int64_t top = std::min(horizon, A_tilde.horizon());
  for (int64_t x = A_tilde.next(2); x != -1 && x <= top; x = A_tilde.next(x + 1)) {
    KahanSum total;
    for (int64_t n = 1; n <= a; ++n)
      total.add(std::abs(U(static_cast<double>(x) / static_cast<double>(n))));
    if (total.value() > eps * static_cast<double>(x)) last_violation = x;
  }
  if (last_violation >= top) return {false, 0};
  return {true, std::max<int64_t>(2, last_violation + 1)};
}

}  // namespace momolab

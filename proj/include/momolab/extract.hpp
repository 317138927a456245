#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "momolab/averaging.hpp"
#include "momolab/dynsys.hpp"
#include "momolab/index_set.hpp"

namespace momolab {

// An extracted set together with its logarithmic-density trajectory and the
// construction witnesses (thresholds, switch points). Failure is a value:
// when a stage of a construction cannot be completed below the horizon, the
// partial set built so far is kept and the failing stage recorded.
struct DensityCertificate {
  IndexSet set;
  std::vector<int64_t> checkpoints;
  std::vector<double> readings;  // log_density_at(set, cp)
  nlohmann::json witnesses;
  bool failed = false;
  int64_t failing_stage = 0;  // 0 when complete

  nlohmann::json to_json() const;  // run-length interval encoding of the set
  static DensityCertificate from_json(const nlohmann::json& j);
};

// {n <= horizon : G(n) < sqrt(gamma)}, strict inequality. gamma in (0,1).
DensityCertificate markov_set(const RealSeq& G, double gamma, int64_t horizon,
                              std::vector<int64_t> checkpoints = {});

// {N <= horizon : (1/N) sum_{n<=N} F(n) <= sqrt(gamma)}, non-strict; one
// streaming pass over F.
DensityCertificate cesaro_threshold_set(const RealSeq& F, double gamma, int64_t horizon,
                                        std::vector<int64_t> checkpoints = {});

// Fresh-pass membership audits for the two set builders above; returns the
// number of indices whose membership disagrees with the defining predicate.
int64_t markov_rescan_violations(const DensityCertificate& cert, const RealSeq& G);
int64_t cesaro_threshold_rescan_violations(const DensityCertificate& cert, const RealSeq& F);

// Diagonal set assembly: the family is first nested by running intersection;
// stage k picks the minimal checkpoint index s_k (non-decreasing in k) from
// which every later reading of the nested M_k stays >= 1 - 1/k; the result is
//   M_1 ∩ [1, N_{s_1}]  ∪  ⋃_k ( M_k ∩ (N_{s_{k-1}}, N_{s_k}] )
// with the deepest completed intersection continuing past its switch point.
// Containment (recorded per stage): set ∩ [N_{s_k}, horizon] ⊆ M_k, exact.
DensityCertificate diagonalize_sets(const std::vector<IndexSet>& family,
                                    const std::vector<int64_t>& checkpoints, int64_t horizon);

// Per-H member sets (already built by cesaro_threshold_set with
// gamma = R(H)) are pruned of elements < H^2, unioned over H >= H0 for each
// H0 of the schedule, and the H0-indexed family is diagonalized.
DensityCertificate assemble_full_density_set(
    const std::vector<std::pair<int64_t, double>>& R,
    const std::vector<std::pair<int64_t, DensityCertificate>>& member_sets,
    const std::vector<int64_t>& h0_schedule, const std::vector<int64_t>& checkpoints,
    int64_t horizon);

// Diagonal block stitching. families[l][k] = b_{k+1, l+1} (0-based storage of
// the 1-based families); g(n, m) >= 0 scores a block [n, m). Stage l needs a
// shift N_l aligning family l past the previous prefix with gaps >= l, then a
// cut K_l with running score (1/log b_{K_l + 1}) * sum >= gamma / 2.
struct BlockDiagonalization {
  std::optional<BlockPartition> partition;  // empty only if stage 1 fails
  bool failed = false;
  int64_t failing_stage = 0;
  std::vector<int64_t> stage_cuts;    // K_l (count of stitched blocks after stage l)
  std::vector<int64_t> stage_shifts;  // N_l
  double gamma = 0.0;
};
BlockDiagonalization diagonalize_blocks(const std::vector<std::vector<int64_t>>& families,
                                        const std::function<double(int64_t, int64_t)>& g,
                                        double gamma, int64_t horizon);

// Upper-density extraction: l is the max Cesàro mean of `a` over the tail of
// the checkpoint list (cp^2 >= horizon); B_eps = {N : mean_N(a) > l - eps};
// N_k is the minimal checkpoint from which every later reading of B_{eps_k}
// stays >= 1 - eps_k; B agrees with B_{eps_k} on [N_k, N_{k+1}) exactly and
// is full below N_1.
DensityCertificate davenport_erdos_set(const RealSeq& a, const std::vector<double>& eps_schedule,
                                       int64_t horizon, std::vector<int64_t> checkpoints = {});

// {n <= horizon : floor(n/m) ∈ A}
IndexSet scaled_set(const IndexSet& A, int64_t m, int64_t horizon);

// diagonalize_sets over the running intersections of the scaled copies
// A_1 ∩ ... ∩ A_m, m = 1..stages.
DensityCertificate nested_scaled_set(const IndexSet& A, const std::vector<int64_t>& checkpoints,
                                     int64_t horizon, int64_t stages);

// Least X in [2, horizon] such that every integer x in [X, horizon] ∩ A_tilde
// satisfies sum_{n<=a} |U(x/n)| <= eps * x. x is sampled at the integers of
// A_tilde; U is evaluated at real arguments (the callee applies its floor).
struct DilateCheckResult {
  bool found = false;
  int64_t X = 0;
};
DilateCheckResult mertens_dilate_check(const IndexSet& A_tilde,
                                       const std::function<double(double)>& U, int64_t a,
                                       double eps, int64_t horizon);

}  // namespace momolab

#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "momolab/arith.hpp"
#include "momolab/dynsys.hpp"
#include "momolab/extract.hpp"

namespace momolab {

// Flat key=value experiment description. One struct serves every subcommand;
// unused keys keep their defaults. `echo()` round-trips the effective
// configuration into the outputs for reproducibility.
struct ExperimentConfig {
  std::string experiment = "extract";

  // system descriptor: kind ∈ {rotation, thuemorse, bfree, blocks}
  std::string system = "rotation";
  double alpha = 0.6180339887498949;  // (sqrt 5 - 1)/2
  double x0 = 0.0;
  int64_t m = 1;
  int64_t offset = 0;
  double w0_re = 1.0, w0_im = 0.0;
  double w1_re = -1.0, w1_im = 0.0;
  std::string base = "2,3";  // generator list or "prime-squares"
  std::string blocks = "squares";

  int64_t horizon = 1000000;
  std::vector<int64_t> checkpoints;  // empty -> default ladder
  std::vector<int64_t> h_schedule = {1, 2, 4, 8, 16, 32, 64};
  std::vector<int64_t> h0_schedule = {1, 2, 4};
  std::vector<double> eps_schedule = {0.1, 0.03, 0.01};
  int64_t scale_stages = 5;
  int64_t dilate_a = 10;
  double dilate_eps = 0.01;
  int64_t grid = 64;
  int64_t dictionary = 8;
  uint64_t seed = 20250810;
  std::string weights = "mu";

  // sieve subcommand
  int64_t n_max = 1000000;
  int64_t block_size = 1 << 16;

  std::string out_dir = "out";
  std::string out_file;

  static ExperimentConfig from_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  std::vector<int64_t> effective_checkpoints() const;
  nlohmann::json echo() const;  // sorted key -> string
};

struct PipelineReport {
  nlohmann::json summary;
  std::vector<DensityCertificate> certificates;
  bool failed = false;  // some extraction stage could not complete
};

// deterministic uniform [0,1) stream; avoids distribution-implementation
// dependence so reruns are bit-identical
class SeededUniform {
 public:
  explicit SeededUniform(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  double next();

 private:
  uint64_t state_;
};

ObservableSystem make_system(const ExperimentConfig& cfg);

// Window statistic R_f(H) over the H schedule, per-H member sets via
// the running-mean threshold with gamma = R_f(H), assembly of the full
// logarithmic-density set A, orthogonality readings along A and the
// per-member bound chain sqrt(gamma_H) + 2*M*bound/H.
PipelineReport sarnak_density_pipeline(const ExperimentConfig& cfg, const ArithTable& table);

// Empirical-measure subsequence extraction for a dictionary of observables
// along one orbit: per-observable square-window statistics of
// v_n = f(T^n x) - kappa_mean, one shared set via diagonalization, Cesàro
// convergence toward the kappa means along it.
PipelineReport erg1_pipeline(const std::vector<ObservableSystem>& dictionary,
                             const std::vector<std::complex<double>>& kappa_means,
                             const ExperimentConfig& cfg);

// Davenport–Erdős density experiment on the B-free indicator.
PipelineReport bfree_density_pipeline(const MultipleBase& base, const ExperimentConfig& cfg);

// Chowla-window readings for mu, extraction of A with small Mertens means
// along it, nested scaled set A~, the Mertens dilate witness X, and psi(x)/x
// at the largest members of A~.
PipelineReport pnt_pipeline(const ArithTable& table, const ExperimentConfig& cfg);

// Subcommands: sieve, average, momo, extract, bfree, pnt, erg1.
// Exit codes: 0 success, 1 usage error, 2 extraction failure (partial
// outputs are still written).
int cli_main(int argc, const char* const* argv);

}  // namespace momolab

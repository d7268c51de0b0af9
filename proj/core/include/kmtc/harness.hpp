#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmtc/family.hpp"
#include "kmtc/serialize.hpp"
#include "kmtc/stats.hpp"

namespace kmtc {

// Bad or inconsistent user input (config file, flags); maps to exit code 1.
// Numeric failures (NumericError) map to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ProductFamily family;          // resolved; standardized unless raw=true
  bool raw = false;
  unsigned N = 8;
  std::vector<unsigned> N_list;  // sweep; empty means {N}
  std::vector<double> tau_list;  // sweep; empty means the family's own law
  std::uint64_t replicates = 200;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  GridPolicy grid;
  std::size_t conditional_points = 1024;
  std::uint64_t target_count = 0;
  unsigned jobs = 1;             // execution only; never serialized
  unsigned s_max = 3;            // compose
  std::uint64_t decompose_m = 1; // decompose prefix index; depth comes from N
  unsigned check_levels = 4;     // check: block levels 1..check_levels
  std::uint64_t probe_reps = 100000;
  double probe_tau = 0.0;        // 0: use the estimated tau_hat
};

RunConfig run_config_from_json(const Json& j);
// Resolved config for audit sidecars. Deliberately excludes jobs so outputs
// are byte-identical across parallelism settings.
Json run_config_to_json(const RunConfig& cfg);

struct SweepRow {
  double tau = 0.0;
  unsigned N = 0;
  unsigned d = 1;
  std::uint64_t replicates = 0;
  double delta_mean = 0.0;
  double delta_median = 0.0;
  double delta_q90 = 0.0;
  double delta_q99 = 0.0;
  double delta_max = 0.0;
  std::vector<double> lambdas;          // exponential-moment grid
  std::vector<double> exp_moments;      // E exp(lambda * delta / (d^{3/2} tau))
  std::vector<double> exp_moment_logs;  // log of the same; always finite
  std::vector<bool> saturated;          // overflow or single-sample dominance
  double c2 = 0.0;                  // tail-rate fit constants
  double c3 = 0.0;
  double tail_r2 = 0.0;
  double tail_threshold = 0.0;
  std::size_t tail_points = 0;
  bool tail_fit_ok = false;
  std::uint64_t underflow_total = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

SweepResult run_mc_sweep(const RunConfig& cfg);

struct RatePoint {
  unsigned N = 0;
  double delta_median = 0.0;
  double delta_mean = 0.0;
  double delta_q90 = 0.0;
};

struct RateResult {
  std::vector<RatePoint> points;
  LinearFit log_fit;    // median vs N
  LinearFit sqrt_fit;   // median vs sqrt(2^N)
  bool linear_wins = false;
  double first_ratio = 0.0;  // median / 2^{N/2} at the smallest N
  double last_ratio = 0.0;   // ... at the largest N
};

RateResult run_rate(const RunConfig& cfg);

// Subcommand drivers; return the process exit code (0 ok, 1 probe/validation
// failure, 2 numeric failure handled by the caller).
int cmd_couple(const RunConfig& cfg);
int cmd_mc(const RunConfig& cfg);
int cmd_rate(const RunConfig& cfg);
int cmd_decompose(const RunConfig& cfg, std::ostream& os);
int cmd_check(const RunConfig& cfg);
int cmd_compose(const RunConfig& cfg);

}  // namespace kmtc

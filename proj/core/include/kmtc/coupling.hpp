#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "kmtc/family.hpp"
#include "kmtc/grid.hpp"
#include "kmtc/rng.hpp"

namespace kmtc {

struct EngineConfig {
  unsigned N = 8;  // sequence length 2^N, N in [1, 14]
  unsigned d = 1;  // coordinates, in [1, 8]
  ProductFamily family;
  GridPolicy grid;
  double inversion_tol = 1e-8;
  std::size_t conditional_points = 1024;
  // 0: all 2^N summands follow the family. Otherwise the first target_count
  // do and the rest are standard Gaussian padding (chained runs use this to
  // fill blocks up to a power of two).
  std::uint64_t target_count = 0;
};

// Per-coordinate law of one dyadic block: analytic Gaussian or tabulated.
struct LevelLaw {
  bool gaussian = false;
  double var = 0.0;
  GridDensity density;
};

// Gaussian-side dyadic sums. level[n] holds the 2^{N-n} block sums at level n,
// row-major over (block, coordinate); level[0] are the summands themselves.
struct GaussianTree {
  unsigned N = 0;
  unsigned d = 0;
  std::vector<std::vector<double>> level;

  double v(unsigned n, std::uint64_t k, unsigned c) const {
    return level[n][k * d + c];
  }
  // Difference of the two half-blocks of block (n, k), n >= 1.
  double vtilde(unsigned n, std::uint64_t k, unsigned c) const {
    return level[n - 1][2 * k * d + c] - level[n - 1][(2 * k + 1) * d + c];
  }
};

struct CouplingOutput {
  unsigned N = 0;
  unsigned d = 0;
  double delta = 0.0;
  std::uint64_t underflow_count = 0;
  std::vector<double> x;     // 2^N rows, d columns (row-major), when kept
  std::vector<double> y;
  std::vector<double> disc;  // per-row max-norm of the prefix difference
};

struct Workspace {
  std::vector<std::vector<double>> u;  // target-side tree, same layout as V
  std::vector<std::vector<double>> v;
  std::vector<double> cond;            // conditional-density scratch
  std::vector<double> carry;           // per-coordinate running sum of x - y
};

// Dyadic quantile-coupling engine for a product family. All per-level block
// laws are cached at construction (2^j-fold convolutions per coordinate);
// Gaussian coordinates short-circuit to analytic transforms. One run draws
// the Gaussian side bottom-up, maps the top block through the target quantile
// function, then walks levels top-down drawing each half-block difference
// from its conditional law at the Gaussian side's quantile position.
class CouplingEngine {
 public:
  explicit CouplingEngine(EngineConfig cfg);

  const EngineConfig& config() const { return cfg_; }
  std::uint64_t count() const { return std::uint64_t{1} << cfg_.N; }
  std::uint64_t target_count() const {
    return cfg_.target_count == 0 ? count() : cfg_.target_count;
  }

  GaussianTree draw_gaussian_side(RngStream& g) const;
  Workspace make_workspace() const;

  void run(RngStream& g, Workspace& ws, CouplingOutput& out,
           bool keep_paths) const;
  CouplingOutput run_replicate(std::uint64_t seed, std::uint64_t replicate,
                               bool keep_paths = true) const;

  // Law of coordinate c of block (n, k); k matters only for padded runs.
  const LevelLaw& block_law(unsigned c, unsigned n, std::uint64_t k) const;

  // Top and level transforms on their own, for cross-checks. These go through
  // the public conditional_diff_cdf / invert_cdf route; run() uses an
  // identical-arithmetic scratch-buffer path.
  double top_value(unsigned c, double v) const;
  double level_value(unsigned c, unsigned n, std::uint64_t k, double s,
                     double vtilde, std::uint64_t* underflows) const;

 private:
  struct CoordCache {
    bool pure_gaussian = false;
    std::vector<LevelLaw> pure;                       // [0 .. N]
    std::map<std::pair<unsigned, std::uint64_t>, LevelLaw> mixed;
    std::vector<std::optional<GridDensity>> gauss_tab;  // per level, padded runs
    GridCdf top_cdf;
  };

  const GridDensity& table_of(const LevelLaw& law, unsigned c,
                              unsigned level) const;
  double level_value_ws(unsigned c, unsigned n, std::uint64_t k, double s,
                        double vtilde, std::vector<double>& cond,
                        std::uint64_t* underflows) const;
  double gaussian_pair_value(double mu, double sd, double vtilde,
                             double sigma_v) const;

  EngineConfig cfg_;
  std::vector<CoordCache> coord_;  // one per distinct coordinate spec
  std::vector<std::size_t> coord_index_;  // coordinate -> cache slot
  std::vector<LevelLaw> gauss_analytic_;  // N(0, 2^n) for padding blocks
};

}  // namespace kmtc

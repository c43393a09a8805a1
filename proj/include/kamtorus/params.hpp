#pragma once

// Parameter sets: samples of a box in R^N, Cantor-set filtering by the KAM
// iteration, and excluded-measure estimates.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kamtorus/kam.hpp"

namespace kamtorus {

struct Box {
  std::vector<std::pair<double, double>> axes;

  int dim() const noexcept { return static_cast<int>(axes.size()); }
  double volume() const noexcept;
  bool contains(std::span<const double> x) const noexcept;
};

enum class SamplingKind {
  kUniform,  // tensor grid of cell centres; count must be a perfect N-th power
  kLattice,  // rank-1 Kronecker lattice with generalized golden-ratio generators
  kHalton,
  kRandom,  // uniform pseudo-random, seeded
};

SamplingKind parse_sampling(const std::string& name);
std::string to_string(SamplingKind kind);

std::vector<std::vector<double>> sample_box(const Box& box, SamplingKind kind, std::size_t count,
                                            std::uint64_t seed = 0);

enum class Outcome { kConverged, kExcluded, kDiverged };

std::string to_string(Outcome o);

struct PointResult {
  std::vector<double> xi;
  Outcome outcome = Outcome::kDiverged;
  std::vector<double> alpha_inf;  // empty unless converged
  int excluded_step = -1;
  int iterations = 0;
  int K_check = 0;
  bool in_final_set = false;  // converged and diophantine at 2 gamma up to K_check
};

struct ParamGrid {
  Box box;  // domain whose volume scales the measure
  SamplingKind kind = SamplingKind::kLattice;
  std::vector<std::vector<double>> samples;
  std::vector<PointResult> results;
  double gamma = 0.0;
  std::vector<std::string> warnings;

  static ParamGrid make(const Box& box, SamplingKind kind, std::size_t count,
                        std::uint64_t seed = 0);
};

using PerturbationBuilder = std::function<FourierField(std::span<const double> xi)>;

struct SweepOptions {
  int threads = 1;
  int K_check = 0;  // zero: 4 * max(largest K_eff used, K0) per point
};

/// Runs kam_iterate at every sample. Failures are recorded, not raised.
void sweep(ParamGrid& grid, const PerturbationBuilder& f0, const SchemeConstants& c,
           const SweepOptions& options = {});

struct MeasureEstimate {
  std::size_t samples = 0;
  std::size_t excluded = 0;
  double fraction = 0.0;
  double measure = 0.0;      // fraction times box volume
  double half_width = 0.0;   // 95% binomial half-width, volume units
};

/// Lebesgue measure of the samples outside the final set. Throws ShapeError
/// on an empty or unswept grid.
MeasureEstimate measure_excluded(const ParamGrid& grid);

struct LadderRow {
  double gamma = 0.0;
  MeasureEstimate estimate;
};

struct GammaLadder {
  std::vector<LadderRow> rows;
  double slope = 0.0;  // least-squares slope of log fraction against log gamma
  bool monotone = true;  // fractions non-increasing as gamma decreases
};

/// Sweeps the same samples for each gamma.
GammaLadder gamma_ladder(const ParamGrid& grid, const PerturbationBuilder& f0,
                         const SchemeConstants& c, std::span<const double> gammas,
                         const SweepOptions& options = {});

double loglog_slope(std::span<const double> x, std::span<const double> y);

/// omega -> m0(omega) with the hypothesis constants inf|m0| >= c_lower and
/// |m0|^lip <= C_upper |m0|^sup.
struct FrequencyMap {
  std::function<std::vector<double>(std::span<const double>)> m0;
  double c_lower = 0.0;
  double C_upper = 1.0;
};

struct FrequencyMapCheck {
  double inf_norm = 0.0;
  double sup_norm = 0.0;
  double lip = 0.0;
  bool ok = true;
};

FrequencyMapCheck check_frequency_map(const FrequencyMap& m, const std::vector<std::vector<double>>& omegas);

/// Samples xi = (omega, m0(omega)); grid.box stays the omega box. A failed
/// hypothesis check is recorded in warnings.
ParamGrid restrict_to_curve(const ParamGrid& omega_grid, const FrequencyMap& m);

/// Measure of the converged samples with |alpha_inf . k| <= 2 gamma / <k>^tau.
double resonant_width(const ParamGrid& grid, std::span<const int> k, double gamma, double tau,
                      int split = 0);

/// Largest quotient |alpha_inf(a) - alpha_inf(b)| / |a - b| over converged
/// samples and their nearest converged neighbour.
double alpha_lipschitz(const ParamGrid& grid);

}  // namespace kamtorus

#pragma once

// Straightening of (xi + f(theta)) d/dtheta on T^N by a quadratic KAM scheme.

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "kamtorus/diffeo.hpp"
#include "kamtorus/fourier.hpp"

namespace kamtorus {

struct SchemeConstants {
  int N = 2;
  double tau = 4.0;
  double s0 = 4.0;
  double s1 = 113.0;
  double gamma = 1e-2;
  int K0 = 8;
  double chi = 1.5;
  double mu = 29.0;
  double rho = 18.0;
  double kappa = 45.0;
  double b = 90.0;

  int kbox = 32;  // working truncation of f_n, g_n and h_n
  int max_steps = 12;
  double convergence_tol = 1e-11;  // on delta_n(s0)
  double divergence_guard = 1e3;   // allowed growth of delta_n(s0) over delta_0(s0)

  // Smallness thresholds. Checked and reported; enforced only on request.
  double delta_step = 1e-2;
  double eta_star = 1e-2;
  bool enforce_smallness = false;

  // Diophantine weight: <k> = max(1, |k|_1) when zero, otherwise
  // max(1, |l|_1, |j|_1) for k = (l, j) with l of this length.
  int weight_split = 0;

  DiffeoSettings diffeo;

  /// Defaults satisfying every constraint for dimension N.
  static SchemeConstants defaults(int N);

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
};

/// <k> for the chosen split.
double diophantine_weight(std::span<const int> k, int split) noexcept;

/// K_n = ceil(K0^(chi^n)), saturated at INT_MAX / 4.
int truncation_schedule(const SchemeConstants& c, int n);

struct Resonance {
  MultiIndex k;
  double divisor = 0.0;    // |alpha . k|
  double threshold = 0.0;  // gamma / <k>^tau
};

/// First k (in a fixed enumeration order) with 0 < |k|_1 <= K and
/// |alpha . k| <= gamma / <k>^tau.
std::optional<Resonance> first_resonance(std::span<const double> alpha, double gamma, double tau,
                                         int K, int split = 0);

bool diophantine_ok(std::span<const double> alpha, double gamma, double tau, int K, int split = 0);

/// g_k = -f_k / (i alpha.k) for 0 < |k|_1 <= K, zero elsewhere. Throws
/// SmallDivisorError on a divisor at or below gamma / <k>^tau.
FourierField solve_homological(const FourierField& f, std::span<const double> alpha, int K,
                               double gamma, double tau, int split = 0);

/// || alpha . d g + Pi_K f - <f> ||_0
double homological_residual(const FourierField& f, const FourierField& g,
                            std::span<const double> alpha, int K);

struct StepDiagnostics {
  double smallness = 0.0;  // gamma^-1 K^(2 tau + 2 s0 + 1) ||f||_s0
  bool smallness_ok = true;
  double g_c1 = 0.0;
  double homological_residual = 0.0;
  double norm_plus_s0 = 0.0;
  double norm_plus_s1 = 0.0;
};

struct KamStepResult {
  std::vector<double> alpha_plus;
  FourierField f_plus;
  TorusDiffeo phi;  // Id + g with cached inverse
  StepDiagnostics diag;
};

/// One step: alpha_+ = alpha + <f>, f_+ = (Pi_K^perp f + f . d g) o Phi^{-1}.
KamStepResult kam_step(std::span<const double> alpha, const FourierField& f,
                       const SchemeConstants& c, int K);

struct KamState {
  int n = 0;
  int K = 0;      // nominal K_n
  int K_eff = 0;  // K_n capped by the workspace
  std::vector<double> alpha;
  FourierField f;  // f_n
  FourierField g;  // displacement of the step that produced f_n (zero at n = 0)
  FourierField h;  // accumulated displacement of Psi_n
  double delta_s0 = 0.0;
  double delta_s1 = 0.0;
  bool survived = true;
};

struct StepRecord {
  int n = 0;
  int K = 0;
  int K_eff = 0;
  std::vector<double> alpha;
  double delta_s0 = 0.0;
  double delta_s1 = 0.0;
  double smallness = 0.0;
  double g_c1 = 0.0;
  double homological_residual = 0.0;
};

enum class KamStatus { kConverged, kExcluded };

struct StraighteningResult {
  KamStatus status = KamStatus::kConverged;
  std::vector<double> xi;
  std::vector<double> alpha_inf;  // last alpha_n when excluded
  TorusDiffeo psi;                // theta -> theta + beta(theta)
  int iterations = 0;
  double final_delta = 0.0;  // delta_n(s0) at exit
  int max_K_eff = 0;         // largest truncation actually used
  std::vector<StepRecord> steps;
  double initial_smallness = 0.0;  // gamma^-1 ||f0||_s1
  bool initial_smallness_ok = true;
  std::optional<Resonance> resonance;  // set when excluded
  int excluded_step = -1;

  bool converged() const noexcept { return status == KamStatus::kConverged; }
  const FourierField& beta() const noexcept { return psi.displacement(); }
};

using KamObserver = std::function<void(const KamState&)>;

/// Runs kam_step along the K_n schedule from alpha_0 = xi, f_0 = f0.
/// Returns converged or excluded; throws DivergenceError when the scheme
/// stalls or blows up.
StraighteningResult kam_iterate(std::span<const double> xi, const FourierField& f0,
                                const SchemeConstants& c, const KamObserver& observer = {});

/// Diophantine check at 2 gamma up to |k|_1 <= K_check.
bool check_final_set(std::span<const double> alpha_inf, const SchemeConstants& c, int K_check);

/// sup over a grid of |xi + f0 + D beta (xi + f0) - alpha_inf|.
double conjugacy_residual(std::span<const double> xi, const FourierField& f0,
                          const FourierField& beta, std::span<const double> alpha_inf);

}  // namespace kamtorus

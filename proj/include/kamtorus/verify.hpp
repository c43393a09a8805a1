#pragma once

// Oracles that do not go through the spectral solvers: ODE integration of
// the field, rotation vectors, conjugacy along trajectories, and ratio audits.

#include <span>
#include <string>
#include <vector>

#include "kamtorus/kam.hpp"

namespace kamtorus {

struct FlowTrace {
  std::vector<double> theta0;
  std::vector<double> times;
  std::vector<double> trajectory;  // unwrapped, point-major (N entries per time)
  double step = 0.0;
  double max_local_error = 0.0;  // step-doubling estimate at the recorded samples

  int dim() const noexcept { return static_cast<int>(theta0.size()); }
  std::span<const double> at(std::size_t i) const {
    return std::span<const double>(trajectory).subspan(i * theta0.size(), theta0.size());
  }
  std::span<const double> last() const { return at(times.size() - 1); }
};

/// RK4 for d theta/dt = alpha + f(theta) from theta0 over [0, T]; T may be
/// negative. The step is |dt| shrunk so that it divides |T|. Every
/// sample_every-th step is recorded (the end point always is).
/// Throws ConfigError for dt <= 0 and ConsistencyError on non-finite values.
FlowTrace flow(const VectorFieldOnTorus& x, std::span<const double> theta0, double T, double dt,
               int sample_every = 1);

/// (theta(T) - theta0) / T.
std::vector<double> rotation_vector(const VectorFieldOnTorus& x, std::span<const double> theta0,
                                    double T = 1e4, double dt = 1e-2);

/// Largest componentwise distance on the torus, |a - b| reduced mod 2 pi.
double torus_distance(std::span<const double> a, std::span<const double> b);

/// Integrates X0 from theta0 and measures sup_t dist(Psi(theta(t)), Psi(theta0) + alpha_inf t)
/// at every recorded step. Psi straightens X0, so the two agree exactly.
/// Throws ConsistencyError for an excluded result.
double conjugacy_flow_check(const StraighteningResult& result, const VectorFieldOnTorus& x0,
                            std::span<const double> theta0, double T, double dt = 1e-2,
                            int sample_every = 10);

struct TameRow {
  double eps = 0.0;
  double s = 0.0;
  double beta_norm = 0.0;
  double f0_norm = 0.0;  // ||eps f0||_{s + 2 tau + 4}
  double ratio = 0.0;    // beta_norm * gamma / f0_norm
};

struct TameAudit {
  std::vector<TameRow> rows;  // converged eps only
  std::vector<double> failed_eps;
  double max_ratio = 0.0;
  double stability = 1.0;  // worst max/min across eps over all s
  bool stable = true;      // stability <= 10 and nothing failed
};

/// Straightens xi + eps f0 for every eps and tabulates the tame ratios.
TameAudit tame_audit(std::span<const double> xi, const FourierField& f0, const SchemeConstants& c,
                     std::span<const double> eps_list, std::span<const double> s_list);

struct LipschitzReport {
  bool comparable = true;  // false when either run was excluded or diverged
  std::string note;
  double d_alpha = 0.0;    // |alpha_a - alpha_b|
  double d_mean = 0.0;     // |<f0_a> - <f0_b>|
  double alpha_bound = 0.0;  // 2 d_mean + 1e-9
  bool alpha_ok = false;
  double d_beta = 0.0;  // ||beta_a - beta_b||_{s0 - 1}
  double d_f0 = 0.0;    // ||f0_a - f0_b||_{s0 + b}
  double constant = 0.0;  // d_beta * gamma / d_f0
};

LipschitzReport lipschitz_audit(std::span<const double> xi, const FourierField& f0_a,
                                const FourierField& f0_b, const SchemeConstants& c);

struct LipschitzLadder {
  std::vector<double> amplitudes;
  std::vector<LipschitzReport> reports;
  double stability = 1.0;  // max/min of the measured constants
  bool ok = false;         // all comparable, alpha bounds hold, stability <= threshold
};

/// Pairs f0 with f0 + a * direction for each amplitude a.
LipschitzLadder lipschitz_ladder(std::span<const double> xi, const FourierField& f0,
                                 const FourierField& direction, const SchemeConstants& c,
                                 std::span<const double> amplitudes, double threshold = 2.0);

}  // namespace kamtorus

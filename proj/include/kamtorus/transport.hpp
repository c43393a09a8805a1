#pragma once

// Quasi-periodic transport  u_t + (zeta + a0(omega t, x)) . u_x = 0  on T^d,
// viewed as the field omega d/dphi + (zeta + a0(phi, x)) d/dx on T^(nu+d).

#include <span>
#include <vector>

#include "kamtorus/kam.hpp"

namespace kamtorus {

struct TransportOperator {
  int nu = 1;
  int d = 1;
  std::vector<double> omega;  // length nu
  std::vector<double> zeta;   // length d
  FourierField a0;            // T^(nu+d) -> R^d

  int N() const noexcept { return nu + d; }
  std::vector<double> xi() const;
  /// (0, a0) as a field T^N -> R^N in a box of radius kbox.
  FourierField embedded(int kbox) const;
  /// Throws ShapeError on inconsistent sizes.
  void validate() const;
};

struct ReducedTransport {
  StraighteningResult kam;  // on T^N, weight split at nu
  std::vector<double> m_inf;
  FourierField beta;  // x-components of the conjugacy, T^N -> R^d
  double structural_defect = 0.0;  // largest phi-component seen in f_n, g_n, h_n
  double reduction_residual = 0.0;

  bool excluded() const noexcept { return !kam.converged(); }
};

/// Straightens the transport field. The constants' weight split is set to nu.
/// Throws ConsistencyError if a phi-component above 1e-12 ever appears.
ReducedTransport reduce(const TransportOperator& op, SchemeConstants c);

struct CharacteristicsSettings {
  int resolution = 64;  // grid points per x-axis
  double max_step = 0.01;
  int threads = 1;  // nodes are independent
};

struct NormHistory {
  std::vector<double> times;
  std::vector<double> s_list;
  std::vector<std::vector<double>> norms;  // norms[t][s]

  /// Least-squares slope of norm against time for s_list[s_index].
  double slope(std::size_t s_index) const;
  /// max - min over time for s_list[s_index].
  double spread(std::size_t s_index) const;
};

/// u(t, x) at the given points (point-major in T^d), by backward RK4 along
/// dx/ds = zeta + a0(omega s, x) from s = t to 0.
std::vector<double> transport_solution(const TransportOperator& op, const FourierField& u0,
                                       double t, std::span<const double> points,
                                       const CharacteristicsSettings& settings = {});

/// H^s_x norms of u(t) on t_grid, from grid values of u(t).
NormHistory evolve_characteristics(const TransportOperator& op, const FourierField& u0,
                                   std::span<const double> t_grid, std::span<const double> s_list,
                                   const CharacteristicsSettings& settings = {});

/// Same for v(t, y) = u(t, y + q(omega t, y)), with (0, q) the inverse
/// displacement of the conjugacy. v only translates, so its norms are constant.
NormHistory evolve_reduced(const TransportOperator& op, const ReducedTransport& red,
                           const FourierField& u0, std::span<const double> t_grid,
                           std::span<const double> s_list,
                           const CharacteristicsSettings& settings = {},
                           const DiffeoSettings& diffeo = {});

struct ForcedSolution {
  FourierField b;  // scalar on T^N
  double c = 0.0;
  double residual = 0.0;  // sup |omega . b_phi + (zeta + a0) . b_x + f - c|
};

/// Solves omega . d_phi b + (zeta + a0) . d_x b + f = c. Refuses (with
/// SmallDivisorError) any mode of the reduced problem whose divisor
/// omega.l + m_inf.j is at or below 2 gamma / <l, j>^tau.
ForcedSolution forced_solve(const TransportOperator& op, const FourierField& f,
                            const ReducedTransport& red, const SchemeConstants& c);

/// sup |omega . d_phi b + (zeta + a0) . d_x b + f - c| on a grid.
double forced_residual(const TransportOperator& op, const FourierField& f, const FourierField& b,
                       double c);

}  // namespace kamtorus

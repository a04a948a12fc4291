// Exact squared 2-Wasserstein distances between equal-size point clouds
// and the synchronous-coupling experiment.
//
// For empirical measures with N atoms each, W₂² is an assignment
// problem: min over permutations of (1/N)·Σ|a_i − b_{π(i)}|².  The
// solver is the exact O(N³) shortest-augmenting-path method, so the
// dominance inequality W₂² ≤ coupling bound can be asserted to machine
// precision rather than approximated.
//
// The coupling experiment drives three systems with shared randomness:
// the width-N interacting system, N mean-field copies that feel the
// drift of an independent width-N_ref proxy system but share the
// width-N system's Brownian increments and initial points, and the
// proxy itself.  The synchronized pairing is a legitimate transport
// plan, hence sync_bound(t) = (1/N)Σ|θ_i − θ̄_i|² dominates W₂² at
// every time.
#ifndef MFLAB_TRANSPORT_HPP
#define MFLAB_TRANSPORT_HPP

#include <cstdint>
#include <vector>

#include "mflab/dynamics.hpp"
#include "mflab/model.hpp"

namespace mflab::transport {

/// Default width cap of the exact assignment solver.
inline constexpr Index kAssignmentCap = 2048;

/// Exact 1D squared transport cost by sorting: (1/N)Σ(a_(i) − b_(i))².
double w2_squared_1d(const Vector& a, const Vector& b);

/// Exact minimal assignment cost of the square cost matrix (not
/// divided by N); the building block under w2_squared.
double assignment_cost(const Matrix& cost);

/// Exact squared 2-Wasserstein distance between two equal-width point
/// clouds given as rows of A and B.
double w2_squared_points(const Matrix& a, const Matrix& b,
                         Index cap = kAssignmentCap);

/// Exact squared 2-Wasserstein distance between two ensembles.
double w2_squared(const model::Ensemble& a, const model::Ensemble& b,
                  Index cap = kAssignmentCap);

/// Time series of one synchronous-coupling run.
struct CouplingRecord {
  Index n_particles = 0;  // N
  Index n_ref = 0;        // width of the mean-field proxy system
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> sync_bound;     // (1/N)Σ|θ_i − θ̄_i|²
  std::vector<double> w2sq_exact;     // empty when N exceeds the cap
  std::vector<double> weighted_norm;  // moment monitor of the main system
};

/// Runs the three coupled systems for cfg.steps steps and records the
/// synchronous bound, the exact W₂² (when N ≤ cap), and the empirical
/// weighted moment norm of the main system every record_every steps.
/// Requires n_ref ≥ 8·N so the proxy bias sits an order below the
/// measured O(N⁻¹) signal.
CouplingRecord coupled_run(Index n_particles, Index n_ref,
                           const dynamics::DynamicsConfig& cfg,
                           const model::ActivationSpec& spec,
                           const model::TargetSpec& target,
                           Index record_every, Index cap = kAssignmentCap);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log y against log x.  Requires ≥ 3 strictly
/// positive points.
LogLogFit fit_loglog(const Vector& xs, const Vector& ys);

}  // namespace mflab::transport

#endif  // MFLAB_TRANSPORT_HPP

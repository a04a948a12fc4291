// End-to-end experiments measuring the four error components of the
// width / horizon / sample / temperature decomposition
//
//   risk(N, T, n, λ) ≲ e_poc(N) + e_opt(T) + e_stat(n) + κ(λ) + cross terms:
//
// a particle-count slope from the synchronous coupling, an exponential
// optimization-decay fit, an empirical-vs-population excess-risk slope,
// a threshold sweep over temperatures, the non-realizability floor
// experiment, and the Cauchy–Schwarz bookkeeping of the cross terms.
#ifndef MFLAB_HARNESS_HPP
#define MFLAB_HARNESS_HPP

#include <cstdint>
#include <vector>

#include "mflab/dictionary.hpp"
#include "mflab/dynamics.hpp"
#include "mflab/model.hpp"
#include "mflab/transport.hpp"

namespace mflab::harness {

/// A measured response grid with a log-log slope fit.
struct SlopeGrid {
  Vector xs;       // grid abscissae (widths N or sample sizes n)
  Vector means;    // mean response at each abscissa
  Vector stderrs;  // Monte Carlo s.e. of each mean (0 when reps == 1)
  bool wide_ci = false;    // single repetition: spread not estimable
  bool floor = false;      // some means sat below the Monte Carlo noise
  bool fit_valid = false;  // ≥ 3 usable points entered the fit
  Vector fit_xs;           // abscissae the fit actually used
  transport::LogLogFit fit;
};

// ---------------------------------------------------------------------------
// Particle-count component: sync_bound(T) vs N
// ---------------------------------------------------------------------------

struct PocOptions {
  double lambda = 0.05;
  double horizon = 0.5;  // T
  double dt = 0.005;
  Index batch_size = 256;
  Index ref_width = 4096;  // width of the independent mean-field proxy
  Index reps = 8;
  Index record_every = 10;  // snapshot cadence inside each coupled run
  Index w2_cap = transport::kAssignmentCap;
  std::uint64_t seed = 0;
  Index threads = 1;
};

struct PocReport {
  SlopeGrid grid;  // N ↦ mean terminal sync_bound
  // Every underlying coupling record, grid-major then repetition-minor;
  // downstream checks (dominance, moment monitoring) reuse these
  // instead of re-running the experiment.
  std::vector<transport::CouplingRecord> records;
};

/// Runs reps synchronous couplings per width and fits the slope of the
/// mean terminal sync_bound against N on log-log axes.  Requires a
/// near-geometric grid of ≥ 4 increasing widths.  Job (grid i, rep r)
/// runs on the derived seed key(seed; scratch stream, i, r), so the
/// result is independent of the worker count.
PocReport estimate_e_poc(const model::ActivationSpec& spec,
                         const model::TargetSpec& target,
                         const std::vector<Index>& n_grid,
                         const PocOptions& opt);

// ---------------------------------------------------------------------------
// Optimization component: excess risk vs horizon
// ---------------------------------------------------------------------------

struct DecayReport {
  Vector times;  // recorded horizons
  Vector risks;  // Monte Carlo risk at each horizon
  double plateau = 0.0;   // mean of the last 10% of the series
  bool no_decay = false;  // tail failed to decrease; alpha_hat meaningless
  double alpha_hat = 0.0;  // fitted exponential decay rate
  double r2 = 0.0;
  Vector fit_times;   // tail-window points entering the fit
  Vector fit_excess;  // their excess over the plateau
};

/// The fitting stage alone, exposed so synthetic series can exercise
/// it: plateau = mean of the last 10% of the series; usable window =
/// points past a 10% burn-in whose excess over the plateau clears
/// max(3·sd(last 10%), 1e−10·risks[0]); α̂ = −slope of log-excess vs
/// time.  Fewer than 4 usable points, or a nonnegative slope, sets
/// no_decay instead of reporting a rate.
DecayReport fit_exponential_tail(const Vector& times, const Vector& risks);

struct OptOptions {
  double lambda = 0.05;
  double dt = 0.005;
  Index n_particles = 2048;  // single wide system, so e_poc stays negligible
  Index batch_size = 256;
  Index eval_size = 20000;
  std::uint64_t seed = 0;
};

/// One long run at width n_particles, with the risk recorded at every
/// horizon in t_grid (≥ 4 strictly increasing times resolving to
/// distinct steps), then the exponential tail fit.
DecayReport estimate_e_opt(const model::ActivationSpec& spec,
                           const model::TargetSpec& target,
                           const Vector& t_grid, const OptOptions& opt);

// ---------------------------------------------------------------------------
// Statistical component: excess of empirical training over a
// population-trained twin, vs sample size
// ---------------------------------------------------------------------------

struct StatOptions {
  double lambda = 0.05;
  double horizon = 1.0;  // T
  double dt = 0.005;
  Index n_particles = 256;
  Index batch_size = 64;
  double label_noise = 0.0;  // ς on the sampled training labels
  Index reps = 4;
  Index eval_size = 20000;
  std::uint64_t seed = 0;
  Index threads = 1;
};

/// For each sample size n: draws a dataset of n labelled points, trains
/// in empirical (minibatch-resampling) mode, trains a population twin
/// from the same seed — same initial particles, same Brownian
/// increments, same evaluation grid, so common random numbers isolate
/// the dataset effect — and records the excess of the empirical
/// population risk over the twin's.  Fits the slope of the mean excess
/// against n on log-log axes; points indistinguishable from zero
/// (mean ≤ 3 s.e.) are flagged as floor and left out of the fit.
SlopeGrid estimate_e_stat(const model::ActivationSpec& spec,
                          const model::TargetSpec& target,
                          const std::vector<Index>& sample_grid,
                          const StatOptions& opt);

// ---------------------------------------------------------------------------
// Temperature component: threshold sweep
// ---------------------------------------------------------------------------

struct SparsePoint {
  double lambda = 0.0;
  dictionary::ThresholdReport report;
};

struct SparseGrid {
  std::vector<SparsePoint> points;
};

/// Pure coefficient computation: the threshold rule applied at every
/// temperature in lambda_grid (all > 0).
SparseGrid estimate_e_sparse(const dictionary::HermiteExpansion& expansion,
                             const Vector& lambda_grid, double c_sigma,
                             int mult_sigma, double big_c_sigma = 1.0);

/// The 1D Hermite profile of a ridge target: exact coefficients for
/// linear / single-Hermite / coefficient-list targets, kink-aware
/// quadrature for piecewise-linear ridges.  Multi-index targets have no
/// single profile and are rejected.
dictionary::HermiteExpansion target_profile_expansion(
    const model::TargetSpec& target, int order);

// ---------------------------------------------------------------------------
// Non-realizability floor
// ---------------------------------------------------------------------------

struct FloorReport {
  bool realizable = false;   // activation degree covers the target order
  double initial_risk = 0.0;
  double trained_risk = 0.0;
  double floor = 0.0;  // ‖f*‖²: unreachable energy in the floor branch
  // Floor branch: trained_risk ≥ 0.8·floor (training cannot dent the
  // orthogonal part).  Realizable branch: trained_risk < 0.3·floor.
  bool passes = false;
};

/// Trains a degree-k monomial network on a pure order-m Hermite ridge.
/// m ≤ k is the realizable branch (polynomial features of degree ≤ k
/// span the target); m > k is the floor branch, where the target is
/// L²-orthogonal to everything the network can represent and the risk
/// cannot drop below ‖f*‖².
FloorReport nonrealizability_floor(int k, int m, Index input_dim,
                                   const dynamics::DynamicsConfig& cfg,
                                   Index n_particles);

// ---------------------------------------------------------------------------
// Cross-term bookkeeping
// ---------------------------------------------------------------------------

struct CrossTermReport {
  // The four Cauchy–Schwarz geometric means; the remaining two pairs
  // (poc–stat and poc–sparse) are centered and contribute exactly zero.
  double poc_opt = 0.0;
  double opt_stat = 0.0;
  double opt_sparse = 0.0;
  double stat_sparse = 0.0;
  double remainder_bound = 0.0;  // 2·(sum of the four means)
};

/// Remainder bound from the four measured components (all ≥ 0):
/// 2·(√(e_poc·e_opt) + √(e_opt·e_stat) + √(e_opt·e_sparse)
///    + √(e_stat·e_sparse)).
CrossTermReport cross_term_report(double e_poc, double e_opt, double e_stat,
                                  double e_sparse);

// ---------------------------------------------------------------------------
// The assembled experiment
// ---------------------------------------------------------------------------

struct DecompositionPlan {
  model::ActivationSpec activation;
  model::TargetSpec target;
  std::vector<Index> n_grid;       // widths for the coupling slope
  Vector t_grid;                   // horizons for the decay fit
  std::vector<Index> sample_grid;  // dataset sizes for the excess slope
  Vector lambda_grid;              // temperatures for the threshold sweep
  PocOptions poc;
  OptOptions opt;
  StatOptions stat;
  double c_sigma = 1.0;
  int mult_sigma = 1;
  double big_c_sigma = 1.0;
  int expansion_order = 32;  // Hermite depth of the target profile
};

struct DecompositionReport {
  PocReport e_poc;
  DecayReport e_opt;
  SlopeGrid e_stat;
  SparseGrid e_sparse;
  CrossTermReport cross;
  // Joint-limit verdict at the nominal corner of the plan: largest
  // width, largest sample size, final horizon, the stat-run
  // temperature, the fitted decay rate, and the retained count at that
  // temperature.
  dictionary::ScheduleVerdict schedule;
};

/// Runs all four estimators and assembles the report, feeding the
/// terminal component values into the cross-term bound and the nominal
/// corner into the schedule check.
DecompositionReport run_decomposition(const DecompositionPlan& plan);

}  // namespace mflab::harness

#endif  // MFLAB_HARNESS_HPP

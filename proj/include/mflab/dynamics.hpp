// Euler–Maruyama integration of the mean-field Langevin particle SDE
//
//   dθ_i = −∇_θ (δR/δμ)(θ_i) dt − λ·θ_i dt + √(2λ) dB_i,
//
// where R is the squared-loss population risk, the first-variation
// gradient is estimated on a per-step batch shared by all particles,
// and the confining drift −λθ is the Gaussian-reference entropy term.
// The N-particle system couples only through the batch residuals
// f_N(x_j) − y_j, so one step is a handful of GEMMs.
#ifndef MFLAB_DYNAMICS_HPP
#define MFLAB_DYNAMICS_HPP

#include <cstdint>
#include <vector>

#include "mflab/model.hpp"

namespace mflab::dynamics {

enum class GradientMode {
  Population,  // fresh iid batch each step — unbiased population gradient
  Empirical    // minibatch resampled from one fixed dataset of size n
};

struct DynamicsConfig {
  double lambda = 0.05;  // temperature / regularization strength
  double dt = 0.005;
  Index steps = 0;
  GradientMode mode = GradientMode::Population;
  Index batch_size = 256;
  model::Dataset dataset;    // Empirical mode: the fixed training sample
  std::uint64_t seed = 0;
  Index eval_size = 20000;   // held-out Monte Carlo risk grid
  double label_noise = 0.0;  // ς on freshly drawn population labels
  // Hold the output weights at 0 and never update them.  With a ≡ 0 the
  // risk gradient on every coordinate vanishes identically, leaving the
  // pure confinement dynamics dθ = −λθ dt + √(2λ) dB on (w, b).
  bool freeze_outputs = false;
};

/// Throws std::invalid_argument naming the offending field when the
/// configuration violates its invariants (λ ≥ 0, dt > 0, λ·dt < 0.5,
/// batch_size ≥ 1 in population mode, nonempty dataset in empirical
/// mode).  λ = 0 is accepted here (plain gradient flow, no noise); the
/// command-line schema additionally requires λ > 0.
void validate(const DynamicsConfig& cfg);

/// f_μ(x) − y for one labelled input.
double residual(const model::Ensemble& ens, const Vector& x, double y,
                const model::ActivationSpec& spec);

/// The drift of particle i of `particles` when the interaction measure
/// is `measure`: −∇_θ[mean_j res_j·a·σ(⟨w,x_j⟩+b)] − λθ with residuals
/// res_j = f_measure(x_j) − y_j.  Row i of the returned N×(d+2) matrix
/// belongs to particle i.  Separating the measure from the particles is
/// what the synchronous-coupling experiment needs: the mean-field
/// copies feel a drift evaluated against an independent large system.
Matrix drift_against(const model::Ensemble& measure, const Matrix& particles,
                     const model::Dataset& batch, double lambda,
                     const model::ActivationSpec& spec);

/// Self-interacting drift of the whole ensemble (measure = particles).
Matrix drift_all(const model::Ensemble& ens, const model::Dataset& batch,
                 double lambda, const model::ActivationSpec& spec);

/// Drift of a single particle, as a (d+2)-vector ordered [∂w, ∂b, ∂a].
/// Equals row i of drift_all; kept as the scalar-path reference that
/// the batched code is tested against.
Vector drift(const model::Ensemble& ens, Index i, const model::Dataset& batch,
             double lambda, const model::ActivationSpec& spec);

/// Standard-normal increments for every particle coordinate at one
/// step, keyed by (seed, tag, step, particle): the synchronous coupling
/// reuses the same matrix for both systems.
Matrix noise_matrix(Index n_particles, Index dim, std::uint64_t seed,
                    StreamTag tag, std::uint64_t step);

/// The batch used at one step: a fresh Gaussian draw in population
/// mode (labels y = f*(x) + ς·ε), or batch_size rows resampled from the
/// fixed dataset in empirical mode.
model::Dataset step_batch(const DynamicsConfig& cfg,
                          const model::TargetSpec& target, Index input_dim,
                          std::uint64_t step);

/// One Euler–Maruyama update θ ← θ + dt·drift + √(2λ·dt)·ξ in place,
/// with the supplied increments.  Throws std::runtime_error naming the
/// step and particle if a coordinate leaves the finite range.
void langevin_step_with_noise(model::Ensemble& ens, const Matrix& drift_value,
                              const Matrix& noise, const DynamicsConfig& cfg,
                              std::uint64_t step);

/// One full step of the self-interacting system: draw the step batch,
/// compute the drift, apply the update with increments from the main
/// noise stream.
void langevin_step(model::Ensemble& ens, const DynamicsConfig& cfg,
                   const model::ActivationSpec& spec,
                   const model::TargetSpec& target, std::uint64_t step);

struct RiskPoint {
  double time = 0.0;
  double risk = 0.0;
  double mc_stderr = 0.0;
};

struct Snapshot {
  double time = 0.0;
  model::Ensemble ensemble;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<RiskPoint> risk_series;
};

/// Integrates `cfg.steps` steps from `init`, recording a snapshot and a
/// Monte Carlo L² risk estimate every `snapshot_every` steps (and at
/// the initial and final times).  snapshot_every ≤ 0 records endpoints
/// only.
Trajectory simulate(const model::Ensemble& init, const DynamicsConfig& cfg,
                    const model::ActivationSpec& spec,
                    const model::TargetSpec& target, Index snapshot_every);

/// Monte Carlo estimate of ‖f_μ − f*‖²_{L²(ρ_X)} on an explicit
/// evaluation grid.
double l2_risk(const model::Ensemble& ens, const model::TargetSpec& target,
               const model::ActivationSpec& spec, const Matrix& eval_x);

/// Same estimate plus its Monte Carlo standard error.
RiskPoint l2_risk_stats(const model::Ensemble& ens,
                        const model::TargetSpec& target,
                        const model::ActivationSpec& spec,
                        const Matrix& eval_x);

/// The evaluation grid a configuration implies (keyed on cfg.seed, so
/// runs sharing a seed share their grid).
Matrix evaluation_grid(const DynamicsConfig& cfg, Index input_dim);

}  // namespace mflab::dynamics

#endif  // MFLAB_DYNAMICS_HPP

#include "mflab/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mflab::dynamics {

namespace {

[[noreturn]] void invalid_field(const char* field, const char* what) {
  std::ostringstream msg;
  msg << "dynamics config: field '" << field << "' " << what;
  throw std::invalid_argument(msg.str());
}

}  // namespace

void validate(const DynamicsConfig& cfg) {
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    invalid_field("lambda", "must be a finite value >= 0");
  }
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
    invalid_field("dt", "must be a finite value > 0");
  }
  if (!(cfg.lambda * cfg.dt < 0.5)) {
    invalid_field("lambda*dt", "must stay below 0.5 for a stable OU part");
  }
  if (cfg.steps < 0) invalid_field("steps", "must be >= 0");
  if (cfg.mode == GradientMode::Population && cfg.batch_size < 1) {
    invalid_field("batch_size", "must be >= 1 in population mode");
  }
  if (cfg.mode == GradientMode::Empirical && cfg.dataset.size() < 1) {
    invalid_field("dataset", "must be nonempty in empirical mode");
  }
  if (cfg.eval_size < 1) invalid_field("eval_size", "must be >= 1");
  if (!(cfg.label_noise >= 0.0)) invalid_field("label_noise", "must be >= 0");
}

double residual(const model::Ensemble& ens, const Vector& x, double y,
                const model::ActivationSpec& spec) {
  return model::network_eval(ens, x, spec) - y;
}

Matrix drift_against(const model::Ensemble& measure, const Matrix& particles,
                     const model::Dataset& batch, double lambda,
                     const model::ActivationSpec& spec) {
  const Index n_batch = batch.size();
  if (n_batch < 1) {
    throw std::invalid_argument("drift_against: empty batch");
  }
  const Index d = measure.input_dim();
  if (particles.cols() != d + 2 || batch.x.cols() != d) {
    throw std::invalid_argument("drift_against: dimension mismatch");
  }
  // Residuals of the interaction measure on the batch.
  const Vector res =
      model::network_eval_batch(measure, batch.x, spec) - batch.y;

  const auto w = particles.leftCols(d);
  const auto b = particles.col(d);
  const auto a = particles.col(d + 1);

  Matrix u = batch.x * w.transpose();  // B × N pre-activations
  u.rowwise() += b.transpose();
  const Matrix s = model::activation_eval_matrix(spec, u);
  const Matrix ds = model::activation_deriv_matrix(spec, u);

  const double inv_b = 1.0 / double(n_batch);
  // ∂_a = mean_j res_j·σ(u_j);  ∂_b = a·mean_j res_j·σ'(u_j);
  // ∂_w = a·mean_j res_j·σ'(u_j)·x_j.
  const Vector grad_a = (s.transpose() * res) * inv_b;
  const Vector grad_b = a.cwiseProduct((ds.transpose() * res) * inv_b);
  Matrix weighted = ds.array().colwise() * res.array();  // B × N
  Matrix grad_w = (weighted.transpose() * batch.x) * inv_b;  // N × d
  grad_w.array().colwise() *= a.array();

  Matrix out(particles.rows(), d + 2);
  out.leftCols(d) = -grad_w - lambda * w;
  out.col(d) = -grad_b - lambda * b;
  out.col(d + 1) = -grad_a - lambda * a;
  return out;
}

Matrix drift_all(const model::Ensemble& ens, const model::Dataset& batch,
                 double lambda, const model::ActivationSpec& spec) {
  return drift_against(ens, ens.theta, batch, lambda, spec);
}

Vector drift(const model::Ensemble& ens, Index i, const model::Dataset& batch,
             double lambda, const model::ActivationSpec& spec) {
  const Index n_batch = batch.size();
  if (n_batch < 1) throw std::invalid_argument("drift: empty batch");
  if (i < 0 || i >= ens.width()) {
    throw std::invalid_argument("drift: particle index out of range");
  }
  const Index d = ens.input_dim();
  const model::ParameterPoint p = ens.particle(i);
  // Scalar-path reference: residuals from the full network, then the
  // three gradient components accumulated sample by sample.
  const Vector res = model::network_eval_batch(ens, batch.x, spec) - batch.y;
  double grad_a = 0.0, grad_b = 0.0;
  Vector grad_w = Vector::Zero(d);
  for (Index j = 0; j < n_batch; ++j) {
    const double u = p.w.dot(batch.x.row(j).transpose()) + p.b;
    const double sd = model::activation_deriv(spec, u);
    grad_a += res[j] * model::activation_eval(spec, u);
    grad_b += res[j] * p.a * sd;
    grad_w += res[j] * p.a * sd * batch.x.row(j).transpose();
  }
  const double inv_b = 1.0 / double(n_batch);
  Vector out(d + 2);
  out.head(d) = -grad_w * inv_b - lambda * p.w;
  out[d] = -grad_b * inv_b - lambda * p.b;
  out[d + 1] = -grad_a * inv_b - lambda * p.a;
  return out;
}

Matrix noise_matrix(Index n_particles, Index dim, std::uint64_t seed,
                    StreamTag tag, std::uint64_t step) {
  Matrix noise(n_particles, dim);
  for (Index i = 0; i < n_particles; ++i) {
    CounterRng rng(seed, tag, step, std::uint64_t(i));
    for (Index j = 0; j < dim; ++j) noise(i, j) = rng.next_gaussian();
  }
  return noise;
}

model::Dataset step_batch(const DynamicsConfig& cfg,
                          const model::TargetSpec& target, Index input_dim,
                          std::uint64_t step) {
  model::Dataset batch;
  if (cfg.mode == GradientMode::Population) {
    batch.x = model::sample_inputs(cfg.batch_size, input_dim, cfg.seed,
                                   StreamTag::Batch, step);
    batch.y = model::target_eval_batch(target, batch.x);
    if (cfg.label_noise > 0.0) {
      for (Index j = 0; j < batch.y.size(); ++j) {
        CounterRng rng(cfg.seed, StreamTag::LabelNoise, step,
                       std::uint64_t(j));
        batch.y[j] += cfg.label_noise * rng.next_gaussian();
      }
    }
    return batch;
  }
  // Empirical mode: resample batch_size rows of the fixed dataset.
  const Index n = cfg.dataset.size();
  batch.x.resize(cfg.batch_size, input_dim);
  batch.y.resize(cfg.batch_size);
  CounterRng rng(cfg.seed, StreamTag::Batch, step);
  for (Index j = 0; j < cfg.batch_size; ++j) {
    const Index row = Index(rng.next_u64() % std::uint64_t(n));
    batch.x.row(j) = cfg.dataset.x.row(row);
    batch.y[j] = cfg.dataset.y[row];
  }
  return batch;
}

void langevin_step_with_noise(model::Ensemble& ens, const Matrix& drift_value,
                              const Matrix& noise, const DynamicsConfig& cfg,
                              std::uint64_t step) {
  const double diffusion = std::sqrt(2.0 * cfg.lambda * cfg.dt);
  ens.theta += cfg.dt * drift_value + diffusion * noise;
  ens.time += cfg.dt;
  if (!ens.theta.allFinite()) {
    for (Index i = 0; i < ens.theta.rows(); ++i) {
      for (Index j = 0; j < ens.theta.cols(); ++j) {
        if (!std::isfinite(ens.theta(i, j))) {
          std::ostringstream msg;
          msg << "langevin_step: non-finite coordinate at step " << step
              << ", particle " << i << ", coordinate " << j;
          throw std::runtime_error(msg.str());
        }
      }
    }
  }
}

void langevin_step(model::Ensemble& ens, const DynamicsConfig& cfg,
                   const model::ActivationSpec& spec,
                   const model::TargetSpec& target, std::uint64_t step) {
  const Index d = ens.input_dim();
  if (cfg.freeze_outputs) {
    // a ≡ 0 kills every risk-gradient component, leaving pure
    // Ornstein–Uhlenbeck relaxation of (w, b) toward N(0, 1).
    ens.theta.col(d + 1).setZero();
    const Matrix drift_value = -cfg.lambda * ens.theta;
    Matrix noise =
        noise_matrix(ens.width(), d + 2, cfg.seed, StreamTag::Noise, step);
    noise.col(d + 1).setZero();
    langevin_step_with_noise(ens, drift_value, noise, cfg, step);
    return;
  }
  const model::Dataset batch = step_batch(cfg, target, d, step);
  const Matrix drift_value = drift_all(ens, batch, cfg.lambda, spec);
  const Matrix noise =
      noise_matrix(ens.width(), d + 2, cfg.seed, StreamTag::Noise, step);
  langevin_step_with_noise(ens, drift_value, noise, cfg, step);
}

double l2_risk(const model::Ensemble& ens, const model::TargetSpec& target,
               const model::ActivationSpec& spec, const Matrix& eval_x) {
  if (eval_x.rows() < 1) throw std::invalid_argument("l2_risk: empty grid");
  const Vector gap = model::network_eval_batch(ens, eval_x, spec) -
                     model::target_eval_batch(target, eval_x);
  return gap.squaredNorm() / double(eval_x.rows());
}

RiskPoint l2_risk_stats(const model::Ensemble& ens,
                        const model::TargetSpec& target,
                        const model::ActivationSpec& spec,
                        const Matrix& eval_x) {
  if (eval_x.rows() < 1) {
    throw std::invalid_argument("l2_risk_stats: empty grid");
  }
  const Vector gap = model::network_eval_batch(ens, eval_x, spec) -
                     model::target_eval_batch(target, eval_x);
  const Index n = eval_x.rows();
  const Vector sq = gap.array().square();
  RiskPoint point;
  point.time = ens.time;
  point.risk = sq.mean();
  const double var =
      (sq.array() - point.risk).square().sum() / double(std::max<Index>(n - 1, 1));
  point.mc_stderr = std::sqrt(var / double(n));
  return point;
}

Matrix evaluation_grid(const DynamicsConfig& cfg, Index input_dim) {
  return model::sample_inputs(cfg.eval_size, input_dim, cfg.seed,
                              StreamTag::Eval);
}

Trajectory simulate(const model::Ensemble& init, const DynamicsConfig& cfg,
                    const model::ActivationSpec& spec,
                    const model::TargetSpec& target, Index snapshot_every) {
  validate(cfg);
  model::Ensemble ens = init;
  if (cfg.freeze_outputs) ens.theta.col(ens.input_dim() + 1).setZero();
  const Matrix eval_x = evaluation_grid(cfg, ens.input_dim());

  Trajectory traj;
  const auto record = [&]() {
    traj.snapshots.push_back({ens.time, ens});
    traj.risk_series.push_back(l2_risk_stats(ens, target, spec, eval_x));
  };
  record();  // initial state
  for (Index step = 0; step < cfg.steps; ++step) {
    langevin_step(ens, cfg, spec, target, std::uint64_t(step));
    const bool at_interval =
        snapshot_every > 0 && (step + 1) % snapshot_every == 0;
    const bool last = step + 1 == cfg.steps;
    if (last || at_interval) record();
  }
  return traj;
}

}  // namespace mflab::dynamics

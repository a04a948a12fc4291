#include "mflab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mflab/rng.hpp"
#include "mflab/thread_pool.hpp"

namespace mflab::harness {

namespace {

// Shared grid hygiene: the slope fits want ≥ 4 increasing points with a
// near-constant ratio so the log abscissae are evenly spread.
void validate_geometric_grid(const std::vector<Index>& grid,
                             const char* where) {
  if (grid.size() < 4)
    throw std::invalid_argument(std::string(where) +
                                ": grid needs at least 4 values");
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (grid[i] < 1 || grid[i + 1] <= grid[i])
      throw std::invalid_argument(std::string(where) +
                                  ": grid must be strictly increasing");
    const double ratio = double(grid[i + 1]) / double(grid[i]);
    min_ratio = std::min(min_ratio, ratio);
    max_ratio = std::max(max_ratio, ratio);
  }
  if (max_ratio > 1.25 * min_ratio)
    throw std::invalid_argument(std::string(where) +
                                ": grid must be near-geometric");
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Plain least squares, used for the semi-log decay fit.
LineFit linear_fit(const Vector& xs, const Vector& ys) {
  const double mx = xs.mean();
  const double my = ys.mean();
  const double sxx = (xs.array() - mx).square().sum();
  LineFit fit;
  fit.slope = (sxx > 0.0)
                  ? ((xs.array() - mx) * (ys.array() - my)).sum() / sxx
                  : 0.0;
  fit.intercept = my - fit.slope * mx;
  const double sst = (ys.array() - my).square().sum();
  const double ssr =
      (ys.array() - (fit.intercept + fit.slope * xs.array())).square().sum();
  fit.r2 = sst <= 1e-300 ? 1.0 : 1.0 - ssr / sst;
  return fit;
}

// Mean / Monte Carlo standard error of one grid point over its reps.
void mean_and_stderr(const std::vector<double>& samples, double* mean,
                     double* se) {
  const double n = double(samples.size());
  double m = 0.0;
  for (double s : samples) m += s;
  m /= n;
  double var = 0.0;
  if (samples.size() > 1) {
    for (double s : samples) var += (s - m) * (s - m);
    var /= (n - 1.0);
  }
  *mean = m;
  *se = samples.size() > 1 ? std::sqrt(var / n) : 0.0;
}

// Fits log(mean) against log(x) over the usable (strictly positive,
// above-floor) points and fills the shared bookkeeping.
void fit_slope_grid(SlopeGrid* grid, bool drop_floor_points) {
  std::vector<double> fx;
  std::vector<double> fy;
  bool floor = false;
  for (Index i = 0; i < grid->xs.size(); ++i) {
    const bool below_noise =
        grid->means[i] <= 0.0 ||
        (drop_floor_points && grid->means[i] <= 3.0 * grid->stderrs[i]);
    if (below_noise) {
      floor = true;
      continue;
    }
    fx.push_back(grid->xs[i]);
    fy.push_back(grid->means[i]);
  }
  grid->floor = floor;
  grid->fit_valid = fx.size() >= 3;
  grid->fit_xs = Eigen::Map<const Vector>(fx.data(), Index(fx.size()));
  if (grid->fit_valid) {
    const Vector vy = Eigen::Map<const Vector>(fy.data(), Index(fy.size()));
    grid->fit = transport::fit_loglog(grid->fit_xs, vy);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Particle-count component
// ---------------------------------------------------------------------------

PocReport estimate_e_poc(const model::ActivationSpec& spec,
                         const model::TargetSpec& target,
                         const std::vector<Index>& n_grid,
                         const PocOptions& opt) {
  validate_geometric_grid(n_grid, "estimate_e_poc");
  if (opt.reps < 1)
    throw std::invalid_argument("estimate_e_poc: reps must be >= 1");
  const Index steps = Index(std::llround(opt.horizon / opt.dt));
  if (steps < 1)
    throw std::invalid_argument(
        "estimate_e_poc: horizon must cover at least one step");

  const Index n_points = Index(n_grid.size());
  const Index n_jobs = n_points * opt.reps;
  PocReport report;
  report.records.resize(std::size_t(n_jobs));
  parallel_for(opt.threads, n_jobs, [&](Index job) {
    const Index i = job / opt.reps;
    const Index r = job % opt.reps;
    dynamics::DynamicsConfig cfg;
    cfg.lambda = opt.lambda;
    cfg.dt = opt.dt;
    cfg.steps = steps;
    cfg.mode = dynamics::GradientMode::Population;
    cfg.batch_size = opt.batch_size;
    cfg.seed = derive_key(opt.seed, StreamTag::Scratch,
                               std::uint64_t(i), std::uint64_t(r));
    report.records[std::size_t(job)] =
        transport::coupled_run(n_grid[std::size_t(i)], opt.ref_width, cfg,
                               spec, target, opt.record_every, opt.w2_cap);
  });

  SlopeGrid& grid = report.grid;
  grid.xs.resize(n_points);
  grid.means.resize(n_points);
  grid.stderrs.resize(n_points);
  for (Index i = 0; i < n_points; ++i) {
    std::vector<double> terminal;
    terminal.reserve(std::size_t(opt.reps));
    for (Index r = 0; r < opt.reps; ++r)
      terminal.push_back(
          report.records[std::size_t(i * opt.reps + r)].sync_bound.back());
    grid.xs[i] = double(n_grid[std::size_t(i)]);
    mean_and_stderr(terminal, &grid.means[i], &grid.stderrs[i]);
  }
  grid.wide_ci = opt.reps < 2;
  fit_slope_grid(&grid, /*drop_floor_points=*/false);
  return report;
}

// ---------------------------------------------------------------------------
// Optimization component
// ---------------------------------------------------------------------------

DecayReport fit_exponential_tail(const Vector& times, const Vector& risks) {
  if (times.size() != risks.size())
    throw std::invalid_argument("fit_exponential_tail: size mismatch");
  const Index n = times.size();
  if (n < 4)
    throw std::invalid_argument(
        "fit_exponential_tail: need at least 4 points");

  DecayReport rep;
  rep.times = times;
  rep.risks = risks;

  const Index tail = std::max<Index>(1, n / 10);
  rep.plateau = risks.tail(tail).mean();
  double tail_sd = 0.0;
  if (tail > 1) {
    const double var =
        (risks.tail(tail).array() - rep.plateau).square().sum() /
        double(tail - 1);
    tail_sd = std::sqrt(var);
  }
  const double cutoff = std::max(3.0 * tail_sd, 1e-10 * risks[0]);

  const Index burn = n / 10;
  std::vector<double> ft;
  std::vector<double> fe;
  for (Index i = burn; i < n; ++i) {
    const double excess = risks[i] - rep.plateau;
    if (excess > cutoff) {
      ft.push_back(times[i]);
      fe.push_back(excess);
    }
  }
  if (ft.size() < 4) {
    rep.no_decay = true;
    return rep;
  }
  rep.fit_times = Eigen::Map<const Vector>(ft.data(), Index(ft.size()));
  rep.fit_excess = Eigen::Map<const Vector>(fe.data(), Index(fe.size()));
  const LineFit fit = linear_fit(rep.fit_times, rep.fit_excess.array().log());
  if (fit.slope >= 0.0) {
    rep.no_decay = true;
    return rep;
  }
  rep.alpha_hat = -fit.slope;
  rep.r2 = fit.r2;
  return rep;
}

DecayReport estimate_e_opt(const model::ActivationSpec& spec,
                           const model::TargetSpec& target,
                           const Vector& t_grid, const OptOptions& opt) {
  if (t_grid.size() < 4)
    throw std::invalid_argument(
        "estimate_e_opt: t_grid needs at least 4 horizons");
  std::vector<Index> rec_steps;
  rec_steps.reserve(std::size_t(t_grid.size()));
  for (Index i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0.0 || (i > 0 && t_grid[i] <= t_grid[i - 1]))
      throw std::invalid_argument(
          "estimate_e_opt: t_grid must be nonnegative and strictly "
          "increasing");
    const Index step = Index(std::llround(t_grid[i] / opt.dt));
    if (!rec_steps.empty() && step <= rec_steps.back())
      throw std::invalid_argument(
          "estimate_e_opt: t_grid entries closer than one step");
    rec_steps.push_back(step);
  }

  dynamics::DynamicsConfig cfg;
  cfg.lambda = opt.lambda;
  cfg.dt = opt.dt;
  cfg.steps = rec_steps.back();
  cfg.mode = dynamics::GradientMode::Population;
  cfg.batch_size = opt.batch_size;
  cfg.seed = opt.seed;
  cfg.eval_size = opt.eval_size;
  dynamics::validate(cfg);

  const Index d = target.input_dim();
  model::Ensemble ens = model::mup_init(opt.n_particles, d, opt.seed);
  const Matrix eval_x = dynamics::evaluation_grid(cfg, d);

  Vector times(Index(rec_steps.size()));
  Vector risks(Index(rec_steps.size()));
  std::size_t next = 0;
  for (Index step = 0; step <= cfg.steps; ++step) {
    if (next < rec_steps.size() && rec_steps[next] == step) {
      times[Index(next)] = double(step) * opt.dt;
      risks[Index(next)] = dynamics::l2_risk(ens, target, spec, eval_x);
      ++next;
    }
    if (step == cfg.steps) break;
    dynamics::langevin_step(ens, cfg, spec, target, std::uint64_t(step));
  }
  return fit_exponential_tail(times, risks);
}

// ---------------------------------------------------------------------------
// Statistical component
// ---------------------------------------------------------------------------

SlopeGrid estimate_e_stat(const model::ActivationSpec& spec,
                          const model::TargetSpec& target,
                          const std::vector<Index>& sample_grid,
                          const StatOptions& opt) {
  validate_geometric_grid(sample_grid, "estimate_e_stat");
  if (opt.reps < 1)
    throw std::invalid_argument("estimate_e_stat: reps must be >= 1");
  const Index steps = Index(std::llround(opt.horizon / opt.dt));
  if (steps < 1)
    throw std::invalid_argument(
        "estimate_e_stat: horizon must cover at least one step");

  const Index d = target.input_dim();
  const Index n_points = Index(sample_grid.size());
  const Index n_jobs = n_points * opt.reps;
  std::vector<double> excess(std::size_t(n_jobs), 0.0);
  parallel_for(opt.threads, n_jobs, [&](Index job) {
    const Index i = job / opt.reps;
    const Index r = job % opt.reps;
    const std::uint64_t seed = derive_key(
        opt.seed, StreamTag::Scratch, std::uint64_t(i), std::uint64_t(r));

    dynamics::DynamicsConfig base;
    base.lambda = opt.lambda;
    base.dt = opt.dt;
    base.steps = steps;
    base.batch_size = opt.batch_size;
    base.seed = seed;
    base.eval_size = opt.eval_size;

    // Empirical run: a fixed dataset of n labelled points, minibatches
    // resampled from it.
    model::DataLaw law;
    law.target = target;
    law.input_dim = d;
    law.label_noise = opt.label_noise;
    dynamics::DynamicsConfig cfg_emp = base;
    cfg_emp.mode = dynamics::GradientMode::Empirical;
    cfg_emp.dataset =
        model::sample_dataset(law, sample_grid[std::size_t(i)], seed);

    // Population twin: fresh batches each step, same seed — identical
    // initial particles, Brownian increments, and evaluation grid.
    dynamics::DynamicsConfig cfg_pop = base;
    cfg_pop.mode = dynamics::GradientMode::Population;
    cfg_pop.label_noise = opt.label_noise;

    const model::Ensemble init = model::mup_init(opt.n_particles, d, seed);
    const dynamics::Trajectory emp =
        dynamics::simulate(init, cfg_emp, spec, target, 0);
    const dynamics::Trajectory pop =
        dynamics::simulate(init, cfg_pop, spec, target, 0);
    excess[std::size_t(job)] = emp.risk_series.back().risk -
                               pop.risk_series.back().risk;
  });

  SlopeGrid grid;
  grid.xs.resize(n_points);
  grid.means.resize(n_points);
  grid.stderrs.resize(n_points);
  for (Index i = 0; i < n_points; ++i) {
    std::vector<double> samples(
        excess.begin() + std::ptrdiff_t(i * opt.reps),
        excess.begin() + std::ptrdiff_t((i + 1) * opt.reps));
    grid.xs[i] = double(sample_grid[std::size_t(i)]);
    mean_and_stderr(samples, &grid.means[i], &grid.stderrs[i]);
  }
  grid.wide_ci = opt.reps < 2;
  fit_slope_grid(&grid, /*drop_floor_points=*/true);
  return grid;
}

// ---------------------------------------------------------------------------
// Temperature component
// ---------------------------------------------------------------------------

SparseGrid estimate_e_sparse(const dictionary::HermiteExpansion& expansion,
                             const Vector& lambda_grid, double c_sigma,
                             int mult_sigma, double big_c_sigma) {
  if (lambda_grid.size() == 0)
    throw std::invalid_argument("estimate_e_sparse: lambda_grid is empty");
  SparseGrid grid;
  grid.points.reserve(std::size_t(lambda_grid.size()));
  for (Index i = 0; i < lambda_grid.size(); ++i) {
    SparsePoint point;
    point.lambda = lambda_grid[i];
    point.report = dictionary::threshold(expansion, lambda_grid[i], c_sigma,
                                         mult_sigma, big_c_sigma);
    grid.points.push_back(std::move(point));
  }
  return grid;
}

dictionary::HermiteExpansion target_profile_expansion(
    const model::TargetSpec& target, int order) {
  switch (target.kind) {
    case model::TargetKind::Linear: {
      Vector coeffs = Vector::Zero(2);
      coeffs[1] = 1.0;
      return dictionary::expansion_from_coefficients(coeffs);
    }
    case model::TargetKind::HermiteSingle: {
      Vector coeffs = Vector::Zero(target.hermite_order + 1);
      coeffs[target.hermite_order] = 1.0;
      return dictionary::expansion_from_coefficients(coeffs);
    }
    case model::TargetKind::SingleIndex:
      return dictionary::expansion_from_coefficients(target.coefficients);
    case model::TargetKind::PiecewiseLinear: {
      const model::TargetSpec profile = target;  // captured by value
      std::vector<double> kinks(profile.breakpoints.data(),
                                profile.breakpoints.data() +
                                    profile.breakpoints.size());
      auto g = [profile](double z) {
        double value = profile.intercept + profile.base_slope * z;
        for (Index j = 0; j < profile.breakpoints.size(); ++j)
          value += profile.hinge_deltas[j] *
                   std::max(z - profile.breakpoints[j], 0.0);
        return value;
      };
      return dictionary::expand(g, order, 200, kinks);
    }
    case model::TargetKind::MultiIndex:
      throw std::invalid_argument(
          "target_profile_expansion: multi-index targets have no single "
          "ridge profile");
  }
  throw std::logic_error("target_profile_expansion: unknown target kind");
}

// ---------------------------------------------------------------------------
// Non-realizability floor
// ---------------------------------------------------------------------------

FloorReport nonrealizability_floor(int k, int m, Index input_dim,
                                   const dynamics::DynamicsConfig& cfg,
                                   Index n_particles) {
  if (k < 1 || m < 1)
    throw std::invalid_argument(
        "nonrealizability_floor: degree and order must be >= 1");
  if (input_dim < 1)
    throw std::invalid_argument(
        "nonrealizability_floor: input_dim must be >= 1");

  Vector direction = Vector::Zero(input_dim);
  direction[0] = 1.0;
  const model::TargetSpec target = model::make_hermite_single(m, direction);
  const model::ActivationSpec activation = model::make_monomial(k);

  const model::Ensemble init =
      model::mup_init(n_particles, input_dim, cfg.seed);
  const dynamics::Trajectory traj =
      dynamics::simulate(init, cfg, activation, target, 0);

  FloorReport report;
  report.realizable = (m <= k);
  report.initial_risk = traj.risk_series.front().risk;
  report.trained_risk = traj.risk_series.back().risk;
  report.floor = model::target_l2_norm_sq(target);
  report.passes = report.realizable
                      ? (report.trained_risk < 0.3 * report.floor)
                      : (report.trained_risk >= 0.8 * report.floor);
  return report;
}

// ---------------------------------------------------------------------------
// Cross-term bookkeeping
// ---------------------------------------------------------------------------

CrossTermReport cross_term_report(double e_poc, double e_opt, double e_stat,
                                  double e_sparse) {
  const auto check = [](double value, const char* name) {
    if (!(value >= 0.0))
      throw std::invalid_argument(std::string("cross_term_report: ") + name +
                                  " must be nonnegative");
  };
  check(e_poc, "e_poc");
  check(e_opt, "e_opt");
  check(e_stat, "e_stat");
  check(e_sparse, "e_sparse");
  CrossTermReport rep;
  rep.poc_opt = std::sqrt(e_poc * e_opt);
  rep.opt_stat = std::sqrt(e_opt * e_stat);
  rep.opt_sparse = std::sqrt(e_opt * e_sparse);
  rep.stat_sparse = std::sqrt(e_stat * e_sparse);
  rep.remainder_bound =
      2.0 * (rep.poc_opt + rep.opt_stat + rep.opt_sparse + rep.stat_sparse);
  return rep;
}

// ---------------------------------------------------------------------------
// The assembled experiment
// ---------------------------------------------------------------------------

DecompositionReport run_decomposition(const DecompositionPlan& plan) {
  if (plan.lambda_grid.size() < 4)
    throw std::invalid_argument(
        "run_decomposition: lambda_grid needs at least 4 temperatures");
  DecompositionReport report;
  report.e_poc =
      estimate_e_poc(plan.activation, plan.target, plan.n_grid, plan.poc);
  report.e_opt =
      estimate_e_opt(plan.activation, plan.target, plan.t_grid, plan.opt);
  report.e_stat = estimate_e_stat(plan.activation, plan.target,
                                  plan.sample_grid, plan.stat);
  const dictionary::HermiteExpansion expansion =
      target_profile_expansion(plan.target, plan.expansion_order);
  report.e_sparse =
      estimate_e_sparse(expansion, plan.lambda_grid, plan.c_sigma,
                        plan.mult_sigma, plan.big_c_sigma);

  // Component values at the nominal corner of the plan: the coupling
  // bound at the largest width, the fitted decay evaluated at the final
  // horizon, the empirical excess at the largest sample size (clamped
  // at 0 — the components are nonnegative by definition, the estimate
  // is noisy), and the threshold tail at the temperature nearest the
  // stat run's.
  const double poc_value = std::max(0.0, report.e_poc.grid.means.tail(1)[0]);
  const double t_final = plan.t_grid[plan.t_grid.size() - 1];
  double opt_value = 0.0;
  if (!report.e_opt.no_decay) {
    opt_value = std::exp(std::log(report.e_opt.fit_excess[0]) -
                         report.e_opt.alpha_hat *
                             (t_final - report.e_opt.fit_times[0]));
  } else if (report.e_opt.risks.size() > 0) {
    opt_value =
        std::max(0.0, report.e_opt.risks.tail(1)[0] - report.e_opt.plateau);
  }
  const double stat_value = std::max(0.0, report.e_stat.means.tail(1)[0]);
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < report.e_sparse.points.size(); ++i) {
    if (std::abs(report.e_sparse.points[i].lambda - plan.stat.lambda) <
        std::abs(report.e_sparse.points[nearest].lambda - plan.stat.lambda))
      nearest = i;
  }
  const dictionary::ThresholdReport& sparse_nominal =
      report.e_sparse.points[nearest].report;
  report.cross =
      cross_term_report(poc_value, opt_value, stat_value,
                        sparse_nominal.kappa);

  const double alpha = report.e_opt.no_decay ? 0.0 : report.e_opt.alpha_hat;
  if (alpha > 0.0 && sparse_nominal.s_up > 0) {
    report.schedule = dictionary::schedule_check(
        double(plan.n_grid.back()), double(plan.sample_grid.back()), t_final,
        plan.stat.lambda, alpha, double(sparse_nominal.s_up));
  } else {
    // Without a positive decay estimate (or with an empty retained set)
    // the joint-limit requirements cannot all be certified; evaluate
    // the clauses that do not involve the missing quantity and fail the
    // rest outright.
    dictionary::ScheduleVerdict v;
    const double log_np = std::log(double(plan.n_grid.back()));
    const double log_ns = std::log(double(plan.sample_grid.back()));
    const double inv_lt = 1.0 / (plan.stat.lambda * t_final);
    const double depth = std::max(1.0, double(sparse_nominal.s_up));
    v.clause_coupling = inv_lt < log_np;
    v.clause_statistical =
        depth * log_ns * log_ns / double(plan.sample_grid.back()) < 1.0;
    v.clause_optimization = false;
    v.value_coupling = inv_lt / log_np;
    v.value_statistical =
        depth * log_ns * log_ns / double(plan.sample_grid.back());
    v.value_optimization = 0.0;
    v.pass = false;
    report.schedule = v;
  }
  return report;
}

}  // namespace mflab::harness

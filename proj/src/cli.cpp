#include "mflab/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"
#include "mflab/dictionary.hpp"
#include "mflab/dynamics.hpp"
#include "mflab/harness.hpp"
#include "mflab/hermite_basis.hpp"
#include "mflab/io.hpp"
#include "mflab/model.hpp"
#include "mflab/moments.hpp"
#include "mflab/quotient.hpp"
#include "mflab/transport.hpp"

namespace mflab::cli {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Schema plumbing: every violation names the offending dotted key.
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& path, const std::string& reason)
      : std::runtime_error("config error: " + path + ": " + reason) {}
};

[[noreturn]] void fail(const std::string& path, const std::string& reason) {
  throw ConfigError(path, reason);
}

void check_keys(const json& section, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!section.is_object()) fail(path, "must be an object");
  for (auto it = section.begin(); it != section.end(); ++it)
    if (allowed.find(it.key()) == allowed.end())
      fail(path + "." + it.key(), "unknown key");
}

const json& get_section(const json& cfg, const std::string& name) {
  auto it = cfg.find(name);
  if (it == cfg.end()) fail(name, "required section missing");
  if (!it->is_object()) fail(name, "must be an object");
  return *it;
}

double get_number(const json& s, const std::string& path, const char* key,
                  std::optional<double> fallback = std::nullopt) {
  auto it = s.find(key);
  if (it == s.end()) {
    if (fallback) return *fallback;
    fail(path + "." + key, "required");
  }
  if (!it->is_number()) fail(path + "." + key, "must be a number");
  return it->get<double>();
}

double get_positive(const json& s, const std::string& path, const char* key,
                    std::optional<double> fallback = std::nullopt) {
  const double value = get_number(s, path, key, fallback);
  if (!(value > 0.0)) fail(path + "." + key, "must be > 0");
  return value;
}

double get_nonnegative(const json& s, const std::string& path, const char* key,
                       std::optional<double> fallback = std::nullopt) {
  const double value = get_number(s, path, key, fallback);
  if (!(value >= 0.0)) fail(path + "." + key, "must be >= 0");
  return value;
}

Index get_count(const json& s, const std::string& path, const char* key,
                std::optional<Index> fallback, Index min_value) {
  auto it = s.find(key);
  if (it == s.end()) {
    if (fallback) return *fallback;
    fail(path + "." + key, "required");
  }
  if (!it->is_number_integer()) fail(path + "." + key, "must be an integer");
  const Index value = it->get<Index>();
  if (value < min_value)
    fail(path + "." + key,
         "must be >= " + std::to_string(min_value));
  return value;
}

bool get_flag(const json& s, const std::string& path, const char* key,
              bool fallback) {
  auto it = s.find(key);
  if (it == s.end()) return fallback;
  if (!it->is_boolean()) fail(path + "." + key, "must be a boolean");
  return it->get<bool>();
}

std::string get_choice(const json& s, const std::string& path, const char* key,
                       const std::vector<std::string>& allowed,
                       std::optional<std::string> fallback = std::nullopt) {
  auto it = s.find(key);
  if (it == s.end()) {
    if (fallback) return *fallback;
    fail(path + "." + key, "required");
  }
  if (!it->is_string()) fail(path + "." + key, "must be a string");
  const std::string value = it->get<std::string>();
  for (const auto& option : allowed)
    if (value == option) return value;
  std::string menu;
  for (const auto& option : allowed) {
    if (!menu.empty()) menu += ", ";
    menu += option;
  }
  fail(path + "." + key, "must be one of: " + menu);
}

Vector get_vector(const json& s, const std::string& path, const char* key) {
  auto it = s.find(key);
  if (it == s.end()) fail(path + "." + key, "required");
  if (!it->is_array() || it->empty())
    fail(path + "." + key, "must be a nonempty array of numbers");
  Vector out(Index(it->size()));
  for (std::size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_number())
      fail(path + "." + key, "must be a nonempty array of numbers");
    out[Index(i)] = (*it)[i].get<double>();
  }
  return out;
}

std::vector<Index> get_counts(const json& s, const std::string& path,
                              const char* key) {
  auto it = s.find(key);
  if (it == s.end()) fail(path + "." + key, "required");
  if (!it->is_array() || it->empty())
    fail(path + "." + key, "must be a nonempty array of integers");
  std::vector<Index> out;
  out.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_number_integer() || (*it)[i].get<Index>() < 1)
      fail(path + "." + key, "must be a nonempty array of integers >= 1");
    out.push_back((*it)[i].get<Index>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Section parsers
// ---------------------------------------------------------------------------

model::ActivationSpec parse_activation(const json& cfg) {
  const json& s = get_section(cfg, "activation");
  if (s.find("kind") == s.end()) fail("activation.kind", "required");
  const std::string kind = get_choice(
      s, "activation", "kind",
      {"relu", "leaky_relu", "tanh", "centered_sigmoid", "monomial"});
  if (kind == "relu") {
    check_keys(s, "activation", {"kind"});
    return model::make_relu();
  }
  if (kind == "leaky_relu") {
    check_keys(s, "activation", {"kind", "beta"});
    const double beta = get_number(s, "activation", "beta");
    if (!(beta > 0.0 && beta < 1.0))
      fail("activation.beta", "must be in (0, 1)");
    return model::make_leaky_relu(beta);
  }
  if (kind == "tanh") {
    check_keys(s, "activation", {"kind"});
    return model::make_tanh();
  }
  if (kind == "centered_sigmoid") {
    check_keys(s, "activation", {"kind"});
    return model::make_centered_sigmoid();
  }
  check_keys(s, "activation", {"kind", "degree"});
  return model::make_monomial(int(get_count(s, "activation", "degree",
                                            std::nullopt, 1)));
}

model::TargetSpec parse_target(const json& cfg) {
  const json& s = get_section(cfg, "target");
  if (s.find("kind") == s.end()) fail("target.kind", "required");
  const std::string kind =
      get_choice(s, "target", "kind",
                 {"linear", "piecewise_linear", "single_index",
                  "hermite_single", "multi_index"});
  if (kind == "linear") {
    check_keys(s, "target", {"kind", "direction"});
    return model::make_linear(get_vector(s, "target", "direction"));
  }
  if (kind == "piecewise_linear") {
    check_keys(s, "target",
               {"kind", "direction", "breakpoints", "deltas", "base_slope",
                "intercept"});
    const Vector breaks = get_vector(s, "target", "breakpoints");
    const Vector deltas = get_vector(s, "target", "deltas");
    if (breaks.size() != deltas.size())
      fail("target.deltas", "must match breakpoints in length");
    return model::make_piecewise_linear(
        get_vector(s, "target", "direction"), breaks, deltas,
        get_number(s, "target", "base_slope", 1.0),
        get_number(s, "target", "intercept", 0.0));
  }
  if (kind == "single_index") {
    check_keys(s, "target", {"kind", "direction", "coefficients"});
    return model::make_single_index(get_vector(s, "target", "direction"),
                                    get_vector(s, "target", "coefficients"));
  }
  if (kind == "hermite_single") {
    check_keys(s, "target", {"kind", "order", "direction"});
    return model::make_hermite_single(
        int(get_count(s, "target", "order", std::nullopt, 1)),
        get_vector(s, "target", "direction"));
  }
  check_keys(s, "target", {"kind", "projection", "coefficients"});
  auto proj_it = s.find("projection");
  if (proj_it == s.end() || !proj_it->is_array() || proj_it->empty())
    fail("target.projection", "must be a nonempty array of rows");
  auto coeff_it = s.find("coefficients");
  if (coeff_it == s.end() || !coeff_it->is_array() ||
      coeff_it->size() != proj_it->size())
    fail("target.coefficients", "must supply one row per projection row");
  const Index rows = Index(proj_it->size());
  const auto& first = (*proj_it)[0];
  if (!first.is_array() || first.empty())
    fail("target.projection", "rows must be nonempty arrays");
  const Index cols = Index(first.size());
  Matrix projection(rows, cols);
  std::vector<Vector> ridge;
  ridge.reserve(std::size_t(rows));
  for (Index r = 0; r < rows; ++r) {
    const auto& row = (*proj_it)[std::size_t(r)];
    if (!row.is_array() || Index(row.size()) != cols)
      fail("target.projection", "rows must all have the same length");
    for (Index c = 0; c < cols; ++c) {
      if (!row[std::size_t(c)].is_number())
        fail("target.projection", "entries must be numbers");
      projection(r, c) = row[std::size_t(c)].get<double>();
    }
    const auto& crow = (*coeff_it)[std::size_t(r)];
    if (!crow.is_array() || crow.empty())
      fail("target.coefficients", "rows must be nonempty arrays");
    Vector cvec(Index(crow.size()));
    for (std::size_t i = 0; i < crow.size(); ++i) {
      if (!crow[i].is_number())
        fail("target.coefficients", "entries must be numbers");
      cvec[Index(i)] = crow[i].get<double>();
    }
    ridge.push_back(std::move(cvec));
  }
  return model::make_multi_index(projection, ridge);
}

struct ParsedDynamics {
  dynamics::DynamicsConfig cfg;
  double horizon = 0.0;
  Index dataset_size = 0;
  double label_noise = 0.0;
};

ParsedDynamics parse_dynamics(const json& cfg, std::uint64_t seed,
                              bool population_only) {
  const json& s = get_section(cfg, "dynamics");
  check_keys(s, "dynamics",
             {"lambda", "dt", "horizon", "batch_size", "mode", "dataset_size",
              "label_noise", "eval_size", "freeze_outputs"});
  ParsedDynamics parsed;
  parsed.cfg.lambda = get_positive(s, "dynamics", "lambda");
  parsed.cfg.dt = get_positive(s, "dynamics", "dt");
  if (parsed.cfg.lambda * parsed.cfg.dt >= 0.5)
    fail("dynamics.dt", "lambda*dt must be < 0.5 for a stable step");
  parsed.horizon = get_positive(s, "dynamics", "horizon");
  parsed.cfg.steps = Index(std::llround(parsed.horizon / parsed.cfg.dt));
  if (parsed.cfg.steps < 1)
    fail("dynamics.horizon", "must cover at least one step of size dt");
  parsed.cfg.batch_size = get_count(s, "dynamics", "batch_size", 256, 1);
  const std::string mode = get_choice(s, "dynamics", "mode",
                                      {"population", "empirical"},
                                      std::string("population"));
  if (mode == "empirical") {
    if (population_only)
      fail("dynamics.mode", "this experiment runs in population mode");
    parsed.cfg.mode = dynamics::GradientMode::Empirical;
    parsed.dataset_size =
        get_count(s, "dynamics", "dataset_size", std::nullopt, 1);
  } else {
    parsed.cfg.mode = dynamics::GradientMode::Population;
    if (s.find("dataset_size") != s.end())
      fail("dynamics.dataset_size", "only valid in empirical mode");
  }
  parsed.label_noise = get_nonnegative(s, "dynamics", "label_noise", 0.0);
  parsed.cfg.label_noise = parsed.label_noise;
  parsed.cfg.eval_size = get_count(s, "dynamics", "eval_size", 20000, 1);
  parsed.cfg.freeze_outputs = get_flag(s, "dynamics", "freeze_outputs", false);
  parsed.cfg.seed = seed;
  return parsed;
}

// The 1D ridge profile of a target, for quadrature-based expansion and
// the residual cross-check.
struct RidgeProfile {
  std::function<double(double)> g;
  std::vector<double> kinks;
};

RidgeProfile ridge_profile(const model::TargetSpec& target) {
  RidgeProfile profile;
  switch (target.kind) {
    case model::TargetKind::Linear:
      profile.g = [](double z) { return z; };
      return profile;
    case model::TargetKind::PiecewiseLinear: {
      const model::TargetSpec t = target;
      profile.kinks.assign(t.breakpoints.data(),
                           t.breakpoints.data() + t.breakpoints.size());
      profile.g = [t](double z) {
        double value = t.intercept + t.base_slope * z;
        for (Index j = 0; j < t.breakpoints.size(); ++j)
          value += t.hinge_deltas[j] * std::max(z - t.breakpoints[j], 0.0);
        return value;
      };
      return profile;
    }
    case model::TargetKind::SingleIndex: {
      const Vector coeffs = target.coefficients;
      profile.g = [coeffs](double z) {
        const Vector h = hermite_values_upto(int(coeffs.size()) - 1, z);
        return coeffs.dot(h);
      };
      return profile;
    }
    case model::TargetKind::HermiteSingle: {
      const int order = target.hermite_order;
      profile.g = [order](double z) {
        return hermite_value<double>(order, z);
      };
      return profile;
    }
    case model::TargetKind::MultiIndex:
      fail("target.kind",
           "multi_index targets have no single ridge profile");
  }
  fail("target.kind", "unknown kind");
}

// ---------------------------------------------------------------------------
// Shared run plumbing
// ---------------------------------------------------------------------------

struct RunContext {
  json cfg;                // effective config (file + overrides)
  std::string experiment;  // subcommand name
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  Index threads = 1;
  std::ostream* out = nullptr;
};

void write_artifact(const RunContext& ctx, const std::string& name,
                    const std::string& bytes) {
  io::write_file(ctx.out_dir / name, bytes);
}

json fit_to_json(const transport::LogLogFit& fit) {
  json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r2"] = fit.r2;
  return j;
}

json slope_grid_to_json(const harness::SlopeGrid& grid) {
  json j;
  j["wide_ci"] = grid.wide_ci;
  j["floor"] = grid.floor;
  j["fit_valid"] = grid.fit_valid;
  if (grid.fit_valid) j["fit"] = fit_to_json(grid.fit);
  json points = json::array();
  for (Index i = 0; i < grid.xs.size(); ++i) {
    json p;
    p["x"] = grid.xs[i];
    p["mean"] = grid.means[i];
    p["stderr"] = grid.stderrs[i];
    points.push_back(std::move(p));
  }
  j["points"] = std::move(points);
  return j;
}

json schedule_to_json(const dictionary::ScheduleVerdict& verdict) {
  json j;
  j["pass"] = verdict.pass;
  j["clause_coupling"] = verdict.clause_coupling;
  j["clause_statistical"] = verdict.clause_statistical;
  j["clause_optimization"] = verdict.clause_optimization;
  j["value_coupling"] = verdict.value_coupling;
  j["value_statistical"] = verdict.value_statistical;
  j["value_optimization"] = verdict.value_optimization;
  return j;
}

json threshold_to_json(const dictionary::ThresholdReport& report) {
  json j;
  j["lambda"] = report.lambda;
  j["c_sigma"] = report.c_sigma;
  j["big_c_sigma"] = report.big_c_sigma;
  j["mult_sigma"] = report.mult_sigma;
  j["retained"] = report.retained;
  j["s_up"] = report.s_up;
  j["kappa"] = report.kappa;
  j["retained_energy"] = report.retained_energy;
  return j;
}

struct SlopeWindow {
  double low = -1.35;
  double high = -0.65;
};

SlopeWindow parse_window(const json& cfg) {
  SlopeWindow window;
  auto it = cfg.find("tolerances");
  if (it == cfg.end()) return window;
  check_keys(*it, "tolerances", {"slope_low", "slope_high"});
  window.low = get_number(*it, "tolerances", "slope_low", window.low);
  window.high = get_number(*it, "tolerances", "slope_high", window.high);
  if (!(window.low < window.high))
    fail("tolerances.slope_low", "must be below slope_high");
  return window;
}

// ---------------------------------------------------------------------------
// Experiment commands
// ---------------------------------------------------------------------------

void cmd_simulate(const RunContext& ctx) {
  check_keys(ctx.cfg, "config",
             {"schema_version", "experiment", "seed", "output", "activation",
              "target", "dynamics", "simulate"});
  const model::ActivationSpec activation = parse_activation(ctx.cfg);
  const model::TargetSpec target = parse_target(ctx.cfg);
  ParsedDynamics dyn = parse_dynamics(ctx.cfg, ctx.seed, false);
  const json& s = get_section(ctx.cfg, "simulate");
  check_keys(s, "simulate", {"n_particles", "snapshot_every"});
  const Index n_particles =
      get_count(s, "simulate", "n_particles", std::nullopt, 1);
  const Index snapshot_every = get_count(s, "simulate", "snapshot_every", 0, 0);

  const Index d = target.input_dim();
  if (dyn.cfg.mode == dynamics::GradientMode::Empirical) {
    model::DataLaw law;
    law.target = target;
    law.input_dim = d;
    law.label_noise = dyn.label_noise;
    dyn.cfg.dataset = model::sample_dataset(law, dyn.dataset_size, ctx.seed);
  }
  const model::Ensemble init = model::mup_init(n_particles, d, ctx.seed);
  const dynamics::Trajectory traj =
      dynamics::simulate(init, dyn.cfg, activation, target, snapshot_every);

  std::vector<std::string> columns = {"time", "particle"};
  for (Index j = 1; j <= d; ++j)
    columns.push_back("w_" + std::to_string(j));
  columns.push_back("b");
  columns.push_back("a");
  io::CsvWriter trajectory(columns);
  for (const auto& snap : traj.snapshots) {
    for (Index i = 0; i < snap.ensemble.theta.rows(); ++i) {
      std::vector<double> row = {snap.time, double(i)};
      for (Index c = 0; c < d + 2; ++c) row.push_back(snap.ensemble.theta(i, c));
      trajectory.add_row(row);
    }
  }
  write_artifact(ctx, "trajectory.csv", trajectory.str());

  io::CsvWriter risk({"time", "risk", "mc_stderr"});
  for (const auto& point : traj.risk_series)
    risk.add_row({point.time, point.risk, point.mc_stderr});
  write_artifact(ctx, "risk.csv", risk.str());
  write_artifact(ctx, "risk.plt",
                 io::gnuplot_script("risk.csv", "Monte Carlo risk", "time",
                                    "risk", {{1, 2, "risk"}}, false));

  *ctx.out << "simulate: " << n_particles << " particles, "
           << dyn.cfg.steps << " steps, final risk "
           << traj.risk_series.back().risk << "\n";
}

void cmd_couple(const RunContext& ctx) {
  check_keys(ctx.cfg, "config",
             {"schema_version", "experiment", "seed", "output", "activation",
              "target", "dynamics", "couple", "tolerances"});
  const model::ActivationSpec activation = parse_activation(ctx.cfg);
  const model::TargetSpec target = parse_target(ctx.cfg);
  const ParsedDynamics dyn = parse_dynamics(ctx.cfg, ctx.seed, true);
  if (dyn.cfg.freeze_outputs)
    fail("dynamics.freeze_outputs", "not supported by the coupling run");
  const json& s = get_section(ctx.cfg, "couple");
  check_keys(s, "couple",
             {"n_grid", "ref_width", "reps", "record_every", "w2_cap"});
  const SlopeWindow window = parse_window(ctx.cfg);

  harness::PocOptions opt;
  opt.lambda = dyn.cfg.lambda;
  opt.horizon = dyn.horizon;
  opt.dt = dyn.cfg.dt;
  opt.batch_size = dyn.cfg.batch_size;
  opt.ref_width = get_count(s, "couple", "ref_width", 4096, 1);
  opt.reps = get_count(s, "couple", "reps", 8, 1);
  opt.record_every = get_count(s, "couple", "record_every", 10, 1);
  opt.w2_cap = get_count(s, "couple", "w2_cap", transport::kAssignmentCap, 1);
  opt.seed = ctx.seed;
  opt.threads = ctx.threads;
  const std::vector<Index> n_grid = get_counts(s, "couple", "n_grid");

  const harness::PocReport report =
      harness::estimate_e_poc(activation, target, n_grid, opt);

  io::CsvWriter coupling({"time", "sync_bound", "w2sq_exact", "N",
                          "repetition"});
  for (std::size_t idx = 0; idx < report.records.size(); ++idx) {
    const transport::CouplingRecord& rec = report.records[idx];
    const Index rep = Index(idx) % opt.reps;
    for (std::size_t t = 0; t < rec.times.size(); ++t) {
      const double w2 = rec.w2sq_exact.empty()
                            ? std::nan("")
                            : rec.w2sq_exact[t];
      coupling.add_row({rec.times[t], rec.sync_bound[t], w2,
                        double(rec.n_particles), double(rep)});
    }
  }
  write_artifact(ctx, "coupling.csv", coupling.str());

  io::CsvWriter slope_csv({"N", "mean_sync_bound", "stderr"});
  for (Index i = 0; i < report.grid.xs.size(); ++i)
    slope_csv.add_row(
        {report.grid.xs[i], report.grid.means[i], report.grid.stderrs[i]});
  write_artifact(ctx, "slope.csv", slope_csv.str());

  json slope = slope_grid_to_json(report.grid);
  slope["window"] = {{"low", window.low}, {"high", window.high}};
  slope["in_window"] = report.grid.fit_valid &&
                       report.grid.fit.slope >= window.low &&
                       report.grid.fit.slope <= window.high;
  write_artifact(ctx, "slope.json", io::dump_json(slope));
  write_artifact(
      ctx, "coupling.plt",
      io::gnuplot_script("slope.csv", "coupling bound vs width", "N",
                         "mean sync bound", {{1, 2, "sync bound"}}, true));

  *ctx.out << "couple: " << n_grid.size() << " widths x " << opt.reps
           << " reps";
  if (report.grid.fit_valid)
    *ctx.out << ", slope " << report.grid.fit.slope << " (r2 "
             << report.grid.fit.r2 << ")";
  *ctx.out << "\n";
}

void cmd_moments(const RunContext& ctx) {
  check_keys(ctx.cfg, "config",
             {"schema_version", "experiment", "seed", "output", "moments"});
  const json& s = get_section(ctx.cfg, "moments");
  check_keys(s, "moments", {"init", "input_dim", "radius", "n_max"});
  const std::string kind = get_choice(s, "moments", "init",
                                      {"standard", "mup", "point"},
                                      std::string("mup"));
  const int n_max =
      int(get_count(s, "moments", "n_max", 12, 1));
  if (n_max > moments::kMaxMomentOrder)
    fail("moments.n_max",
         "must be <= " + std::to_string(moments::kMaxMomentOrder));
  moments::InitSpec init;
  if (kind == "standard") {
    init = moments::standard_gaussian_init(
        int(get_count(s, "moments", "input_dim", 1, 1)));
  } else if (kind == "mup") {
    init = moments::mup_gaussian_init(
        int(get_count(s, "moments", "input_dim", 2, 1)));
  } else {
    init = moments::point_mass_init(
        get_nonnegative(s, "moments", "radius", 1.0));
  }

  io::CsvWriter table(
      {"n", "log_even_moment", "even_moment", "wstar", "wstar_sqrt_n"});
  for (int n = 1; n <= n_max; ++n) {
    const double log_moment = moments::log_init_even_moment(init, n);
    const double w = moments::wstar(n, init);
    table.add_row({double(n), log_moment, std::exp(log_moment), w,
                   w * std::sqrt(double(n))});
  }
  write_artifact(ctx, "moments.csv", table.str());

  const moments::WeightSequence boundary =
      moments::wstar_sequence(init, n_max);
  const auto [finite, constant] =
      moments::check_submultiplicative(boundary, n_max);
  const auto witness_json = [](const moments::MaximalityReport& rep) {
    json j;
    j["diverges"] = rep.diverges;
    j["fitted_exponent"] = rep.fitted_exponent;
    j["monotone_tail"] = rep.monotone_tail;
    j["crossed_threshold"] = rep.crossed_threshold;
    j["orders"] = rep.orders;
    j["ratio"] = rep.ratio;
    return j;
  };
  json out;
  out["submultiplicative"] = {{"finite", finite}, {"constant", constant}};
  out["witness_flat"] = witness_json(moments::maximality_witness(
      moments::constant_weight(1.0, n_max), init, n_max));
  out["witness_boundary"] =
      witness_json(moments::maximality_witness(boundary, init, n_max));
  write_artifact(ctx, "moments.json", io::dump_json(out));
  write_artifact(ctx, "moments.plt",
                 io::gnuplot_script("moments.csv", "moment boundary", "n",
                                    "w*(n)·√n", {{1, 5, "w*·√n"}}, false));

  *ctx.out << "moments: orders 1.." << n_max << ", submultiplicative constant "
           << constant << "\n";
}

void cmd_dictionary(const RunContext& ctx) {
  check_keys(ctx.cfg, "config",
             {"schema_version", "experiment", "seed", "output", "activation",
              "target", "dictionary"});
  const model::ActivationSpec activation = parse_activation(ctx.cfg);
  const model::TargetSpec target = parse_target(ctx.cfg);
  const json& s = get_section(ctx.cfg, "dictionary");
  check_keys(s, "dictionary",
             {"method", "order", "nodes", "lambda", "c_sigma", "big_c_sigma",
              "eval_nodes"});
  const std::string method = get_choice(s, "dictionary", "method",
                                        {"auto", "quadrature"},
                                        std::string("auto"));
  const int order = int(get_count(s, "dictionary", "order", 64, 1));
  const int nodes = int(get_count(s, "dictionary", "nodes", 200, 2));
  const double lambda = get_positive(s, "dictionary", "lambda");
  const double c_sigma = get_positive(s, "dictionary", "c_sigma", 1.0);
  const double big_c_sigma = get_positive(s, "dictionary", "big_c_sigma", 1.0);
  const int eval_nodes = int(get_count(s, "dictionary", "eval_nodes", 400, 2));

  const RidgeProfile profile = ridge_profile(target);
  const dictionary::HermiteExpansion expansion =
      method == "auto"
          ? harness::target_profile_expansion(target, order)
          : dictionary::expand(profile.g, order, nodes, profile.kinks);
  const dictionary::ThresholdReport report = dictionary::threshold(
      expansion, lambda, c_sigma, activation.mult_sigma, big_c_sigma);

  io::CsvWriter coeffs({"m", "coefficient"});
  for (Index m = 0; m < expansion.coefficients.size(); ++m)
    coeffs.add_row({double(m), expansion.coefficients[m]});
  write_artifact(ctx, "coefficients.csv", coeffs.str());

  json out = threshold_to_json(report);
  out["converged"] = expansion.converged;
  out["max_coeff_change"] = expansion.max_coeff_change;
  out["norm_sq"] = expansion.norm_sq;
  out["parseval_residual"] = dictionary::parseval_residual(
      expansion, report.retained, profile.g, eval_nodes, profile.kinks);
  write_artifact(ctx, "threshold.json", io::dump_json(out));
  write_artifact(
      ctx, "coefficients.plt",
      io::gnuplot_script("coefficients.csv", "ridge-profile coefficients",
                         "m", "coefficient", {{1, 2, "coefficient"}}, false));

  *ctx.out << "dictionary: " << report.retained.size()
           << " retained indices, kappa " << report.kappa << "\n";
}

void cmd_invariants(const RunContext& ctx) {
  check_keys(ctx.cfg, "config",
             {"schema_version", "experiment", "seed", "output"});
  const std::vector<quotient::InvariantRow> rows = quotient::invariant_table();
  const auto residual_name = [](quotient::ResidualKind kind) {
    switch (kind) {
      case quotient::ResidualKind::Zero: return "zero";
      case quotient::ResidualKind::ExpSmall: return "exp_small";
      case quotient::ResidualKind::TargetNorm: return "target_norm";
      case quotient::ResidualKind::TargetDependent: return "target_dependent";
    }
    return "unknown";
  };
  io::CsvWriter table({"activation", "target", "d_eff", "orbit_dim",
                       "orbit_dim_is_convention", "sparse_depth", "residual",
                       "stat_factor"});
  json rows_json = json::array();
  for (const auto& row : rows) {
    table.add_row_text({row.activation, row.target, row.d_eff,
                        std::to_string(row.d_orb),
                        row.d_orb_convention ? "true" : "false", row.s_star,
                        residual_name(row.residual), row.stat_factor});
    json j;
    j["activation"] = row.activation;
    j["target"] = row.target;
    j["d_eff"] = row.d_eff;
    j["orbit_dim"] = row.d_orb;
    j["orbit_dim_is_convention"] = row.d_orb_convention;
    j["sparse_depth"] = row.s_star;
    j["residual"] = residual_name(row.residual);
    j["stat_factor"] = row.stat_factor;
    rows_json.push_back(std::move(j));
  }
  write_artifact(ctx, "invariants.csv", table.str());
  json out;
  out["rows"] = std::move(rows_json);
  write_artifact(ctx, "invariants.json", io::dump_json(out));
  *ctx.out << "invariants: " << rows.size() << " table rows\n";
}

void cmd_decompose(const RunContext& ctx) {
  check_keys(ctx.cfg, "config",
             {"schema_version", "experiment", "seed", "output", "activation",
              "target", "decompose", "tolerances"});
  harness::DecompositionPlan plan;
  plan.activation = parse_activation(ctx.cfg);
  plan.target = parse_target(ctx.cfg);
  const json& s = get_section(ctx.cfg, "decompose");
  check_keys(s, "decompose",
             {"n_grid", "t_grid", "sample_grid", "lambda_grid", "c_sigma",
              "big_c_sigma", "expansion_order", "poc", "opt", "stat"});
  plan.n_grid = get_counts(s, "decompose", "n_grid");
  plan.t_grid = get_vector(s, "decompose", "t_grid");
  plan.sample_grid = get_counts(s, "decompose", "sample_grid");
  plan.lambda_grid = get_vector(s, "decompose", "lambda_grid");
  for (Index i = 0; i < plan.lambda_grid.size(); ++i)
    if (!(plan.lambda_grid[i] > 0.0))
      fail("decompose.lambda_grid", "entries must be > 0");
  plan.c_sigma = get_positive(s, "decompose", "c_sigma", 1.0);
  plan.big_c_sigma = get_positive(s, "decompose", "big_c_sigma", 1.0);
  plan.expansion_order =
      int(get_count(s, "decompose", "expansion_order", 32, 1));
  plan.mult_sigma = plan.activation.mult_sigma;

  {
    const json& p = get_section(s, "poc");
    check_keys(p, "decompose.poc",
               {"lambda", "horizon", "dt", "batch_size", "ref_width", "reps",
                "record_every", "w2_cap"});
    plan.poc.lambda = get_positive(p, "decompose.poc", "lambda", 0.05);
    plan.poc.horizon = get_positive(p, "decompose.poc", "horizon", 0.5);
    plan.poc.dt = get_positive(p, "decompose.poc", "dt", 0.005);
    plan.poc.batch_size = get_count(p, "decompose.poc", "batch_size", 256, 1);
    plan.poc.ref_width = get_count(p, "decompose.poc", "ref_width", 4096, 1);
    plan.poc.reps = get_count(p, "decompose.poc", "reps", 8, 1);
    plan.poc.record_every =
        get_count(p, "decompose.poc", "record_every", 10, 1);
    plan.poc.w2_cap = get_count(p, "decompose.poc", "w2_cap",
                                transport::kAssignmentCap, 1);
    plan.poc.seed = ctx.seed;
    plan.poc.threads = ctx.threads;
  }
  {
    const json& p = get_section(s, "opt");
    check_keys(p, "decompose.opt",
               {"lambda", "dt", "n_particles", "batch_size", "eval_size"});
    plan.opt.lambda = get_positive(p, "decompose.opt", "lambda", 0.05);
    plan.opt.dt = get_positive(p, "decompose.opt", "dt", 0.005);
    plan.opt.n_particles =
        get_count(p, "decompose.opt", "n_particles", 2048, 1);
    plan.opt.batch_size = get_count(p, "decompose.opt", "batch_size", 256, 1);
    plan.opt.eval_size = get_count(p, "decompose.opt", "eval_size", 20000, 1);
    plan.opt.seed = ctx.seed;
  }
  {
    const json& p = get_section(s, "stat");
    check_keys(p, "decompose.stat",
               {"lambda", "horizon", "dt", "n_particles", "batch_size",
                "label_noise", "reps", "eval_size"});
    plan.stat.lambda = get_positive(p, "decompose.stat", "lambda", 0.05);
    plan.stat.horizon = get_positive(p, "decompose.stat", "horizon", 1.0);
    plan.stat.dt = get_positive(p, "decompose.stat", "dt", 0.005);
    plan.stat.n_particles =
        get_count(p, "decompose.stat", "n_particles", 256, 1);
    plan.stat.batch_size = get_count(p, "decompose.stat", "batch_size", 64, 1);
    plan.stat.label_noise =
        get_nonnegative(p, "decompose.stat", "label_noise", 0.0);
    plan.stat.reps = get_count(p, "decompose.stat", "reps", 4, 1);
    plan.stat.eval_size =
        get_count(p, "decompose.stat", "eval_size", 20000, 1);
    plan.stat.seed = ctx.seed;
    plan.stat.threads = ctx.threads;
  }

  const harness::DecompositionReport report =
      harness::run_decomposition(plan);

  io::CsvWriter epoc({"N", "mean_sync_bound", "stderr"});
  for (Index i = 0; i < report.e_poc.grid.xs.size(); ++i)
    epoc.add_row({report.e_poc.grid.xs[i], report.e_poc.grid.means[i],
                  report.e_poc.grid.stderrs[i]});
  write_artifact(ctx, "epoc.csv", epoc.str());

  io::CsvWriter eopt({"time", "risk"});
  for (Index i = 0; i < report.e_opt.times.size(); ++i)
    eopt.add_row({report.e_opt.times[i], report.e_opt.risks[i]});
  write_artifact(ctx, "eopt.csv", eopt.str());

  io::CsvWriter estat({"n", "excess_mean", "stderr"});
  for (Index i = 0; i < report.e_stat.xs.size(); ++i)
    estat.add_row({report.e_stat.xs[i], report.e_stat.means[i],
                   report.e_stat.stderrs[i]});
  write_artifact(ctx, "estat.csv", estat.str());

  io::CsvWriter esparse({"lambda", "s_up", "kappa", "retained_energy"});
  for (const auto& point : report.e_sparse.points)
    esparse.add_row({point.lambda, double(point.report.s_up),
                     point.report.kappa, point.report.retained_energy});
  write_artifact(ctx, "esparse.csv", esparse.str());

  json out;
  out["poc"] = slope_grid_to_json(report.e_poc.grid);
  json opt;
  opt["plateau"] = report.e_opt.plateau;
  opt["no_decay"] = report.e_opt.no_decay;
  if (!report.e_opt.no_decay) {
    opt["alpha_hat"] = report.e_opt.alpha_hat;
    opt["r2"] = report.e_opt.r2;
  }
  out["opt"] = std::move(opt);
  out["stat"] = slope_grid_to_json(report.e_stat);
  json cross;
  cross["poc_opt"] = report.cross.poc_opt;
  cross["opt_stat"] = report.cross.opt_stat;
  cross["opt_sparse"] = report.cross.opt_sparse;
  cross["stat_sparse"] = report.cross.stat_sparse;
  cross["remainder_bound"] = report.cross.remainder_bound;
  out["cross"] = std::move(cross);
  out["schedule"] = schedule_to_json(report.schedule);
  write_artifact(ctx, "decomposition.json", io::dump_json(out));

  write_artifact(
      ctx, "epoc.plt",
      io::gnuplot_script("epoc.csv", "coupling bound vs width", "N",
                         "mean sync bound", {{1, 2, "sync bound"}}, true));
  write_artifact(ctx, "eopt.plt",
                 io::gnuplot_script("eopt.csv", "risk vs horizon", "time",
                                    "risk", {{1, 2, "risk"}}, false));
  write_artifact(
      ctx, "estat.plt",
      io::gnuplot_script("estat.csv", "empirical excess vs sample size", "n",
                         "excess risk", {{1, 2, "excess"}}, true));

  *ctx.out << "decompose: remainder bound "
           << report.cross.remainder_bound << ", schedule "
           << (report.schedule.pass ? "pass" : "fail") << "\n";
}

void cmd_rates(const RunContext& ctx) {
  check_keys(ctx.cfg, "config",
             {"schema_version", "experiment", "seed", "output", "rates"});
  const json& s = get_section(ctx.cfg, "rates");
  check_keys(s, "rates", {"regime", "params", "covering", "schedule"});
  const std::string regime_name = get_choice(
      s, "rates", "regime",
      {"balanced", "poly_tail", "sigmoid_exp", "bounded_act"});
  dictionary::RateRegime regime = dictionary::RateRegime::Balanced;
  if (regime_name == "poly_tail") regime = dictionary::RateRegime::PolyTail;
  if (regime_name == "sigmoid_exp")
    regime = dictionary::RateRegime::SigmoidExp;
  if (regime_name == "bounded_act")
    regime = dictionary::RateRegime::BoundedAct;

  dictionary::RateParams params;
  if (s.find("params") != s.end()) {
    const json& p = get_section(s, "params");
    check_keys(p, "rates.params",
               {"n_particles", "n_samples", "horizon", "lambda",
                "sparse_depth", "d_eff", "d_orb", "alpha_hat", "kappa",
                "beta", "tail_amp", "tail_rate", "c_sigma"});
    params.n_particles =
        get_number(p, "rates.params", "n_particles", params.n_particles);
    params.n_samples =
        get_number(p, "rates.params", "n_samples", params.n_samples);
    params.horizon = get_number(p, "rates.params", "horizon", params.horizon);
    params.lambda = get_number(p, "rates.params", "lambda", params.lambda);
    params.sparse_depth =
        get_number(p, "rates.params", "sparse_depth", params.sparse_depth);
    params.d_eff = get_number(p, "rates.params", "d_eff", params.d_eff);
    params.d_orb = get_number(p, "rates.params", "d_orb", params.d_orb);
    params.alpha_hat =
        get_number(p, "rates.params", "alpha_hat", params.alpha_hat);
    params.kappa = get_number(p, "rates.params", "kappa", params.kappa);
    params.beta = get_number(p, "rates.params", "beta", params.beta);
    params.tail_amp =
        get_number(p, "rates.params", "tail_amp", params.tail_amp);
    params.tail_rate =
        get_number(p, "rates.params", "tail_rate", params.tail_rate);
    params.c_sigma = get_number(p, "rates.params", "c_sigma", params.c_sigma);
  }

  const dictionary::RateReport report =
      dictionary::predicted_rates(regime, params);
  json out;
  out["regime"] = regime_name;
  out["e_poc"] = report.e_poc;
  out["e_stat"] = report.e_stat;
  out["e_opt"] = report.e_opt;
  out["kappa"] = report.kappa;
  out["total"] = report.total;
  out["s_balance"] = report.s_balance;
  out["s_bound"] = report.s_bound;
  out["headline"] = report.headline;

  if (s.find("covering") != s.end()) {
    const json& c = get_section(s, "covering");
    check_keys(c, "rates.covering",
               {"epsilon", "sparse_depth", "d_eff", "d_orb", "radius",
                "growth_exponent", "big_c"});
    out["covering_log"] = quotient::covering_log(
        get_positive(c, "rates.covering", "epsilon"),
        get_positive(c, "rates.covering", "sparse_depth"),
        int(get_count(c, "rates.covering", "d_eff", std::nullopt, 1)),
        int(get_count(c, "rates.covering", "d_orb", 0, 0)),
        get_positive(c, "rates.covering", "radius"),
        int(get_count(c, "rates.covering", "growth_exponent", 1, 1)),
        get_positive(c, "rates.covering", "big_c", 1.0));
  }
  if (s.find("schedule") != s.end()) {
    const json& c = get_section(s, "schedule");
    check_keys(c, "rates.schedule",
               {"n_particles", "n_samples", "horizon", "lambda", "alpha_hat",
                "sparse_depth"});
    out["schedule"] = schedule_to_json(dictionary::schedule_check(
        get_positive(c, "rates.schedule", "n_particles"),
        get_positive(c, "rates.schedule", "n_samples"),
        get_positive(c, "rates.schedule", "horizon"),
        get_positive(c, "rates.schedule", "lambda"),
        get_nonnegative(c, "rates.schedule", "alpha_hat"),
        get_nonnegative(c, "rates.schedule", "sparse_depth")));
  }
  write_artifact(ctx, "rates.json", io::dump_json(out));
  *ctx.out << "rates: regime " << regime_name << ", headline "
           << report.headline << "\n";
}

void cmd_floor(const RunContext& ctx) {
  check_keys(ctx.cfg, "config",
             {"schema_version", "experiment", "seed", "output", "dynamics",
              "floor"});
  const ParsedDynamics dyn = parse_dynamics(ctx.cfg, ctx.seed, true);
  const json& s = get_section(ctx.cfg, "floor");
  check_keys(s, "floor", {"degree", "order", "input_dim", "n_particles"});
  const int degree = int(get_count(s, "floor", "degree", std::nullopt, 1));
  const int order = int(get_count(s, "floor", "order", std::nullopt, 1));
  const Index input_dim = get_count(s, "floor", "input_dim", 2, 1);
  const Index n_particles = get_count(s, "floor", "n_particles", 256, 1);

  const harness::FloorReport report = harness::nonrealizability_floor(
      degree, order, input_dim, dyn.cfg, n_particles);

  json out;
  out["degree"] = degree;
  out["order"] = order;
  out["input_dim"] = input_dim;
  out["n_particles"] = n_particles;
  out["realizable"] = report.realizable;
  out["initial_risk"] = report.initial_risk;
  out["trained_risk"] = report.trained_risk;
  out["floor"] = report.floor;
  out["passes"] = report.passes;
  write_artifact(ctx, "floor.json", io::dump_json(out));

  *ctx.out << "floor: " << (report.realizable ? "realizable" : "floor")
           << " branch, trained risk " << report.trained_risk << " vs floor "
           << report.floor << "\n";
}

void cmd_describe(const std::string& kind, std::ostream& out) {
  if (kind == "simulate") {
    out << "simulate: integrates the interacting-particle Langevin system\n"
           "for one configuration and writes the particle trajectory and\n"
           "the Monte Carlo risk series.  Sanity anchor: with outputs\n"
           "frozen the per-coordinate long-run variance is 1.\n";
  } else if (kind == "couple") {
    out << "couple: drives the width-N system and its mean-field copies\n"
           "with shared Brownian increments and fits the propagation-of-\n"
           "chaos slope of the coupling bound against N.  Targets: slope\n"
           "in [-1.35, -0.65] with r2 >= 0.9 on the reference scenario,\n"
           "and the exact squared transport distance never exceeding the\n"
           "coupling bound at any recorded time.\n";
  } else if (kind == "moments") {
    out << "moments: tabulates the even-moment boundary of the\n"
           "initialization, the reciprocal weight w*, submultiplicativity\n"
           "constants, and divergence witnesses for weights at or above\n"
           "the boundary.  Targets: w*(n)·sqrt(n) within [0.3, 3] and a\n"
           "divergence flag for flat weights only.\n";
  } else if (kind == "dictionary") {
    out << "dictionary: expands the target's ridge profile in normalized\n"
           "Hermite polynomials, applies the coefficient threshold at the\n"
           "given temperature, and reports retained indices, the sparse\n"
           "depth bound, and the discarded-energy tail kappa.\n";
  } else if (kind == "invariants") {
    out << "invariants: writes the architecture-target invariant table —\n"
           "effective dimension, symmetry orbit dimension, sparse depth\n"
           "class, residual class, and the per-atom statistical factor\n"
           "for each canonical activation/target pairing.\n";
  } else if (kind == "decompose") {
    out << "decompose: measures all four error components — coupling vs\n"
           "width, decay vs horizon, empirical excess vs sample size,\n"
           "threshold tail vs temperature — fits their exponents, bounds\n"
           "the cross terms, and checks the joint-limit schedule.\n";
  } else if (kind == "rates") {
    out << "rates: closed-form rate calculators for the balanced,\n"
           "polynomial-tail, exponential-tail, and bounded-activation\n"
           "regimes, plus the covering-number and schedule calculators.\n";
  } else if (kind == "floor") {
    out << "floor: the non-realizability floor experiment.  A degree-k\n"
           "monomial network trained on an order-m Hermite ridge stalls\n"
           "at >= 0.8 of the target energy when m > k, and trains below\n"
           "0.3 when m <= k.\n";
  } else {
    fail("describe", "unknown experiment kind '" + kind + "'");
  }
}

// ---------------------------------------------------------------------------
// Config loading and dispatch
// ---------------------------------------------------------------------------

void apply_override(json* cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    fail("--set", "expected key=value, got '" + assignment + "'");
  const std::string dotted = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;  // bare words are strings
  }
  json* node = cfg;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) fail("--set", "empty key segment in '" + dotted + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    json& child = (*node)[key];
    if (child.is_null()) child = json::object();
    if (!child.is_object())
      fail("--set", "'" + dotted.substr(0, dot) + "' is not an object");
    node = &child;
    start = dot + 1;
  }
}

std::filesystem::path resolve_out_dir(const std::string& flag_out,
                                      const json& cfg,
                                      const std::string& experiment) {
  if (!flag_out.empty()) return flag_out;
  auto it = cfg.find("output");
  if (it != cfg.end()) {
    if (!it->is_string()) fail("output", "must be a string");
    return it->get<std::string>();
  }
  if (const char* env = std::getenv("MFLAB_OUT"))
    return std::filesystem::path(env) / experiment;
  return std::filesystem::path("out") / experiment;
}

int dispatch(const std::string& experiment, const std::string& config_path,
             const std::string& flag_out, std::optional<std::uint64_t> seed,
             Index threads, const std::vector<std::string>& overrides,
             std::ostream& out) {
  json cfg;
  try {
    cfg = json::parse(io::read_file(config_path));
  } catch (const json::exception& e) {
    fail("(config file)", std::string("invalid JSON: ") + e.what());
  } catch (const std::runtime_error& e) {
    fail("(config file)", e.what());
  }
  if (!cfg.is_object()) fail("(config file)", "top level must be an object");

  for (const auto& assignment : overrides) apply_override(&cfg, assignment);
  if (seed) cfg["seed"] = *seed;

  // Schema preamble shared by every experiment.
  {
    auto it = cfg.find("schema_version");
    if (it == cfg.end()) fail("schema_version", "required");
    if (!it->is_number_integer() || it->get<int>() != kSchemaVersion)
      fail("schema_version",
           "must be " + std::to_string(kSchemaVersion));
    auto ex = cfg.find("experiment");
    if (ex == cfg.end()) fail("experiment", "required");
    if (!ex->is_string() || ex->get<std::string>() != experiment)
      fail("experiment", "config declares a different experiment than the '" +
                             experiment + "' subcommand");
  }

  RunContext ctx;
  ctx.cfg = cfg;
  ctx.experiment = experiment;
  ctx.seed = 0;
  if (cfg.contains("seed")) {
    const json& sj = cfg["seed"];
    if (sj.is_number_unsigned()) {
      ctx.seed = sj.get<std::uint64_t>();
    } else if (sj.is_number_integer() && sj.get<std::int64_t>() >= 0) {
      ctx.seed = std::uint64_t(sj.get<std::int64_t>());
    } else {
      fail("seed", "must be an unsigned integer");
    }
  }
  ctx.threads = threads;
  ctx.out_dir = resolve_out_dir(flag_out, cfg, experiment);
  ctx.out = &out;

  const auto started = std::chrono::steady_clock::now();
  if (experiment == "simulate") cmd_simulate(ctx);
  else if (experiment == "couple") cmd_couple(ctx);
  else if (experiment == "moments") cmd_moments(ctx);
  else if (experiment == "dictionary") cmd_dictionary(ctx);
  else if (experiment == "invariants") cmd_invariants(ctx);
  else if (experiment == "decompose") cmd_decompose(ctx);
  else if (experiment == "rates") cmd_rates(ctx);
  else if (experiment == "floor") cmd_floor(ctx);
  else fail("experiment", "unknown experiment '" + experiment + "'");
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    started)
          .count();

  // The manifest fingerprints the effective config (file plus
  // overrides); the output location and worker count are runtime
  // details and stay out of the hash.
  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["experiment"] = experiment;
  manifest["config_hash"] = io::hex64(io::fnv1a64(io::dump_json(cfg)));
  manifest["seed"] = ctx.seed;
  manifest["versions"] = {
      {"tool", kToolVersion},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)}};
  manifest["wall_time_seconds"] = wall;
  write_artifact(ctx, "manifest.json", io::dump_json(manifest));
  out << "artifacts: " << ctx.out_dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"mflab — desk-scale numerical laboratory for mean-field "
               "Langevin training"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_flag = 0;
  Index threads = 1;
  std::vector<std::string> overrides;
  std::string describe_kind;

  const std::vector<std::string> experiments = {
      "simulate", "couple",    "moments", "dictionary",
      "invariants", "decompose", "rates",   "floor"};
  for (const auto& name : experiments) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name +
                                                 " experiment");
    sub->add_option("--config", config_path, "JSON experiment config")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed_flag, "override the config seed");
    sub->add_option("--threads", threads,
                    "worker count (never affects results)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--set", overrides,
                    "dotted-path config override key=value");
  }
  CLI::App* describe =
      app.add_subcommand("describe", "explain an experiment kind");
  describe->add_option("kind", describe_kind, "experiment kind")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("mflab");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (describe->parsed()) {
      cmd_describe(describe_kind, out);
      return kExitOk;
    }
    for (const auto& name : experiments) {
      CLI::App* sub = app.get_subcommand(name);
      if (sub->parsed()) {
        std::optional<std::uint64_t> seed;
        if (sub->count("--seed") > 0) seed = seed_flag;
        return dispatch(name, config_path, out_dir, seed, threads, overrides,
                        out);
      }
    }
    err << "error: no subcommand\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace mflab::cli

#include "mflab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mflab/moments.hpp"
#include "mflab/rng.hpp"

namespace mflab::transport {

double w2_squared_1d(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("w2_squared_1d: samples must have equal size");
  if (a.size() == 0)
    throw std::invalid_argument("w2_squared_1d: samples must be nonempty");
  std::vector<double> sa(a.data(), a.data() + a.size());
  std::vector<double> sb(b.data(), b.data() + b.size());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double total = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double diff = sa[i] - sb[i];
    total += diff * diff;
  }
  return total / double(sa.size());
}

// Shortest-augmenting-path assignment with dual potentials (the O(n³)
// Hungarian scheme).  Arrays are 1-indexed with a virtual column 0 that
// hosts the row currently looking for a match; p[j] is the row matched
// to column j.  The potentials keep every reduced cost nonnegative, so
// each augmentation is a Dijkstra pass over columns.
double assignment_cost(const Matrix& cost) {
  if (cost.rows() != cost.cols())
    throw std::invalid_argument("assignment_cost: cost matrix must be square");
  const Index n = cost.rows();
  if (n == 0) return 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(std::size_t(n) + 1, 0.0);
  std::vector<double> v(std::size_t(n) + 1, 0.0);
  std::vector<Index> p(std::size_t(n) + 1, 0);
  std::vector<Index> way(std::size_t(n) + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(std::size_t(n) + 1, inf);
    std::vector<char> used(std::size_t(n) + 1, 0);
    do {
      used[std::size_t(j0)] = 1;
      const Index i0 = p[std::size_t(j0)];
      Index j1 = 0;
      double delta = inf;
      for (Index j = 1; j <= n; ++j) {
        if (used[std::size_t(j)]) continue;
        const double cur =
            cost(i0 - 1, j - 1) - u[std::size_t(i0)] - v[std::size_t(j)];
        if (cur < minv[std::size_t(j)]) {
          minv[std::size_t(j)] = cur;
          way[std::size_t(j)] = j0;
        }
        if (minv[std::size_t(j)] < delta) {
          delta = minv[std::size_t(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[std::size_t(j)]) {
          u[std::size_t(p[std::size_t(j)])] += delta;
          v[std::size_t(j)] -= delta;
        } else {
          minv[std::size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[std::size_t(j0)] != 0);
    // Walk the augmenting path back to the virtual column, flipping
    // the matches along it.
    do {
      const Index j1 = way[std::size_t(j0)];
      p[std::size_t(j0)] = p[std::size_t(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (Index j = 1; j <= n; ++j) total += cost(p[std::size_t(j)] - 1, j - 1);
  return total;
}

double w2_squared_points(const Matrix& a, const Matrix& b, Index cap) {
  if (a.cols() != b.cols())
    throw std::invalid_argument(
        "w2_squared_points: point clouds must share their dimension");
  if (a.rows() != b.rows())
    throw std::invalid_argument(
        "w2_squared_points: equal-size empirical measures required");
  if (a.rows() == 0)
    throw std::invalid_argument("w2_squared_points: point clouds are empty");
  if (a.rows() > cap)
    throw std::invalid_argument(
        "w2_squared_points: size exceeds the exact-solver cap");
  const Index n = a.rows();
  // The pairwise costs are formed by direct differencing rather than
  // the |a|²+|b|²−2⟨a,b⟩ expansion: the clouds of interest are nearly
  // coincident and the expansion would cancel catastrophically exactly
  // where the answer is smallest.
  Matrix cost(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      cost(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return assignment_cost(cost) / double(n);
}

double w2_squared(const model::Ensemble& a, const model::Ensemble& b,
                  Index cap) {
  return w2_squared_points(a.theta, b.theta, cap);
}

CouplingRecord coupled_run(Index n_particles, Index n_ref,
                           const dynamics::DynamicsConfig& cfg,
                           const model::ActivationSpec& spec,
                           const model::TargetSpec& target, Index record_every,
                           Index cap) {
  dynamics::validate(cfg);
  if (n_particles < 1)
    throw std::invalid_argument("coupled_run: n_particles must be >= 1");
  if (n_ref < 8 * n_particles)
    throw std::invalid_argument(
        "coupled_run: n_ref must be at least 8x n_particles so the proxy "
        "bias sits below the measured O(1/N) gap");
  if (cfg.freeze_outputs)
    throw std::invalid_argument(
        "coupled_run: freeze_outputs is not supported in the coupling "
        "experiment");
  const Index d = target.input_dim();

  // Three systems: the interacting width-N system, N mean-field copies
  // that share its initial points and Brownian increments but feel the
  // drift of an independent proxy, and the width-n_ref proxy itself.
  model::Ensemble main_sys =
      model::mup_init(n_particles, d, cfg.seed, StreamTag::Init);
  model::Ensemble copies = main_sys;
  model::Ensemble aux =
      model::mup_init(n_ref, d, cfg.seed, StreamTag::AuxInit);

  const moments::WeightSequence wseq =
      moments::wstar_sequence(moments::mup_gaussian_init(int(d)), 4);

  CouplingRecord rec;
  rec.n_particles = n_particles;
  rec.n_ref = n_ref;
  rec.seed = cfg.seed;

  const auto record = [&]() {
    rec.times.push_back(main_sys.time);
    rec.sync_bound.push_back((main_sys.theta - copies.theta).squaredNorm() /
                             double(n_particles));
    if (n_particles <= cap)
      rec.w2sq_exact.push_back(
          w2_squared_points(main_sys.theta, copies.theta, cap));
    rec.weighted_norm.push_back(
        moments::empirical_weighted_norm(main_sys, wseq, 4));
  };

  record();  // state at time 0
  for (Index step = 0; step < cfg.steps; ++step) {
    // One shared batch per step; every drift is evaluated at the
    // pre-step states before any system moves.
    const model::Dataset batch =
        dynamics::step_batch(cfg, target, d, std::uint64_t(step));
    const Matrix drift_main = dynamics::drift_against(
        main_sys, main_sys.theta, batch, cfg.lambda, spec);
    const Matrix drift_copies =
        dynamics::drift_against(aux, copies.theta, batch, cfg.lambda, spec);
    const Matrix drift_aux =
        dynamics::drift_against(aux, aux.theta, batch, cfg.lambda, spec);
    const Matrix noise_main = dynamics::noise_matrix(
        n_particles, d + 2, cfg.seed, StreamTag::Noise, std::uint64_t(step));
    const Matrix noise_aux = dynamics::noise_matrix(
        n_ref, d + 2, cfg.seed, StreamTag::AuxNoise, std::uint64_t(step));
    dynamics::langevin_step_with_noise(main_sys, drift_main, noise_main, cfg,
                                       std::uint64_t(step));
    dynamics::langevin_step_with_noise(copies, drift_copies, noise_main, cfg,
                                       std::uint64_t(step));
    dynamics::langevin_step_with_noise(aux, drift_aux, noise_aux, cfg,
                                       std::uint64_t(step));
    const Index k = step + 1;
    if (k == cfg.steps || (record_every > 0 && k % record_every == 0))
      record();
  }
  return rec;
}

LogLogFit fit_loglog(const Vector& xs, const Vector& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("fit_loglog: size mismatch");
  if (xs.size() < 3)
    throw std::invalid_argument("fit_loglog: need at least 3 points");
  for (Index i = 0; i < xs.size(); ++i)
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw std::invalid_argument(
          "fit_loglog: points must be strictly positive");
  const Vector lx = xs.array().log();
  const Vector ly = ys.array().log();
  const double mx = lx.mean();
  const double my = ly.mean();
  const double sxx = (lx.array() - mx).square().sum();
  if (sxx <= 0.0)
    throw std::invalid_argument("fit_loglog: abscissae must not coincide");
  const double sxy = ((lx.array() - mx) * (ly.array() - my)).sum();
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double sst = (ly.array() - my).square().sum();
  const Vector resid = ly.array() - (fit.intercept + fit.slope * lx.array());
  const double ssr = resid.squaredNorm();
  fit.r2 = sst <= 1e-300 ? 1.0 : 1.0 - ssr / sst;
  return fit;
}

}  // namespace mflab::transport

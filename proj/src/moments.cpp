#include "mflab/moments.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mflab::moments {

namespace {

void check_order(int n) {
  if (n < 1) {
    throw std::invalid_argument("moments: order n must be >= 1");
  }
  if (2 * n > kMaxMomentOrder) {
    throw std::invalid_argument(
        "moments: order 2n exceeds the supported range (use the log form)");
  }
}

// log of n-choose-k for the binomial expansion of the maximal-update
// moment; exact enough at these orders via lgamma.
double log_binomial(int n, int k) {
  return std::lgamma(double(n + 1)) - std::lgamma(double(k + 1)) -
         std::lgamma(double(n - k + 1));
}

// log E|w|^{2k} for w ~ N(0, I_d/d): −k·log d + Σ_{j<k} log(d+2j).
double log_scaled_chi_moment(int k, int d) {
  double acc = -double(k) * std::log(double(d));
  for (int j = 0; j < k; ++j) acc += std::log(double(d + 2 * j));
  return acc;
}

}  // namespace

double gaussian_even_moment(int n, int m) {
  check_order(n);
  if (m < 1) throw std::invalid_argument("gaussian_even_moment: m must be >= 1");
  // 2^n·Γ(n+m/2)/Γ(m/2) telescopes to the integer product Π (m+2j).
  double acc = 1.0;
  for (int j = 0; j < n; ++j) {
    acc *= double(m + 2 * j);
    if (!std::isfinite(acc)) {
      throw std::overflow_error("gaussian_even_moment: overflow");
    }
  }
  return acc;
}

double double_factorial_odd(int n) {
  if (n < 0) throw std::invalid_argument("double_factorial_odd: n must be >= 0");
  double acc = 1.0;
  for (int j = 1; j <= n; ++j) acc *= double(2 * j - 1);
  return acc;
}

InitSpec standard_gaussian_init(int m) {
  if (m < 1) throw std::invalid_argument("standard_gaussian_init: m >= 1");
  return InitSpec{InitSpec::Kind::StandardGaussian, m, 0.0};
}

InitSpec mup_gaussian_init(int d) {
  if (d < 1) throw std::invalid_argument("mup_gaussian_init: d >= 1");
  return InitSpec{InitSpec::Kind::MupGaussian, d, 0.0};
}

InitSpec point_mass_init(double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("point_mass_init: radius");
  return InitSpec{InitSpec::Kind::PointMass, 1, radius};
}

double log_init_even_moment(const InitSpec& init, int n) {
  if (n < 1) throw std::invalid_argument("log_init_even_moment: n >= 1");
  switch (init.kind) {
    case InitSpec::Kind::StandardGaussian: {
      // log Π (m+2j), directly in log space for large orders.
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += std::log(double(init.dim + 2 * j));
      return acc;
    }
    case InitSpec::Kind::MupGaussian: {
      // |θ|² = |w|² + (b²+a²) with independent blocks; binomial expansion
      //   E|θ|^{2n} = Σ_k C(n,k)·E|w|^{2k}·E(b²+a²)^{n−k},
      // where E(b²+a²)^{j} = 2^j·j! (a two-dimensional standard block).
      const int d = init.dim;
      double log_max = -std::numeric_limits<double>::infinity();
      std::vector<double> log_terms(size_t(n) + 1);
      for (int k = 0; k <= n; ++k) {
        const int j = n - k;
        const double lt = log_binomial(n, k) + log_scaled_chi_moment(k, d) +
                          double(j) * std::log(2.0) +
                          std::lgamma(double(j + 1));
        log_terms[size_t(k)] = lt;
        log_max = std::max(log_max, lt);
      }
      double sum = 0.0;
      for (double lt : log_terms) sum += std::exp(lt - log_max);
      return log_max + std::log(sum);
    }
    case InitSpec::Kind::PointMass: {
      if (init.radius == 0.0) {
        return -std::numeric_limits<double>::infinity();
      }
      return double(2 * n) * std::log(init.radius);
    }
  }
  throw std::logic_error("log_init_even_moment: unhandled kind");
}

double init_even_moment(const InitSpec& init, int n) {
  check_order(n);
  const double lv = log_init_even_moment(init, n);
  if (lv > 700.0) throw std::overflow_error("init_even_moment: overflow");
  return std::exp(lv);
}

double wstar(int n, const InitSpec& init) {
  if (n < 1) throw std::invalid_argument("wstar: n must be >= 1");
  const double lv = log_init_even_moment(init, n);
  if (lv == -std::numeric_limits<double>::infinity()) {
    return std::numeric_limits<double>::infinity();  // zero-mass convention
  }
  return std::exp(-lv / double(2 * n));
}

double WeightSequence::at(int n) const {
  if (n == 0) return 1.0;
  auto it = values.find(n);
  if (it == values.end()) {
    throw std::out_of_range("WeightSequence: order not stored");
  }
  return it->second;
}

WeightSequence wstar_sequence(const InitSpec& init, int n_max) {
  WeightSequence w;
  w.origin = WeightSequence::Origin::ReciprocalOfInit;
  for (int n = 1; n <= n_max; ++n) w.values[n] = wstar(n, init);
  return w;
}

WeightSequence constant_weight(double value, int n_max) {
  WeightSequence w;
  for (int n = 1; n <= n_max; ++n) w.values[n] = value;
  return w;
}

WeightSequence power_weight(double exponent, int n_max) {
  WeightSequence w;
  for (int n = 1; n <= n_max; ++n) {
    w.values[n] = std::pow(double(n), exponent);
  }
  return w;
}

WeightSequence geometric_weight(double ratio, int n_max) {
  WeightSequence w;
  for (int n = 1; n <= n_max; ++n) w.values[n] = std::pow(ratio, double(n));
  return w;
}

double empirical_weighted_norm(const model::Ensemble& ens,
                               const WeightSequence& w, int n_max) {
  if (n_max < 1) throw std::invalid_argument("empirical_weighted_norm: n_max");
  const Index n_particles = ens.width();
  if (n_particles < 1) return 0.0;
  // Accumulate mean |θ_i|^{2n} for every order in one sweep of powers.
  Vector radius_sq(n_particles);
  for (Index i = 0; i < n_particles; ++i) {
    radius_sq[i] = ens.theta.row(i).squaredNorm();
  }
  Vector powers = Vector::Ones(n_particles);
  double best = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    powers.array() *= radius_sq.array();
    const double mean_moment = powers.mean();
    const double root = std::pow(mean_moment, 1.0 / double(2 * n));
    best = std::max(best, w.at(n) * root);
  }
  return best;
}

std::pair<bool, double> check_submultiplicative(const WeightSequence& w,
                                                int n_max) {
  double c = 1.0;
  bool finite = true;
  for (int m = 1; m <= n_max; ++m) {
    for (int n = m; m + n <= 2 * n_max; ++n) {
      auto it = w.values.find(m + n);
      if (it == w.values.end() || w.values.find(n) == w.values.end()) continue;
      const double denom = it->second;
      if (!(denom > 0.0)) {
        finite = false;
        continue;
      }
      const double ratio = w.at(m) * w.at(n) / denom;
      if (!std::isfinite(ratio)) {
        finite = false;
        continue;
      }
      c = std::max(c, ratio);
    }
  }
  return {finite, c};
}

MaximalityReport maximality_witness(const WeightSequence& w_tilde,
                                    const InitSpec& init, int n_max) {
  if (n_max < 4) throw std::invalid_argument("maximality_witness: n_max >= 4");
  MaximalityReport report;
  report.orders.reserve(size_t(n_max));
  report.ratio.reserve(size_t(n_max));
  // Work with log ratios so that high orders never overflow.
  std::vector<double> log_ratio(size_t(n_max) + 1);
  for (int n = 1; n <= n_max; ++n) {
    const double lr = std::log(w_tilde.at(n)) +
                      log_init_even_moment(init, n) / double(2 * n);
    log_ratio[size_t(n)] = lr;
    report.orders.push_back(n);
    report.ratio.push_back(std::exp(lr));
    if (std::exp(lr) > report.threshold) report.crossed_threshold = true;
  }
  // Monotone growth over the top half of the grid.
  report.monotone_tail = true;
  for (int n = n_max / 2 + 1; n < n_max; ++n) {
    if (!(log_ratio[size_t(n + 1)] > log_ratio[size_t(n)])) {
      report.monotone_tail = false;
      break;
    }
  }
  // Least-squares slope of log ratio against log n.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double lx = std::log(double(n));
    sx += lx;
    sy += log_ratio[size_t(n)];
    sxx += lx * lx;
    sxy += lx * log_ratio[size_t(n)];
  }
  const double count = double(n_max);
  report.fitted_exponent =
      (count * sxy - sx * sy) / (count * sxx - sx * sx);
  report.diverges = report.crossed_threshold ||
                    (report.monotone_tail && report.fitted_exponent > 0.1);
  return report;
}

}  // namespace mflab::moments

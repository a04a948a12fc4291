#include "mflab/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mflab::dictionary {

namespace {

constexpr double kSqrt2Pi = 2.506628274631000502415765284811;

// Integration range for the kink-panel path: beyond |z| = 14 the
// Gaussian factor times any polynomial of the orders used here is far
// below double precision.
constexpr double kPanelRange = 14.0;
constexpr double kPanelWidth = 0.5;

void check_nodes(int n, const char* where) {
  if (n < 2) {
    throw std::invalid_argument(std::string(where) +
                                ": need at least 2 quadrature nodes");
  }
}

// Golub–Welsch: nodes are eigenvalues of the symmetric tridiagonal
// Jacobi matrix of the three-term recurrence; the weight of node i is
// μ₀ times the squared first component of its normalized eigenvector.
QuadratureRule golub_welsch(const Vector& off_diagonal, double mu0) {
  const Index n = off_diagonal.size() + 1;
  Matrix jacobi = Matrix::Zero(n, n);
  for (Index j = 0; j + 1 < n; ++j) {
    jacobi(j, j + 1) = off_diagonal[j];
    jacobi(j + 1, j) = off_diagonal[j];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("golub_welsch: eigen decomposition failed");
  }
  QuadratureRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

// Coefficients of g against h_0..h_M under an explicit rule whose
// weights already include the Gaussian density.
Vector coefficients_under_rule(const std::function<double(double)>& g, int M,
                               const QuadratureRule& rule, double* norm_sq) {
  Vector coeffs = Vector::Zero(M + 1);
  double nsq = 0.0;
  for (Index i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    const double gz = g(z);
    if (!std::isfinite(gz)) {
      throw std::invalid_argument(
          "expand: target function is not finite at a quadrature node");
    }
    const Vector h = hermite_values_upto(M, z);
    coeffs.noalias() += (rule.weights[i] * gz) * h;
    nsq += rule.weights[i] * gz * gz;
  }
  if (norm_sq != nullptr) *norm_sq = nsq;
  return coeffs;
}

// Composite Gauss–Legendre rule over [−kPanelRange, kPanelRange] split
// at the kinks, with the Gaussian density folded into the weights.
QuadratureRule kink_panel_rule(const std::vector<double>& kinks,
                               int nodes_per_panel) {
  std::vector<double> cuts = {-kPanelRange, kPanelRange};
  for (double k : kinks) {
    if (k > -kPanelRange && k < kPanelRange) cuts.push_back(k);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> nodes, weights;
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s], hi = cuts[s + 1];
    const int panels = std::max(1, int(std::ceil((hi - lo) / kPanelWidth)));
    for (int p = 0; p < panels; ++p) {
      const double a = lo + (hi - lo) * double(p) / double(panels);
      const double b = lo + (hi - lo) * double(p + 1) / double(panels);
      const QuadratureRule gl = gauss_legendre(nodes_per_panel, a, b);
      for (Index i = 0; i < gl.nodes.size(); ++i) {
        const double z = gl.nodes[i];
        nodes.push_back(z);
        weights.push_back(gl.weights[i] * std::exp(-0.5 * z * z) / kSqrt2Pi);
      }
    }
  }
  QuadratureRule rule;
  rule.nodes = Eigen::Map<const Vector>(nodes.data(), Index(nodes.size()));
  rule.weights =
      Eigen::Map<const Vector>(weights.data(), Index(weights.size()));
  return rule;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  check_nodes(n, "gauss_hermite");
  Vector off(n - 1);
  for (int j = 1; j < n; ++j) off[j - 1] = std::sqrt(double(j));
  QuadratureRule rule = golub_welsch(off, 1.0);
  // The eigen-decomposition delivers the nodes to ~1e-13 but the
  // first eigenvector components — and hence the weights — lose several
  // digits for large rules.  Polish each node with Newton's method on
  // h_n (h_n' = sqrt(n)·h_{n-1} by the recurrence) and rebuild the
  // weight from the Christoffel function, w_i = 1/Σ_{m<n} h_m(x_i)²,
  // which is machine-accurate once the node is.  Extreme nodes whose
  // Christoffel sum overflows get the weight 0 their true magnitude
  // (below double underflow) rounds to anyway.
  const double sqrt_n = std::sqrt(double(n));
  for (Index i = 0; i < rule.nodes.size(); ++i) {
    double x = rule.nodes[i];
    for (int pass = 0; pass < 2; ++pass) {
      const Vector h = hermite_values_upto(n, x);
      const double deriv = sqrt_n * h[n - 1];
      if (deriv == 0.0 || !std::isfinite(deriv) || !std::isfinite(h[n]))
        break;
      x -= h[n] / deriv;
    }
    rule.nodes[i] = x;
    const double christoffel_sum =
        hermite_values_upto(n - 1, x).squaredNorm();
    rule.weights[i] =
        std::isfinite(christoffel_sum) ? 1.0 / christoffel_sum : 0.0;
  }
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  check_nodes(n, "gauss_legendre");
  if (!(a < b)) {
    throw std::invalid_argument("gauss_legendre: interval must be ordered");
  }
  Vector off(n - 1);
  for (int j = 1; j < n; ++j) {
    off[j - 1] = double(j) / std::sqrt(4.0 * double(j) * double(j) - 1.0);
  }
  QuadratureRule rule = golub_welsch(off, 2.0);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  rule.nodes = (rule.nodes.array() * half + mid).matrix();
  rule.weights *= half;
  return rule;
}

HermiteExpansion expand(const std::function<double(double)>& g, int M,
                        int nodes, const std::vector<double>& kinks) {
  if (M < 0) throw std::invalid_argument("expand: truncation order M >= 0");
  check_nodes(nodes, "expand");
  HermiteExpansion exp;
  exp.truncation_order = M;
  exp.quadrature_nodes = nodes;

  Vector coarse, fine;
  double norm_fine = 0.0;
  if (kinks.empty()) {
    coarse = coefficients_under_rule(g, M, gauss_hermite(nodes), nullptr);
    fine = coefficients_under_rule(g, M, gauss_hermite(2 * nodes), &norm_fine);
  } else {
    const int per_panel = std::max(8, nodes / 16);
    coarse =
        coefficients_under_rule(g, M, kink_panel_rule(kinks, per_panel), nullptr);
    fine = coefficients_under_rule(g, M, kink_panel_rule(kinks, 2 * per_panel),
                                   &norm_fine);
  }
  exp.coefficients = fine;
  exp.max_coeff_change = (fine - coarse).cwiseAbs().maxCoeff();
  exp.converged = exp.max_coeff_change <= 1e-6;
  exp.norm_sq = norm_fine;
  if (!std::isfinite(exp.norm_sq)) {
    throw std::invalid_argument(
        "expand: target has no finite Gaussian second moment");
  }
  return exp;
}

HermiteExpansion expansion_from_coefficients(const Vector& coefficients) {
  if (coefficients.size() < 1) {
    throw std::invalid_argument("expansion_from_coefficients: empty sequence");
  }
  HermiteExpansion exp;
  exp.coefficients = coefficients;
  exp.truncation_order = int(coefficients.size()) - 1;
  exp.quadrature_nodes = 0;
  exp.converged = true;
  exp.max_coeff_change = 0.0;
  exp.norm_sq = coefficients.squaredNorm();
  return exp;
}

ThresholdReport threshold(const HermiteExpansion& expansion, double lambda,
                          double c_sigma, int mult_sigma, double big_c_sigma) {
  if (!(lambda > 0.0)) throw std::invalid_argument("threshold: lambda > 0");
  if (!(c_sigma > 0.0)) throw std::invalid_argument("threshold: c_sigma > 0");
  if (mult_sigma < 1) throw std::invalid_argument("threshold: mult_sigma >= 1");
  ThresholdReport report;
  report.lambda = lambda;
  report.c_sigma = c_sigma;
  report.big_c_sigma = big_c_sigma;
  report.mult_sigma = mult_sigma;
  double discarded = 0.0;
  for (Index m = 0; m < expansion.coefficients.size(); ++m) {
    const double c = expansion.coefficients[m];
    if (std::abs(c) > c_sigma * lambda) {
      report.retained.push_back(int(m));
      report.retained_energy += c * c;
    } else {
      discarded += c * c;
    }
  }
  report.s_up = int(report.retained.size()) * mult_sigma;
  report.kappa =
      discarded + big_c_sigma * lambda * double(report.retained.size());
  return report;
}

double exp_tail_depth_bound(double A, double tau, double c_sigma,
                            double lambda, int mult_sigma) {
  if (!(A > 0.0 && tau > 0.0 && c_sigma > 0.0 && lambda > 0.0)) {
    throw std::invalid_argument("exp_tail_depth_bound: parameters > 0");
  }
  if (mult_sigma < 1) {
    throw std::invalid_argument("exp_tail_depth_bound: mult_sigma >= 1");
  }
  if (lambda >= A / c_sigma) return 0.0;
  return (1.0 / tau) * std::log(A / (c_sigma * lambda)) * double(mult_sigma);
}

double parseval_residual(const HermiteExpansion& expansion,
                         const std::vector<int>& retained,
                         const std::function<double(double)>& g,
                         int eval_nodes, const std::vector<double>& kinks) {
  check_nodes(eval_nodes, "parseval_residual");
  for (int m : retained) {
    if (m < 0 || m > expansion.truncation_order) {
      throw std::invalid_argument(
          "parseval_residual: retained index outside the expansion");
    }
  }
  const QuadratureRule rule =
      kinks.empty() ? gauss_hermite(eval_nodes)
                    : kink_panel_rule(kinks, std::max(8, eval_nodes / 16));
  const int M = expansion.truncation_order;
  double acc = 0.0;
  for (Index i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    const Vector h = hermite_values_upto(M, z);
    double fit = 0.0;
    for (int m : retained) fit += expansion.coefficients[m] * h[m];
    const double r = g(z) - fit;
    acc += rule.weights[i] * r * r;
  }
  return acc;
}

RateReport predicted_rates(RateRegime regime, const RateParams& p) {
  if (!(p.n_particles > 0.0 && p.n_samples > 0.0 && p.horizon > 0.0 &&
        p.lambda > 0.0 && p.sparse_depth > 0.0)) {
    throw std::invalid_argument("predicted_rates: parameters must be positive");
  }
  const double log_n = std::log(p.n_samples);
  const double factor = p.d_eff + 2.0 - p.d_orb;
  RateReport r;
  r.e_poc = 1.0 / p.n_particles;
  r.e_opt = std::exp(-p.alpha_hat * p.horizon);
  const double log_power = (regime == RateRegime::BoundedAct) ? 1.0 : 2.0;
  r.e_stat = p.sparse_depth * factor * std::pow(log_n, log_power) /
             p.n_samples;
  switch (regime) {
    case RateRegime::Balanced:
      r.kappa = p.kappa;
      r.headline = r.e_poc + r.e_stat + r.kappa;
      break;
    case RateRegime::PolyTail:
      // Tail beyond S of m^{−β} coefficients plus the displacement.
      r.kappa = std::pow(p.sparse_depth, 1.0 - 2.0 * p.beta) +
                p.lambda * p.sparse_depth;
      r.s_balance = std::pow(p.n_samples / (log_n * log_n),
                             1.0 / (2.0 * p.beta));
      r.headline = r.e_poc +
                   std::pow(p.n_samples, -p.beta / (p.beta + 1.0)) *
                       std::pow(log_n, (2.0 * p.beta + 1.0) / (p.beta + 1.0));
      break;
    case RateRegime::SigmoidExp:
      r.kappa = p.lambda * p.lambda +
                p.lambda * std::log(1.0 / p.lambda);
      r.s_bound =
          1.0 + (1.0 / p.tail_rate) *
                    std::log(p.tail_amp / (p.c_sigma * p.lambda));
      r.headline = r.e_poc + std::pow(log_n, 3.0) / p.n_samples;
      break;
    case RateRegime::BoundedAct:
      r.kappa = p.kappa;
      r.headline = r.e_poc + std::pow(log_n, 2.0) / p.n_samples;
      break;
  }
  r.total = r.e_poc + r.e_stat + r.e_opt + r.kappa;
  return r;
}

ScheduleVerdict schedule_check(double n_particles, double n_samples,
                               double horizon, double lambda,
                               double alpha_hat, double sparse_depth) {
  if (!(n_particles > 0.0 && n_samples > 0.0 && horizon > 0.0 &&
        lambda > 0.0 && alpha_hat > 0.0 && sparse_depth > 0.0)) {
    throw std::invalid_argument("schedule_check: parameters must be positive");
  }
  ScheduleVerdict v;
  const double log_np = std::log(n_particles);
  const double log_ns = std::log(n_samples);
  const double inv_lt = 1.0 / (lambda * horizon);
  v.clause_coupling = inv_lt < log_np;
  v.clause_statistical = sparse_depth * log_ns * log_ns / n_samples < 1.0;
  v.clause_optimization = log_np < alpha_hat * horizon;
  v.value_coupling = inv_lt / log_np;
  v.value_statistical = sparse_depth * log_ns * log_ns / n_samples;
  v.value_optimization = log_np / (alpha_hat * horizon);
  v.pass = v.clause_coupling && v.clause_statistical && v.clause_optimization;
  return v;
}

}  // namespace mflab::dictionary

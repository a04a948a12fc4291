// Hermite dictionary expansion, the coefficient threshold rule, and the
// closed-form depth/rate calculators.
//
// A scalar target g with finite Gaussian second moment expands as
// g = Σ_m f̂_m·h_m in the orthonormal probabilists' Hermite basis.  The
// threshold rule at temperature λ keeps A_λ = {m : |f̂_m| > c_σ·λ}; the
// retained set sizes the active dictionary (S_up = |A_λ|·mult_σ) and
// the discarded energy plus the entropy displacement form the sparse
// tail κ = Σ_{m∉A_λ} f̂_m² + C_σ·λ·|A_λ|.
#ifndef MFLAB_DICTIONARY_HPP
#define MFLAB_DICTIONARY_HPP

#include <functional>
#include <vector>

#include "mflab/hermite_basis.hpp"
#include "mflab/types.hpp"

namespace mflab::dictionary {

using mflab::hermite_value;
using mflab::hermite_values_upto;

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights of a rule integrating against the standard
/// Gaussian measure γ (weights sum to 1).
struct QuadratureRule {
  Vector nodes;
  Vector weights;
};

/// n-point Gauss–Hermite rule for γ, from the eigen-decomposition of
/// the Jacobi matrix of the orthonormal Hermite recurrence (diagonal 0,
/// off-diagonal √j).  Exact for polynomials of degree ≤ 2n−1.
QuadratureRule gauss_hermite(int n);

/// n-point Gauss–Legendre rule on [a, b] (plain Lebesgue weight).
QuadratureRule gauss_legendre(int n, double a, double b);

// ---------------------------------------------------------------------------
// Expansion
// ---------------------------------------------------------------------------

struct HermiteExpansion {
  Vector coefficients;       // f̂_0 .. f̂_M
  int truncation_order = 0;  // M
  int quadrature_nodes = 0;  // requested base rule size
  bool converged = true;     // doubling the rule moved no coefficient > 1e−6
  double max_coeff_change = 0.0;  // observed change under doubling
  double norm_sq = 0.0;           // quadrature value of ‖g‖²_{L²(γ)}
};

/// Hermite coefficients f̂_m = ∫ g·h_m dγ for m ≤ M.
///
/// The default path uses Gauss–Hermite quadrature with `nodes` points
/// and flags non-convergence when doubling the rule moves any
/// coefficient by more than 1e−6.  For integrands with kinks (relu-type
/// targets have algebraically convergent GH sums), pass the kink
/// locations: the integral is then computed on composite Gauss–Legendre
/// panels split at the kinks, which restores spectral accuracy.
HermiteExpansion expand(const std::function<double(double)>& g, int M = 64,
                        int nodes = 200,
                        const std::vector<double>& kinks = {});

/// Expansion assembled directly from a known coefficient sequence
/// (no quadrature; converged by construction).
HermiteExpansion expansion_from_coefficients(const Vector& coefficients);

// ---------------------------------------------------------------------------
// Threshold rule
// ---------------------------------------------------------------------------

struct ThresholdReport {
  double lambda = 0.0;
  double c_sigma = 1.0;       // threshold scale
  double big_c_sigma = 1.0;   // entropy-displacement constant C_σ
  int mult_sigma = 1;
  std::vector<int> retained;  // A_λ, ascending
  int s_up = 0;               // |A_λ|·mult_sigma
  double kappa = 0.0;         // discarded energy + C_σ·λ·|A_λ|
  double retained_energy = 0.0;
};

/// Applies the threshold rule |f̂_m| > c_σ·λ.
ThresholdReport threshold(const HermiteExpansion& expansion, double lambda,
                          double c_sigma, int mult_sigma,
                          double big_c_sigma = 1.0);

/// Closed-form depth bound for exponential coefficient decay
/// |f̂_m| ≤ A·e^{−τm}: (1/τ)·log(A/(c_σλ))·mult_sigma, clamped to 0
/// once λ ≥ A/c_σ (nothing survives the threshold).
double exp_tail_depth_bound(double A, double tau, double c_sigma,
                            double lambda, int mult_sigma);

/// Quadrature value of ‖g − Σ_{m∈retained} f̂_m·h_m‖²_{L²(γ)}.  By
/// Parseval this matches the discarded coefficient energy up to the
/// truncation tail beyond M.
double parseval_residual(const HermiteExpansion& expansion,
                         const std::vector<int>& retained,
                         const std::function<double(double)>& g,
                         int eval_nodes,
                         const std::vector<double>& kinks = {});

// ---------------------------------------------------------------------------
// Rate calculators
// ---------------------------------------------------------------------------

enum class RateRegime {
  Balanced,    // λ = n^{−1/2} balance: N^{−1} + stat + κ
  PolyTail,    // |f̂_m| ≲ m^{−β}: balanced sparse depth and its rate
  SigmoidExp,  // |f̂_m| ≤ A·e^{−τm}: logarithmic depth, (log n)³/n rate
  BoundedAct   // bounded activation: statistical log power drops to 1
};

struct RateParams {
  double n_particles = 1.0;  // N
  double n_samples = 1.0;    // n
  double horizon = 1.0;      // T
  double lambda = 1.0;
  double sparse_depth = 1.0;  // S
  double d_eff = 1.0;
  double d_orb = 0.0;
  double alpha_hat = 1.0;  // fitted decay constant
  double kappa = 0.0;      // measured sparse tail (Balanced / BoundedAct)
  double beta = 2.0;       // PolyTail decay exponent
  double tail_amp = 1.0;   // SigmoidExp A
  double tail_rate = 1.0;  // SigmoidExp τ
  double c_sigma = 1.0;
};

struct RateReport {
  double e_poc = 0.0;       // N^{−1}
  double e_stat = 0.0;      // S·(d_eff+2−D_orb)·(log n)^p/n, p regime-dependent
  double e_opt = 0.0;       // e^{−α̂·T}
  double kappa = 0.0;       // regime-specific sparse tail
  double total = 0.0;       // sum of the four components
  double s_balance = 0.0;   // PolyTail: (n/(log n)²)^{1/(2β)}
  double s_bound = 0.0;     // SigmoidExp: (1+(1/τ)·log(A/(c_σλ)))·mult-free form
  double headline = 0.0;    // the regime's displayed leading rate
};

RateReport predicted_rates(RateRegime regime, const RateParams& p);

// ---------------------------------------------------------------------------
// Compatible-schedule check
// ---------------------------------------------------------------------------

/// The three joint-limit requirements, evaluated as strict finite-size
/// ratios: (λT)^{−1} < log N, S(λ)(log n)²/n < 1, log N < α̂T.
struct ScheduleVerdict {
  bool pass = false;
  bool clause_coupling = false;  // (λT)^{−1} < log N
  bool clause_statistical = false;  // S(λ)(log n)²/n < 1
  bool clause_optimization = false;  // log N < α̂·T
  double value_coupling = 0.0;       // (λT)^{−1} / log N
  double value_statistical = 0.0;    // S(λ)(log n)²/n
  double value_optimization = 0.0;   // log N / (α̂·T)
};

ScheduleVerdict schedule_check(double n_particles, double n_samples,
                               double horizon, double lambda,
                               double alpha_hat, double sparse_depth);

}  // namespace mflab::dictionary

#endif  // MFLAB_DICTIONARY_HPP

// Weighted moment-class calculus.
//
// For an initialization law μ₀ the moment-growth boundary is
// g₀(n) = (E_{μ₀}|θ|^{2n})^{1/(2n)}, and its reciprocal w*(n) = 1/g₀(n)
// is the largest weight sequence whose weighted moment norm
//
//   ‖μ‖_{M_w} = sup_n w(n)·(E_μ|θ|^{2n})^{1/(2n)}
//
// stays finite at initialization.  This module provides the Gaussian
// closed forms, the submultiplicativity constant of a weight sequence,
// empirical weighted norms of particle ensembles, and the numerical
// witness that any strictly heavier weight blows the norm up.
#ifndef MFLAB_MOMENTS_HPP
#define MFLAB_MOMENTS_HPP

#include <map>
#include <utility>
#include <vector>

#include "mflab/model.hpp"
#include "mflab/types.hpp"

namespace mflab::moments {

/// Largest even-moment order 2n kept in double precision before the
/// closed forms are evaluated in log space only.
inline constexpr int kMaxMomentOrder = 64;

/// E|θ|^{2n} for θ ~ N(0, I_m): 2^n·Γ(n+m/2)/Γ(m/2), evaluated as the
/// exact integer product Π_{j=0}^{n−1}(m+2j) so that small orders are
/// bit-exact.  Throws when the value overflows double range.
double gaussian_even_moment(int n, int m);

/// (2n−1)!! = 1·3·5···(2n−1), exact for n ≤ 15.
double double_factorial_odd(int n);

/// Which initialization the boundary refers to.
struct InitSpec {
  enum class Kind {
    StandardGaussian,  // θ ~ N(0, I_m), m = dim
    MupGaussian,       // θ = (w,b,a), w ~ N(0, I_d/d), b,a ~ N(0,1), d = dim
    PointMass          // |θ| = radius with probability 1
  };
  Kind kind = Kind::StandardGaussian;
  int dim = 1;
  double radius = 1.0;
};

InitSpec standard_gaussian_init(int m);
InitSpec mup_gaussian_init(int d);
InitSpec point_mass_init(double radius);

/// log E|θ|^{2n} under the given initialization; never overflows.
double log_init_even_moment(const InitSpec& init, int n);

/// E|θ|^{2n}; throws if the value exceeds double range.
double init_even_moment(const InitSpec& init, int n);

/// w*(n) = (E|θ|^{2n})^{−1/(2n)}.  A degenerate zero-mass order maps to
/// +infinity by convention.
double wstar(int n, const InitSpec& init);

/// A positive weight sequence on n = 1..n_max with w(0) = 1 implied.
struct WeightSequence {
  enum class Origin { ReciprocalOfInit, User };
  std::map<int, double> values;
  Origin origin = Origin::User;
  double submult_constant = 1.0;  // C_w, filled by check_submultiplicative

  double at(int n) const;  // w(n), with w(0) = 1
};

/// The reciprocal-boundary weight w* up to n_max.
WeightSequence wstar_sequence(const InitSpec& init, int n_max);

WeightSequence constant_weight(double value, int n_max);
WeightSequence power_weight(double exponent, int n_max);  // w(n) = n^exponent
WeightSequence geometric_weight(double ratio, int n_max); // w(n) = ratio^n

/// sup_{1 ≤ n ≤ n_max} w(n)·(mean_i |θ_i|^{2n})^{1/(2n)}, the plug-in
/// weighted norm of the empirical measure.
double empirical_weighted_norm(const model::Ensemble& ens,
                               const WeightSequence& w, int n_max);

/// Smallest C_w ≥ 1 with w(m+n) ≥ C_w⁻¹·w(m)·w(n) over stored pairs,
/// and whether the constant is finite.
std::pair<bool, double> check_submultiplicative(const WeightSequence& w,
                                                int n_max);

/// The ratio sequence r(n) = w̃(n)·g₀(n) and a divergence verdict.  The
/// sequence diverges when it crosses the hard threshold, or when it
/// grows monotonically over the top half of the grid with a clearly
/// positive fitted log-log exponent — the numerical signature of
/// ‖μ₀‖_{M_{w̃}} = ∞ for weights heavier than w*.
struct MaximalityReport {
  std::vector<int> orders;
  std::vector<double> ratio;     // w̃(n)·g₀(n)
  double fitted_exponent = 0.0;  // slope of log ratio vs log n
  bool monotone_tail = false;
  bool crossed_threshold = false;
  bool diverges = false;
  double threshold = 1e3;
};

MaximalityReport maximality_witness(const WeightSequence& w_tilde,
                                    const InitSpec& init, int n_max);

}  // namespace mflab::moments

#endif  // MFLAB_MOMENTS_HPP

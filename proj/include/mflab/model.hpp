// Shared vocabulary: neurons, activations, targets, data law, ensembles.
//
// A single neuron carries θ = (w, b, a) ∈ R^{d+2} and contributes the
// feature a·σ(⟨w,x⟩ + b).  A width-N network is the empirical mean of
// its neurons' features,
//
//   f_N(x) = (1/N) Σ_i a_i σ(⟨w_i, x⟩ + b_i),
//
// the mean-field normalization under which feature learning survives
// large width.  Everything downstream (dynamics, transport, quotient,
// harness) speaks in these types.
#ifndef MFLAB_MODEL_HPP
#define MFLAB_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mflab/rng.hpp"
#include "mflab/types.hpp"

namespace mflab::model {

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

enum class ActivationKind { Relu, LeakyRelu, Tanh, CenteredSigmoid, Monomial };

/// An activation together with its envelope constants and the metadata
/// of its neuron-level symmetry group:
///   * lipschitz / growth_exponent / envelope_const bound the activation
///     by |σ(z)| ≤ envelope_const·(1 + |z|^growth_exponent);
///   * mult_sigma is the ridge multiplicity — how many σ-atoms are
///     needed to synthesize one dictionary atom (a signed ReLU pair for
///     relu-type kinks, one atom for odd saturating nonlinearities);
///   * orbit_dim is the dimension of the continuous symmetry orbit of a
///     generic neuron (1 for the positive-scaling families, 0 when only
///     a discrete flip remains).
struct ActivationSpec {
  ActivationKind kind = ActivationKind::Relu;
  double leaky_beta = 0.01;  // negative-side slope for LeakyRelu
  int monomial_degree = 1;   // k for Monomial
  double lipschitz = 1.0;
  int growth_exponent = 1;
  double envelope_const = 1.0;
  int mult_sigma = 1;
  int orbit_dim = 0;

  std::string name() const;
};

ActivationSpec make_relu();
ActivationSpec make_leaky_relu(double beta);
ActivationSpec make_tanh();
ActivationSpec make_centered_sigmoid();
ActivationSpec make_monomial(int degree);

/// σ(z).  Total on finite inputs; centered sigmoid is the logistic
/// shifted to be odd: (1+e^{−z})^{−1} − 1/2.
template <typename Scalar>
Scalar activation_eval(const ActivationSpec& spec, Scalar z) {
  switch (spec.kind) {
    case ActivationKind::Relu:
      return z > Scalar(0) ? z : Scalar(0);
    case ActivationKind::LeakyRelu:
      return z > Scalar(0) ? z : Scalar(spec.leaky_beta) * z;
    case ActivationKind::Tanh:
      return std::tanh(z);
    case ActivationKind::CenteredSigmoid:
      return Scalar(1) / (Scalar(1) + std::exp(-z)) - Scalar(0.5);
    case ActivationKind::Monomial: {
      Scalar p = Scalar(1);
      for (int j = 0; j < spec.monomial_degree; ++j) p *= z;
      return p;
    }
  }
  throw std::logic_error("activation_eval: unhandled kind");
}

/// σ'(z).  The ReLU subgradient at the kink is 0; LeakyRelu takes its
/// negative-side slope there.  Both choices hit a measure-zero set
/// under Gaussian inputs.
template <typename Scalar>
Scalar activation_deriv(const ActivationSpec& spec, Scalar z) {
  switch (spec.kind) {
    case ActivationKind::Relu:
      return z > Scalar(0) ? Scalar(1) : Scalar(0);
    case ActivationKind::LeakyRelu:
      return z > Scalar(0) ? Scalar(1) : Scalar(spec.leaky_beta);
    case ActivationKind::Tanh: {
      const Scalar t = std::tanh(z);
      return Scalar(1) - t * t;
    }
    case ActivationKind::CenteredSigmoid: {
      const Scalar s = Scalar(1) / (Scalar(1) + std::exp(-z));
      return s * (Scalar(1) - s);
    }
    case ActivationKind::Monomial: {
      Scalar p = Scalar(spec.monomial_degree);
      for (int j = 1; j < spec.monomial_degree; ++j) p *= z;
      return p;
    }
  }
  throw std::logic_error("activation_deriv: unhandled kind");
}

/// Elementwise σ over a matrix of pre-activations.
Matrix activation_eval_matrix(const ActivationSpec& spec, const Matrix& z);
/// Elementwise σ' over a matrix of pre-activations.
Matrix activation_deriv_matrix(const ActivationSpec& spec, const Matrix& z);

/// Checks |σ(z)| ≤ envelope_const·(1+|z|^growth_exponent) on a uniform
/// grid; returns the largest violation (≤ 0 means the envelope holds).
double envelope_violation(const ActivationSpec& spec, double z_lo,
                          double z_hi, int n_grid);

// ---------------------------------------------------------------------------
// Parameters and ensembles
// ---------------------------------------------------------------------------

struct ParameterPoint {
  Vector w;
  double b = 0.0;
  double a = 0.0;
};

/// a·σ(⟨w,x⟩+b).  Throws on dimension mismatch.
double feature_eval(const ParameterPoint& theta, const Vector& x,
                    const ActivationSpec& spec);

/// N neurons stored as the rows of an N×(d+2) matrix, columns ordered
/// [w_1..w_d, b, a].  The row-per-particle layout makes the batched
/// network evaluation and drift a pair of GEMMs.
struct Ensemble {
  Matrix theta;  // N × (d+2)
  double time = 0.0;
  std::uint64_t seed = 0;

  Index width() const { return theta.rows(); }
  Index input_dim() const { return theta.cols() - 2; }

  auto weights() const { return theta.leftCols(input_dim()); }
  auto biases() const { return theta.col(input_dim()); }
  auto outputs() const { return theta.col(input_dim() + 1); }

  ParameterPoint particle(Index i) const;
  void set_particle(Index i, const ParameterPoint& p);
};

/// Maximal-update initialization: w ~ N(0, I_d/d), b ~ N(0,1),
/// a ~ N(0,1), each particle drawn from its own counter stream so the
/// first min(N, N') particles of two widths coincide.  The stream tag
/// selects the init stream; auxiliary systems use their own tag so they
/// are independent of the main system at equal seeds.
Ensemble mup_init(Index n_particles, Index input_dim, std::uint64_t seed,
                  StreamTag tag = StreamTag::Init);

Ensemble ensemble_from_points(const std::vector<ParameterPoint>& points,
                              std::uint64_t seed = 0);

/// (1/N)·Σ_i feature_eval(θ_i, x).  Throws on an empty ensemble.
double network_eval(const Ensemble& ens, const Vector& x,
                    const ActivationSpec& spec);

/// Network values at every row of X (n×d), as one batched evaluation.
Vector network_eval_batch(const Ensemble& ens, const Matrix& x,
                          const ActivationSpec& spec);

// ---------------------------------------------------------------------------
// Targets
// ---------------------------------------------------------------------------

enum class TargetKind {
  Linear,          // ⟨v,x⟩
  PiecewiseLinear, // g(⟨v,x⟩), g piecewise linear with listed breakpoints
  SingleIndex,     // Σ_m c_m h_m(⟨u,x⟩)
  HermiteSingle,   // h_m(⟨v,x⟩)
  MultiIndex       // Σ_j Σ_m c_{j,m} h_m((Πx)_j), Π with orthonormal rows
};

/// Declarative target f*.  Direction vectors are unit-normalized at
/// construction; the multi-index projection is orthonormalized.
struct TargetSpec {
  TargetKind kind = TargetKind::Linear;
  Vector direction;                  // v or u (unit norm)
  Vector breakpoints;                // PiecewiseLinear: sorted kink locations
  Vector hinge_deltas;               // PiecewiseLinear: slope jump at each kink
  double base_slope = 1.0;           // PiecewiseLinear: slope left of all kinks
  double intercept = 0.0;            // PiecewiseLinear: value offset
  Vector coefficients;               // SingleIndex: Hermite coefficients c_0..
  int hermite_order = 1;             // HermiteSingle: m
  Matrix projection;                 // MultiIndex: r×d, orthonormal rows
  std::vector<Vector> ridge_coeffs;  // MultiIndex: per-row Hermite coefficients
  int declared_d_eff = 1;

  Index input_dim() const;
  std::string name() const;
};

TargetSpec make_linear(const Vector& v);
/// g(z) = intercept + base_slope·z + Σ_j deltas[j]·max(z − breaks[j], 0).
TargetSpec make_piecewise_linear(const Vector& v, const Vector& breaks,
                                 const Vector& deltas, double base_slope = 1.0,
                                 double intercept = 0.0);
TargetSpec make_single_index(const Vector& u, const Vector& coefficients);
TargetSpec make_hermite_single(int order, const Vector& v);
TargetSpec make_multi_index(const Matrix& projection,
                            const std::vector<Vector>& ridge_coeffs);

/// f*(x).  Throws on dimension mismatch.
double target_eval(const TargetSpec& target, const Vector& x);

/// f* at every row of X.
Vector target_eval_batch(const TargetSpec& target, const Matrix& x);

/// Closed-form squared L²(ρ_X) norm E[f*(X)²] under X ~ N(0, I_d).
/// Piecewise-linear ridges use exact Gaussian hinge integrals; index
/// models reduce to their coefficient sums.
double target_l2_norm_sq(const TargetSpec& target);

// ---------------------------------------------------------------------------
// Data law
// ---------------------------------------------------------------------------

/// Inputs are standard Gaussian on R^d; labels are y = f*(x) + ς·ε with
/// ε standard Gaussian and ς ≥ 0 the label-noise level.
struct DataLaw {
  TargetSpec target;
  Index input_dim = 1;
  double label_noise = 0.0;  // ς
};

struct Dataset {
  Matrix x;  // n × d
  Vector y;  // n
  Index size() const { return x.rows(); }
};

/// n iid rows of standard Gaussian inputs, keyed by (seed, tag, step):
/// the shared primitive behind datasets, fresh batches, and evaluation
/// grids.  Row i depends only on (seed, tag, step, i).
Matrix sample_inputs(Index n, Index dim, std::uint64_t seed, StreamTag tag,
                     std::uint64_t step = 0);

/// Deterministic dataset draw; same (law, n, seed) gives identical
/// bytes.  Throws if n < 1.
Dataset sample_dataset(const DataLaw& law, Index n, std::uint64_t seed);

}  // namespace mflab::model

#endif  // MFLAB_MODEL_HPP

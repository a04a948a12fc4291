#include "mflab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mflab/hermite_basis.hpp"

namespace mflab::model {

namespace {

constexpr double kSqrt2Pi = 2.506628274631000502415765284811;

double gaussian_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

// Upper tail Q(z) = P(Z > z) for Z ~ N(0,1).
double gaussian_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// E[(Z − b)_+] for Z ~ N(0,1).
double hinge_mean(double b) {
  return gaussian_pdf(b) - b * gaussian_upper(b);
}

// E[(Z − b1)_+ (Z − b2)_+]; both hinges are active only above max(b1,b2).
double hinge_cross(double b1, double b2) {
  const double lo = std::min(b1, b2);
  const double hi = std::max(b1, b2);
  return (1.0 + b1 * b2) * gaussian_upper(hi) - lo * gaussian_pdf(hi);
}

void ensure_dim(Index got, Index want, const char* where) {
  if (got != want) {
    std::ostringstream msg;
    msg << where << ": dimension mismatch (got " << got << ", expected "
        << want << ")";
    throw std::invalid_argument(msg.str());
  }
}

Vector unit_or_throw(const Vector& v, const char* where) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument(std::string(where) +
                                ": direction vector must be nonzero");
  }
  return v / norm;
}

}  // namespace

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

std::string ActivationSpec::name() const {
  switch (kind) {
    case ActivationKind::Relu:
      return "relu";
    case ActivationKind::LeakyRelu: {
      std::ostringstream s;
      s << "leaky_relu(" << leaky_beta << ")";
      return s.str();
    }
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::CenteredSigmoid:
      return "centered_sigmoid";
    case ActivationKind::Monomial: {
      std::ostringstream s;
      s << "monomial(" << monomial_degree << ")";
      return s.str();
    }
  }
  return "unknown";
}

ActivationSpec make_relu() {
  ActivationSpec s;
  s.kind = ActivationKind::Relu;
  s.lipschitz = 1.0;
  s.growth_exponent = 1;
  s.envelope_const = 1.0;
  s.mult_sigma = 2;  // one kink needs a signed pair of atoms
  s.orbit_dim = 1;   // positive scaling (αw, αb, a/α)
  return s;
}

ActivationSpec make_leaky_relu(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("make_leaky_relu: beta must lie in (0,1)");
  }
  ActivationSpec s = make_relu();
  s.kind = ActivationKind::LeakyRelu;
  s.leaky_beta = beta;
  return s;
}

ActivationSpec make_tanh() {
  ActivationSpec s;
  s.kind = ActivationKind::Tanh;
  s.lipschitz = 1.0;
  s.growth_exponent = 1;
  s.envelope_const = 1.0;
  s.mult_sigma = 1;
  s.orbit_dim = 0;  // only the discrete sign flip remains
  return s;
}

ActivationSpec make_centered_sigmoid() {
  ActivationSpec s;
  s.kind = ActivationKind::CenteredSigmoid;
  s.lipschitz = 0.25;
  s.growth_exponent = 1;
  s.envelope_const = 1.0;
  s.mult_sigma = 1;
  s.orbit_dim = 0;
  return s;
}

ActivationSpec make_monomial(int degree) {
  if (degree < 1) {
    throw std::invalid_argument("make_monomial: degree must be >= 1");
  }
  ActivationSpec s;
  s.kind = ActivationKind::Monomial;
  s.monomial_degree = degree;
  s.lipschitz = double(degree);  // local bound on |σ'| for |z| ≤ 1
  s.growth_exponent = degree;
  s.envelope_const = 1.0;
  s.mult_sigma = 1;
  s.orbit_dim = 1;  // full scalar homogeneity (αw, αb, α^{−k}a)
  return s;
}

Matrix activation_eval_matrix(const ActivationSpec& spec, const Matrix& z) {
  return z.unaryExpr([&spec](double v) { return activation_eval(spec, v); });
}

Matrix activation_deriv_matrix(const ActivationSpec& spec, const Matrix& z) {
  return z.unaryExpr([&spec](double v) { return activation_deriv(spec, v); });
}

double envelope_violation(const ActivationSpec& spec, double z_lo, double z_hi,
                          int n_grid) {
  if (n_grid < 2) throw std::invalid_argument("envelope_violation: n_grid");
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_grid; ++i) {
    const double z = z_lo + (z_hi - z_lo) * double(i) / double(n_grid - 1);
    const double bound =
        spec.envelope_const *
        (1.0 + std::pow(std::abs(z), double(spec.growth_exponent)));
    worst = std::max(worst, std::abs(activation_eval(spec, z)) - bound);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Parameters and ensembles
// ---------------------------------------------------------------------------

double feature_eval(const ParameterPoint& theta, const Vector& x,
                    const ActivationSpec& spec) {
  ensure_dim(x.size(), theta.w.size(), "feature_eval");
  return theta.a * activation_eval(spec, theta.w.dot(x) + theta.b);
}

ParameterPoint Ensemble::particle(Index i) const {
  ParameterPoint p;
  const Index d = input_dim();
  p.w = theta.row(i).head(d).transpose();
  p.b = theta(i, d);
  p.a = theta(i, d + 1);
  return p;
}

void Ensemble::set_particle(Index i, const ParameterPoint& p) {
  const Index d = input_dim();
  ensure_dim(p.w.size(), d, "Ensemble::set_particle");
  theta.row(i).head(d) = p.w.transpose();
  theta(i, d) = p.b;
  theta(i, d + 1) = p.a;
}

Ensemble mup_init(Index n_particles, Index input_dim, std::uint64_t seed,
                  StreamTag tag) {
  if (n_particles < 1) throw std::invalid_argument("mup_init: width must be >= 1");
  if (input_dim < 1) throw std::invalid_argument("mup_init: input_dim must be >= 1");
  Ensemble ens;
  ens.theta.resize(n_particles, input_dim + 2);
  ens.time = 0.0;
  ens.seed = seed;
  const double w_scale = 1.0 / std::sqrt(double(input_dim));
  for (Index i = 0; i < n_particles; ++i) {
    CounterRng rng(seed, tag, 0, std::uint64_t(i));
    for (Index j = 0; j < input_dim; ++j) {
      ens.theta(i, j) = w_scale * rng.next_gaussian();
    }
    ens.theta(i, input_dim) = rng.next_gaussian();      // b
    ens.theta(i, input_dim + 1) = rng.next_gaussian();  // a
  }
  return ens;
}

Ensemble ensemble_from_points(const std::vector<ParameterPoint>& points,
                              std::uint64_t seed) {
  if (points.empty()) {
    throw std::invalid_argument("ensemble_from_points: empty particle list");
  }
  const Index d = points.front().w.size();
  Ensemble ens;
  ens.theta.resize(Index(points.size()), d + 2);
  ens.seed = seed;
  for (Index i = 0; i < Index(points.size()); ++i) {
    ens.set_particle(i, points[size_t(i)]);
  }
  return ens;
}

double network_eval(const Ensemble& ens, const Vector& x,
                    const ActivationSpec& spec) {
  if (ens.width() < 1) {
    throw std::invalid_argument("network_eval: empty ensemble");
  }
  ensure_dim(x.size(), ens.input_dim(), "network_eval");
  const Vector u = ens.weights() * x + ens.biases();
  double acc = 0.0;
  for (Index i = 0; i < ens.width(); ++i) {
    acc += ens.outputs()(i) * activation_eval(spec, u(i));
  }
  return acc / double(ens.width());
}

Vector network_eval_batch(const Ensemble& ens, const Matrix& x,
                          const ActivationSpec& spec) {
  if (ens.width() < 1) {
    throw std::invalid_argument("network_eval_batch: empty ensemble");
  }
  ensure_dim(x.cols(), ens.input_dim(), "network_eval_batch");
  Matrix u = x * ens.weights().transpose();          // B × N
  u.rowwise() += ens.biases().transpose();
  const Matrix s = activation_eval_matrix(spec, u);  // σ(U)
  return (s * ens.outputs()) / double(ens.width());
}

// ---------------------------------------------------------------------------
// Targets
// ---------------------------------------------------------------------------

Index TargetSpec::input_dim() const {
  return kind == TargetKind::MultiIndex ? projection.cols() : direction.size();
}

std::string TargetSpec::name() const {
  std::ostringstream s;
  switch (kind) {
    case TargetKind::Linear:
      return "linear";
    case TargetKind::PiecewiseLinear:
      s << "piecewise_linear(" << breakpoints.size() << " breaks)";
      return s.str();
    case TargetKind::SingleIndex:
      return "single_index";
    case TargetKind::HermiteSingle:
      s << "hermite_single(" << hermite_order << ")";
      return s.str();
    case TargetKind::MultiIndex:
      s << "multi_index(rank " << projection.rows() << ")";
      return s.str();
  }
  return "unknown";
}

TargetSpec make_linear(const Vector& v) {
  TargetSpec t;
  t.kind = TargetKind::Linear;
  t.direction = unit_or_throw(v, "make_linear");
  t.declared_d_eff = 1;
  return t;
}

TargetSpec make_piecewise_linear(const Vector& v, const Vector& breaks,
                                 const Vector& deltas, double base_slope,
                                 double intercept) {
  if (breaks.size() != deltas.size()) {
    throw std::invalid_argument(
        "make_piecewise_linear: breaks and deltas must have equal length");
  }
  TargetSpec t;
  t.kind = TargetKind::PiecewiseLinear;
  t.direction = unit_or_throw(v, "make_piecewise_linear");
  // Keep (break, delta) pairs sorted by break location.
  std::vector<Index> order(size_t(breaks.size()));
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(),
            [&breaks](Index l, Index r) { return breaks[l] < breaks[r]; });
  t.breakpoints.resize(breaks.size());
  t.hinge_deltas.resize(deltas.size());
  for (Index i = 0; i < breaks.size(); ++i) {
    t.breakpoints[i] = breaks[order[size_t(i)]];
    t.hinge_deltas[i] = deltas[order[size_t(i)]];
  }
  t.base_slope = base_slope;
  t.intercept = intercept;
  t.declared_d_eff = 1;
  return t;
}

TargetSpec make_single_index(const Vector& u, const Vector& coefficients) {
  if (coefficients.size() < 1) {
    throw std::invalid_argument("make_single_index: empty coefficient list");
  }
  TargetSpec t;
  t.kind = TargetKind::SingleIndex;
  t.direction = unit_or_throw(u, "make_single_index");
  t.coefficients = coefficients;
  t.declared_d_eff = 1;
  return t;
}

TargetSpec make_hermite_single(int order, const Vector& v) {
  if (order < 0) {
    throw std::invalid_argument("make_hermite_single: order must be >= 0");
  }
  TargetSpec t;
  t.kind = TargetKind::HermiteSingle;
  t.direction = unit_or_throw(v, "make_hermite_single");
  t.hermite_order = order;
  t.declared_d_eff = 1;
  return t;
}

TargetSpec make_multi_index(const Matrix& projection,
                            const std::vector<Vector>& ridge_coeffs) {
  const Index r = projection.rows();
  if (r < 1 || projection.cols() < r) {
    throw std::invalid_argument(
        "make_multi_index: projection must be r×d with 1 <= r <= d");
  }
  if (Index(ridge_coeffs.size()) != r) {
    throw std::invalid_argument(
        "make_multi_index: one coefficient vector per projection row");
  }
  // Orthonormalize the rows (Householder QR of the transpose).
  Eigen::HouseholderQR<Matrix> qr(projection.transpose());
  Matrix q = qr.householderQ() * Matrix::Identity(projection.cols(), r);
  const Matrix rfac =
      qr.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
  for (Index j = 0; j < r; ++j) {
    if (std::abs(rfac(j, j)) < 1e-10) {
      throw std::invalid_argument(
          "make_multi_index: projection rows are rank deficient");
    }
  }
  TargetSpec t;
  t.kind = TargetKind::MultiIndex;
  t.projection = q.transpose();
  t.ridge_coeffs = ridge_coeffs;
  t.declared_d_eff = int(r);
  return t;
}

namespace {

double piecewise_scalar(const TargetSpec& t, double z) {
  double g = t.intercept + t.base_slope * z;
  for (Index j = 0; j < t.breakpoints.size(); ++j) {
    g += t.hinge_deltas[j] * std::max(z - t.breakpoints[j], 0.0);
  }
  return g;
}

double single_index_scalar(const Vector& coeffs, double z) {
  const Vector h = hermite_values_upto(int(coeffs.size()) - 1, z);
  return coeffs.dot(h);
}

}  // namespace

double target_eval(const TargetSpec& target, const Vector& x) {
  ensure_dim(x.size(), target.input_dim(), "target_eval");
  switch (target.kind) {
    case TargetKind::Linear:
      return target.direction.dot(x);
    case TargetKind::PiecewiseLinear:
      return piecewise_scalar(target, target.direction.dot(x));
    case TargetKind::SingleIndex:
      return single_index_scalar(target.coefficients, target.direction.dot(x));
    case TargetKind::HermiteSingle:
      return hermite_value(target.hermite_order, target.direction.dot(x));
    case TargetKind::MultiIndex: {
      const Vector s = target.projection * x;
      double acc = 0.0;
      for (Index j = 0; j < s.size(); ++j) {
        acc += single_index_scalar(target.ridge_coeffs[size_t(j)], s[j]);
      }
      return acc;
    }
  }
  throw std::logic_error("target_eval: unhandled kind");
}

Vector target_eval_batch(const TargetSpec& target, const Matrix& x) {
  ensure_dim(x.cols(), target.input_dim(), "target_eval_batch");
  Vector out(x.rows());
  if (target.kind == TargetKind::MultiIndex) {
    const Matrix s = x * target.projection.transpose();  // n × r
    for (Index i = 0; i < x.rows(); ++i) {
      double acc = 0.0;
      for (Index j = 0; j < s.cols(); ++j) {
        acc += single_index_scalar(target.ridge_coeffs[size_t(j)], s(i, j));
      }
      out[i] = acc;
    }
    return out;
  }
  const Vector z = x * target.direction;
  switch (target.kind) {
    case TargetKind::Linear:
      return z;
    case TargetKind::PiecewiseLinear:
      for (Index i = 0; i < z.size(); ++i) out[i] = piecewise_scalar(target, z[i]);
      return out;
    case TargetKind::SingleIndex:
      for (Index i = 0; i < z.size(); ++i) {
        out[i] = single_index_scalar(target.coefficients, z[i]);
      }
      return out;
    case TargetKind::HermiteSingle:
      for (Index i = 0; i < z.size(); ++i) {
        out[i] = hermite_value(target.hermite_order, z[i]);
      }
      return out;
    default:
      throw std::logic_error("target_eval_batch: unhandled kind");
  }
}

double target_l2_norm_sq(const TargetSpec& target) {
  switch (target.kind) {
    case TargetKind::Linear:
      return 1.0;  // unit direction, E⟨v,X⟩² = 1
    case TargetKind::HermiteSingle:
      return 1.0;  // orthonormal basis
    case TargetKind::SingleIndex:
      return target.coefficients.squaredNorm();
    case TargetKind::MultiIndex: {
      // Independent index coordinates: cross terms reduce to products of
      // the constant Hermite coefficients.
      double norm_sq = 0.0, mean_sum = 0.0, mean_sq_sum = 0.0;
      for (const Vector& c : target.ridge_coeffs) {
        norm_sq += c.squaredNorm();
        mean_sum += c[0];
        mean_sq_sum += c[0] * c[0];
      }
      return norm_sq + mean_sum * mean_sum - mean_sq_sum;
    }
    case TargetKind::PiecewiseLinear: {
      // g(Z) = c0 + c1·Z + Σ δ_j (Z−b_j)_+ with Z ~ N(0,1); expand E g²
      // with exact Gaussian hinge moments.
      const double c0 = target.intercept;
      const double c1 = target.base_slope;
      double acc = c0 * c0 + c1 * c1;
      for (Index j = 0; j < target.breakpoints.size(); ++j) {
        const double bj = target.breakpoints[j];
        const double dj = target.hinge_deltas[j];
        acc += 2.0 * dj * (c0 * hinge_mean(bj) + c1 * gaussian_upper(bj));
        for (Index k = 0; k < target.breakpoints.size(); ++k) {
          acc += dj * target.hinge_deltas[k] *
                 hinge_cross(bj, target.breakpoints[k]);
        }
      }
      return acc;
    }
  }
  throw std::logic_error("target_l2_norm_sq: unhandled kind");
}

// ---------------------------------------------------------------------------
// Data law
// ---------------------------------------------------------------------------

Matrix sample_inputs(Index n, Index dim, std::uint64_t seed, StreamTag tag,
                     std::uint64_t step) {
  if (n < 1) throw std::invalid_argument("sample_inputs: n must be >= 1");
  Matrix x(n, dim);
  for (Index i = 0; i < n; ++i) {
    CounterRng rng(seed, tag, step, std::uint64_t(i));
    for (Index j = 0; j < dim; ++j) x(i, j) = rng.next_gaussian();
  }
  return x;
}

Dataset sample_dataset(const DataLaw& law, Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
  ensure_dim(law.target.input_dim(), law.input_dim, "sample_dataset");
  Dataset ds;
  ds.x.resize(n, law.input_dim);
  ds.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    CounterRng rng(seed, StreamTag::Dataset, 0, std::uint64_t(i));
    for (Index j = 0; j < law.input_dim; ++j) ds.x(i, j) = rng.next_gaussian();
    const double eps = rng.next_gaussian();
    ds.y[i] =
        target_eval(law.target, ds.x.row(i).transpose()) + law.label_noise * eps;
  }
  return ds;
}

}  // namespace mflab::model

#include "mflab/quotient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mflab::quotient {

namespace {

// Points whose joint (w,b) norm is within this distance of 1 are
// treated as already canonical, which makes canonicalization exactly
// idempotent: one rescale lands inside the snap window, so the second
// application returns its input bit-for-bit.
constexpr double kSnapTol = 1e-12;

bool is_dead(const model::ParameterPoint& p) {
  return p.a == 0.0 || (p.b == 0.0 && p.w.isZero(0.0));
}

model::ParameterPoint dead_point(Index dim) {
  model::ParameterPoint p;
  p.w = Vector::Zero(dim);
  p.b = 0.0;
  p.a = 0.0;
  return p;
}

// Sign of the first nonzero coordinate of (w, b); 0 when all vanish.
double leading_sign(const Vector& w, double b) {
  for (Index j = 0; j < w.size(); ++j) {
    if (w[j] != 0.0) return w[j] > 0.0 ? 1.0 : -1.0;
  }
  if (b != 0.0) return b > 0.0 ? 1.0 : -1.0;
  return 0.0;
}

bool same_activation(const model::ActivationSpec& a,
                     const model::ActivationSpec& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == model::ActivationKind::LeakyRelu &&
      a.leaky_beta != b.leaky_beta) {
    return false;
  }
  if (a.kind == model::ActivationKind::Monomial &&
      a.monomial_degree != b.monomial_degree) {
    return false;
  }
  return true;
}

// Lexicographic order on (w..., b, a); equal coordinates fall back to
// the weight.
bool atom_less(const Atom& lhs, const Atom& rhs) {
  for (Index j = 0; j < lhs.point.w.size(); ++j) {
    if (lhs.point.w[j] != rhs.point.w[j]) {
      return lhs.point.w[j] < rhs.point.w[j];
    }
  }
  if (lhs.point.b != rhs.point.b) return lhs.point.b < rhs.point.b;
  if (lhs.point.a != rhs.point.a) return lhs.point.a < rhs.point.a;
  return lhs.weight < rhs.weight;
}

double atom_distance(const Atom& lhs, const Atom& rhs) {
  double worst = std::abs(lhs.point.b - rhs.point.b);
  worst = std::max(worst, std::abs(lhs.point.a - rhs.point.a));
  for (Index j = 0; j < lhs.point.w.size(); ++j) {
    worst = std::max(worst, std::abs(lhs.point.w[j] - rhs.point.w[j]));
  }
  return worst;
}

}  // namespace

model::ParameterPoint canonicalize(const model::ParameterPoint& theta,
                                   const model::ActivationSpec& spec) {
  // σ(0) = 0 for every supported activation, so a neuron with a = 0 or
  // (w,b) = 0 contributes the zero feature; its whole orbit collapses
  // to the canonical dead point.
  if (is_dead(theta)) return dead_point(theta.w.size());

  const double scale = std::sqrt(theta.w.squaredNorm() + theta.b * theta.b);
  switch (spec.kind) {
    case model::ActivationKind::Relu:
    case model::ActivationKind::LeakyRelu: {
      // Positive scaling (αw, αb, a/α): land on |(w,b)| = 1.
      if (std::abs(scale - 1.0) <= kSnapTol) return theta;
      model::ParameterPoint p;
      p.w = theta.w / scale;
      p.b = theta.b / scale;
      p.a = theta.a * scale;
      return p;
    }
    case model::ActivationKind::Tanh: {
      // Odd activation: (−w,−b,−a) is the same feature; pick the
      // representative whose leading (w,b) coordinate is positive.
      if (leading_sign(theta.w, theta.b) >= 0.0) return theta;
      model::ParameterPoint p;
      p.w = -theta.w;
      p.b = -theta.b;
      p.a = -theta.a;
      return p;
    }
    case model::ActivationKind::CenteredSigmoid:
      // No continuous orbit and no flip convention: the point is its
      // own representative.
      return theta;
    case model::ActivationKind::Monomial: {
      // Full homogeneity (αw, αb, α^{−k}a) for α ≠ 0: land on
      // |(w,b)| = 1 with a positive leading coordinate; the sign choice
      // multiplies a by (±1)^k.
      const double sign = leading_sign(theta.w, theta.b);
      if (std::abs(scale - 1.0) <= kSnapTol && sign > 0.0) return theta;
      const double alpha = sign / scale;
      double sign_pow = 1.0;
      for (int j = 0; j < spec.monomial_degree; ++j) sign_pow *= sign;
      model::ParameterPoint p;
      p.w = alpha * theta.w;
      p.b = alpha * theta.b;
      // α^{−k} = sign^k·scale^k.
      p.a = theta.a * sign_pow * std::pow(scale, double(spec.monomial_degree));
      return p;
    }
  }
  throw std::logic_error("canonicalize: unhandled activation kind");
}

std::vector<Atom> canonical_atoms(const AtomList& list, double merge_tol) {
  if (!(merge_tol >= 0.0)) {
    throw std::invalid_argument("canonical_atoms: merge_tol must be >= 0");
  }
  std::vector<Atom> clusters;
  for (const Atom& atom : list.atoms) {
    if (!(atom.weight > 0.0)) {
      throw std::invalid_argument("canonical_atoms: weights must be positive");
    }
    Atom canon{atom.weight, canonicalize(atom.point, list.activation)};
    if (is_dead(canon.point)) continue;  // dead mass is dropped
    bool merged = false;
    for (Atom& cluster : clusters) {
      if (atom_distance(cluster, canon) <= merge_tol) {
        cluster.weight += canon.weight;
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back(std::move(canon));
  }
  std::sort(clusters.begin(), clusters.end(), atom_less);
  return clusters;
}

bool equivalent_mod_gfin(const AtomList& a, const AtomList& b, double tol) {
  if (!same_activation(a.activation, b.activation)) {
    throw std::invalid_argument(
        "equivalent_mod_gfin: atom lists use different activations");
  }
  const std::vector<Atom> ca = canonical_atoms(a, tol);
  const std::vector<Atom> cb = canonical_atoms(b, tol);
  if (ca.size() != cb.size()) return false;
  for (size_t k = 0; k < ca.size(); ++k) {
    if (atom_distance(ca[k], cb[k]) > tol) return false;
    if (std::abs(ca[k].weight - cb[k].weight) > tol) return false;
  }
  return true;
}

double atom_network_eval(const AtomList& list, const Vector& x) {
  double acc = 0.0;
  for (const Atom& atom : list.atoms) {
    acc += atom.weight * model::feature_eval(atom.point, x, list.activation);
  }
  return acc;
}

bool function_equality_check(const AtomList& a, const AtomList& b,
                             const model::ActivationSpec& spec, int n_probe,
                             double tol, std::uint64_t seed) {
  if (n_probe < 1) {
    throw std::invalid_argument("function_equality_check: n_probe >= 1");
  }
  Index dim = -1;
  if (!a.atoms.empty()) dim = a.atoms.front().point.w.size();
  if (!b.atoms.empty()) {
    const Index db = b.atoms.front().point.w.size();
    if (dim >= 0 && db != dim) {
      throw std::invalid_argument(
          "function_equality_check: input dimensions differ");
    }
    dim = db;
  }
  if (dim < 0) return true;  // both empty: identically zero
  AtomList aa = a;
  AtomList bb = b;
  aa.activation = spec;
  bb.activation = spec;
  const Matrix probes =
      model::sample_inputs(n_probe, dim, seed, StreamTag::Scratch);
  double acc = 0.0;
  for (Index i = 0; i < probes.rows(); ++i) {
    const Vector x = probes.row(i).transpose();
    const double gap = atom_network_eval(aa, x) - atom_network_eval(bb, x);
    acc += gap * gap;
  }
  return std::sqrt(acc / double(n_probe)) <= tol;
}

int statistical_factor(int d_eff, int d_orb) {
  const int factor = d_eff + 2 - d_orb;
  if (factor < 1) {
    throw std::invalid_argument("statistical_factor: d_eff + 2 - d_orb < 1");
  }
  return factor;
}

std::vector<InvariantRow> invariant_table() {
  std::vector<InvariantRow> rows;
  rows.push_back({"relu", "linear", "1", 1, false, "2", ResidualKind::Zero,
                  "2"});
  rows.push_back({"relu", "piecewise_linear(k breaks)", "1", 1, false, "k+2",
                  ResidualKind::Zero, "2"});
  rows.push_back({"tanh", "analytic single-index", "1", 0, false,
                  "O(log(1/lambda))", ResidualKind::ExpSmall, "3"});
  rows.push_back({"monomial(k)", "polynomial degree <= k", "d", 1, true,
                  "finite", ResidualKind::Zero, "d+1"});
  rows.push_back({"monomial(k)", "polynomial degree > k", "d", 1, true,
                  "infinite", ResidualKind::TargetNorm, "d+1"});
  rows.push_back({"relu", "multi-index rank r", "r", 1, false, "depends",
                  ResidualKind::TargetDependent, "r+1"});
  return rows;
}

double covering_log(double eps, double sparse_depth, int d_eff, int d_orb,
                    double radius, int growth_exponent, double big_c) {
  if (!(eps > 0.0 && radius > 0.0 && big_c > 0.0)) {
    throw std::invalid_argument("covering_log: eps, radius, C must be > 0");
  }
  if (!(sparse_depth > 0.0)) {
    throw std::invalid_argument("covering_log: sparse depth must be > 0");
  }
  const double scale = big_c * std::pow(radius, double(growth_exponent + 1));
  if (eps >= scale) return 0.0;  // a single element covers the class
  return big_c * sparse_depth * double(statistical_factor(d_eff, d_orb)) *
         std::log(scale / eps);
}

}  // namespace mflab::quotient

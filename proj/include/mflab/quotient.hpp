// Neuron-level symmetry quotient: canonical representatives, atom-list
// equivalence, the architecture–target invariant table, and the
// quotient covering-number calculator.
//
// Each activation carries a finite-rank symmetry group acting on a
// single neuron without changing its feature:
//   * relu / leaky_relu: positive scalings (αw, αb, a/α), α > 0;
//   * tanh: the sign flip (−w, −b, −a);
//   * monomial(k): full scalar homogeneity (αw, αb, α^{−k}a), α ≠ 0;
//   * centered_sigmoid: only the identity (its odd symmetry moves the
//     bias off the orbit considered here, so no flip is applied);
// plus, for every activation, the collapse of zero-feature neurons to
// the dead point (0, 0, 0).
#ifndef MFLAB_QUOTIENT_HPP
#define MFLAB_QUOTIENT_HPP

#include <string>
#include <vector>

#include "mflab/model.hpp"

namespace mflab::quotient {

/// The canonical representative of θ's symmetry orbit: scaling families
/// land on |(w,b)| = 1 (monomials additionally flip so the first
/// nonzero coordinate of (w,b) is positive, absorbing (±1)^k into a),
/// tanh flips to a positive leading coordinate, and zero-feature
/// neurons collapse to (0,0,0).  Exactly idempotent: re-canonicalizing
/// a canonical point returns it bit-for-bit.
model::ParameterPoint canonicalize(const model::ParameterPoint& theta,
                                   const model::ActivationSpec& spec);

/// One weighted neuron of a finite-atom network Σ_k c_k·feature(θ_k,·).
struct Atom {
  double weight = 0.0;  // c_k > 0
  model::ParameterPoint point;
};

struct AtomList {
  std::vector<Atom> atoms;
  model::ActivationSpec activation;
};

/// Canonicalize every atom, drop dead atoms (their mass is the
/// quotient's dead component), merge atoms whose canonical points agree
/// within merge_tol (summing weights), and sort lexicographically by
/// coordinates with ties broken by weight.
std::vector<Atom> canonical_atoms(const AtomList& list, double merge_tol);

/// Equality of the two lists' canonical forms within tol, i.e. equality
/// of the pushforward measures modulo the finite-rank symmetry group.
bool equivalent_mod_gfin(const AtomList& a, const AtomList& b, double tol);

/// Monte Carlo check that the two atom-networks agree in L²(ρ_X): the
/// root-mean-square gap over n_probe Gaussian probes is ≤ tol.
bool function_equality_check(const AtomList& a, const AtomList& b,
                             const model::ActivationSpec& spec, int n_probe,
                             double tol, std::uint64_t seed);

/// Value of the atom-network at x.
double atom_network_eval(const AtomList& list, const Vector& x);

/// Per-atom statistical dimension d_eff + 2 − D_orb.
int statistical_factor(int d_eff, int d_orb);

enum class ResidualKind { Zero, ExpSmall, TargetNorm, TargetDependent };

/// One row of the canonical architecture–target table.  Symbolic
/// entries (full input dimension d, index rank r, λ-dependent depths)
/// are carried as display strings next to the numeric fields that have
/// concrete values.
struct InvariantRow {
  std::string activation;
  std::string target;
  std::string d_eff;        // "1", "d", "r"
  int d_orb = 0;
  bool d_orb_convention = false;  // stored value is a declared convention
  std::string s_star;       // sparse-depth bound, e.g. "2", "k+2", "infinite"
  ResidualKind residual = ResidualKind::Zero;
  std::string stat_factor;  // per-atom factor, e.g. "2", "d+1", "r+1"
};

/// The six canonical rows: relu/linear, relu/piecewise-k,
/// tanh/analytic single-index, monomial(k)/degree ≤ k,
/// monomial(k)/degree > k, relu/rank-r multi-index.
std::vector<InvariantRow> invariant_table();

/// Log covering number of the quotient parameter class:
/// C·S·(d_eff+2−D_orb)·log(C·R^{q+1}/ε), clamped to 0 once a single
/// element covers everything (ε ≥ C·R^{q+1}).
double covering_log(double eps, double sparse_depth, int d_eff, int d_orb,
                    double radius, int growth_exponent, double big_c);

}  // namespace mflab::quotient

#endif  // MFLAB_QUOTIENT_HPP

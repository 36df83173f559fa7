#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "treerec/cotree.hpp"
#include "treerec/flatsys.hpp"
#include "treerec/signature.hpp"

namespace treerec {

/// A recursive program scheme: unknowns defined by right-hand sides over
/// givens + unknowns in variables 0..n-1 (n the arity of the unknown).
/// Right-hand sides are finite terms in the usual case; rational trees are
/// accepted programmatically.
class Rps {
 public:
  /// rhs_terms[k] is the right-hand side of unknown k, a term over
  /// sum.sum() whose Var leaves are < arity; Param and Bottom are rejected.
  static Rps from_terms(SignatureSum sum, std::vector<PartialTerm> rhs_terms);
  /// Rational right-hand sides; node symbols are validated lazily during
  /// unfolding, roots eagerly by check_guarded.
  static Rps from_trees(SignatureSum sum, std::vector<CoTree> rhs_trees);

  const Signature& givens() const { return sum_.left(); }
  const Signature& unknowns() const { return sum_.right(); }
  const SignatureSum& sum() const { return sum_; }

  const CoTree& rhs_tree(std::uint32_t unknown) const { return rhs_trees_.at(unknown); }
  /// Present when the scheme was built from finite terms.
  const std::vector<PartialTerm>& rhs_terms() const { return rhs_terms_; }
  bool has_terms() const { return !rhs_terms_.empty() || rhs_trees_.empty(); }

 private:
  Rps(SignatureSum sum, std::vector<CoTree> trees, std::vector<PartialTerm> terms)
      : sum_(std::move(sum)), rhs_trees_(std::move(trees)), rhs_terms_(std::move(terms)) {}

  SignatureSum sum_;
  std::vector<CoTree> rhs_trees_;
  std::vector<PartialTerm> rhs_terms_;
};

/// Per unknown, the given symbol its right-hand side starts with — the
/// evidence that the scheme is in Greibach normal form.
class GuardedWitness {
 public:
  explicit GuardedWitness(std::vector<OpSym> roots) : roots_(std::move(roots)) {}
  const OpSym& root(std::uint32_t unknown) const { return roots_.at(unknown); }

 private:
  std::vector<OpSym> roots_;
};

struct GuardednessError {
  std::vector<OpSym> offending;  // unknowns whose rhs root is not a given
  std::string message() const;
};

std::variant<GuardedWitness, GuardednessError> check_guarded(const Rps& r);
/// Throws std::invalid_argument with the offending unknowns when unguarded.
GuardedWitness require_guarded(const Rps& r);

/// The state space of the induced flat one-step system: hash-consed terms
/// over givens+unknowns whose leaves are syntactic variables or parameter
/// slots, plus positions inside right-hand trees. One step substitutes an
/// unknown root by its right-hand side (whose root is a given, by
/// guardedness) and emits that given over the maximal proper substates.
/// Layers observed here are over the *givens* signature.
class RpsStates final : public TreeEngine {
 public:
  using StateId = std::uint64_t;

  static std::shared_ptr<RpsStates> make(Rps r);  // requires guardedness

  StateId var_state(std::uint64_t v) const;
  StateId param_state(std::uint64_t slot) const;
  /// f applied to argument states; f is a symbol of sum().sum().
  StateId apply(OpSym f, std::vector<StateId> args) const;
  /// Embeds a term over sum().sum(); Var leaves become var states, or the
  /// corresponding env entry when env is non-empty. Param leaves become
  /// parameter-slot states.
  StateId of_term(const PartialTerm& t, std::span<const StateId> env = {}) const;

  /// The one-step observation of a state (memoized).
  const Layer& step(StateId s) const { return layer_of(s); }
  /// The unfolding of a state: the tree this state denotes.
  CoTree tree(StateId s) const;

  const Rps& rps() const { return rps_; }

 protected:
  Layer expand(std::uint64_t state) const override;

 private:
  explicit RpsStates(Rps r, GuardedWitness w);

  enum class Kind : std::uint8_t { Var, Param, Term, Img };
  struct Entry {
    Kind kind;
    std::uint64_t head = 0;           // var id, slot, or symbol index
    std::vector<StateId> xs;          // Term: children; Img: env
    CoTree pos;                       // Img: position inside a rhs tree
  };

  StateId intern(Entry e) const;
  Layer apply_unknown(std::uint32_t unknown, const std::vector<StateId>& args) const;
  Layer node_layer(const OpSym& given, const std::vector<StateId>& children) const;

  Rps rps_;
  GuardedWitness witness_;
  mutable std::mutex mu_;
  mutable std::vector<Entry> entries_;
  mutable std::unordered_map<std::size_t, std::vector<StateId>> buckets_;
};

/// e† — the unique uninterpreted solution: for each unknown of arity n, a
/// tree over the givens with variables 0..n-1.
std::vector<CoTree> solve_uninterpreted(const Rps& r);

/// The induced homomorphism on terms over givens+unknowns: unfolds t with
/// the one-step map. Agrees with second-order substitution by [id, e†].
CoTree apply_solution(const Rps& r, const PartialTerm& t);

/// [κ, e†] as a second-order map on sum().sum(): givens map to themselves
/// (over the plain givens signature), unknowns to their solutions.
SecondOrderMap solution_map(const Rps& r, const std::vector<CoTree>& solution);

}  // namespace treerec

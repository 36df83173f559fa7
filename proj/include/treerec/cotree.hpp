#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "treerec/signature.hpp"

namespace treerec {

/// Leaf of an infinite tree: a variable index or an opaque parameter label.
struct Leaf {
  enum class Kind : std::uint8_t { Var, Param } kind = Kind::Var;
  std::uint64_t id = 0;

  static Leaf var(std::uint64_t v) { return {Kind::Var, v}; }
  static Leaf param(std::uint64_t p) { return {Kind::Param, p}; }
  bool is_var() const { return kind == Kind::Var; }
  friend bool operator==(const Leaf& a, const Leaf& b) {
    return a.kind == b.kind && a.id == b.id;
  }
};

class CoTree;

/// One observation step of a tree: either a leaf or a node with its
/// immediate subtrees.
struct Layer {
  std::optional<Leaf> leaf;
  OpSym sym;
  std::vector<CoTree> children;

  bool is_leaf() const { return leaf.has_value(); }
};

/// A coalgebra: a state space with a pure one-step observation. Forced
/// layers are memoized per state; concurrent forcing is safe (first insert
/// wins, expand is pure so duplicates are identical).
class TreeEngine : public std::enable_shared_from_this<TreeEngine> {
 public:
  virtual ~TreeEngine() = default;
  const Layer& layer_of(std::uint64_t state) const;

 protected:
  virtual Layer expand(std::uint64_t state) const = 0;

 private:
  mutable std::mutex mu_;
  mutable std::unordered_map<std::uint64_t, Layer> memo_;
};

/// A possibly infinite tree over a signature, held intensionally as a state
/// of some engine. Values are immutable and cheap to copy.
class CoTree {
 public:
  CoTree() = default;
  CoTree(std::shared_ptr<const TreeEngine> eng, std::uint64_t state)
      : eng_(std::move(eng)), state_(state) {}

  bool valid() const { return eng_ != nullptr; }
  const Layer& layer() const;

  /// Identity of the underlying coalgebra state; equal keys mean the same
  /// state of the same engine (hence identical trees).
  std::pair<const TreeEngine*, std::uint64_t> state_key() const {
    return {eng_.get(), state_};
  }

 private:
  std::shared_ptr<const TreeEngine> eng_;
  std::uint64_t state_ = 0;
};

// -- constructors ------------------------------------------------------

CoTree var(std::uint64_t v);
CoTree param_leaf(std::uint64_t p);
CoTree node(OpSym f, std::vector<CoTree> children);
/// Embeds a finite term; Bottom leaves are rejected (no ⊥ in tree space).
CoTree from_term(const PartialTerm& t);

/// What a corecursive step yields: a leaf or a node over successor seeds.
template <class S>
struct CoStep {
  std::optional<Leaf> leaf;
  OpSym sym;
  std::vector<S> children;

  static CoStep var(std::uint64_t v) { return {Leaf::var(v), {}, {}}; }
  static CoStep param(std::uint64_t p) { return {Leaf::param(p), {}, {}}; }
  static CoStep node(OpSym f, std::vector<S> cs) {
    return {std::nullopt, f, std::move(cs)};
  }
};

namespace detail {

template <class S, class F>
class UnfoldEngine final : public TreeEngine {
 public:
  explicit UnfoldEngine(F step) : step_(std::move(step)) {}

  std::uint64_t intern(const S& seed) const {
    std::lock_guard<std::mutex> g(mu_);
    auto it = ids_.find(seed);
    if (it != ids_.end()) return it->second;
    std::uint64_t id = seeds_.size();
    seeds_.push_back(seed);
    ids_.emplace(seed, id);
    return id;
  }

 protected:
  Layer expand(std::uint64_t state) const override {
    S seed;
    {
      std::lock_guard<std::mutex> g(mu_);
      seed = seeds_[state];
    }
    CoStep<S> step = step_(seed);
    Layer l;
    l.leaf = step.leaf;
    l.sym = step.sym;
    if (!step.leaf) {
      if (step.children.size() != step.sym.arity())
        throw std::invalid_argument("step emitted wrong child count for " +
                                    step.sym.name());
      auto self = shared_from_this();
      l.children.reserve(step.children.size());
      for (const S& c : step.children) l.children.emplace_back(self, intern(c));
    }
    return l;
  }

 private:
  F step_;
  mutable std::mutex mu_;
  mutable std::vector<S> seeds_;
  mutable std::unordered_map<S, std::uint64_t> ids_;
};

}  // namespace detail

/// Builds the unique tree replaying `step` from `seed` (finality of the
/// tree space). `step` must be pure; seeds need std::hash and ==.
template <class S, class F>
CoTree unfold(const S& seed, F step) {
  auto eng = std::make_shared<detail::UnfoldEngine<S, F>>(std::move(step));
  return CoTree(eng, eng->intern(seed));
}

// -- observation -------------------------------------------------------

/// Cuts at depth n: everything at depth n becomes Bottom.
PartialTerm cut(const CoTree& t, std::uint32_t depth);

/// Total approximate equality: do the two trees agree up to depth d?
bool cut_equal(const CoTree& a, const CoTree& b, std::uint32_t depth);

// -- substitution ------------------------------------------------------

using VarSubst = std::function<std::optional<CoTree>(std::uint64_t)>;

/// First-order substitution: replaces Var leaves by trees, corecursively.
/// Vars without a mapping stay put.
CoTree subst(const CoTree& t, VarSubst s);
CoTree subst(const CoTree& t, const std::vector<CoTree>& by_index);

/// Per-symbol images for substituting trees for operation symbols; the
/// image of an n-ary symbol is a tree with variables 0..n-1. Images must
/// be non-erasing (root is a node), or productivity would fail.
class SecondOrderMap {
 public:
  SecondOrderMap(Signature source, std::vector<CoTree> images);
  static SecondOrderMap identity(const Signature& sig);

  const Signature& source() const { return source_; }
  const CoTree& image(const OpSym& f) const;

 private:
  Signature source_;
  std::vector<CoTree> images_;
};

/// Replaces every source-signature node by its image tree with the
/// (substituted) children plugged in for 0..n-1; variables are fixed.
CoTree second_order_subst(const CoTree& t, const SecondOrderMap& m);

// -- equality ----------------------------------------------------------

enum class Bisim : std::uint8_t { Equal, Distinct, Undecided };

/// Decides equality in the tree space for rational trees by exploring the
/// product state space with union-find; exceeding the cap gives Undecided.
Bisim bisimilar(const CoTree& a, const CoTree& b, std::size_t state_cap = 10000);

// -- export ------------------------------------------------------------

std::string dot_of_cut(const PartialTerm& t,
                       const std::vector<std::string>& var_names = {},
                       const std::vector<std::string>& param_names = {});

/// DOT of the reachable-state graph of a rational tree (at most cap states;
/// a truncation comment is emitted if the cap is hit).
std::string dot_of_state_graph(const CoTree& t, std::size_t state_cap = 10000,
                               const std::vector<std::string>& var_names = {},
                               const std::vector<std::string>& param_names = {});

}  // namespace treerec

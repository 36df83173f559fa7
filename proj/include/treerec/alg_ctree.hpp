#pragma once

#include <optional>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "treerec/elgot.hpp"

namespace treerec {

/// The computation-tree algebra over a base algebra A0: the carrier adds a
/// fresh element ↑ (encoded as nullopt), every operation except the
/// designated ternary conditional is extended strictly, and cond tests its
/// first argument against the designated zero. Solving a flat system is the
/// least partial computation function: demand-driven evaluation with
/// memoization where a variable already on the evaluation stack is
/// undefined through that path; ↑ fills in everywhere the computation
/// function is undefined.
template <class T>
class CTreeAlgebra final : public ElgotAlgebra<std::optional<T>> {
 public:
  using V = std::optional<T>;  // nullopt = ↑
  using BaseOp = std::function<T(std::span<const T>)>;
  using PartialBaseOp = std::function<std::optional<T>(std::span<const T>)>;

  CTreeAlgebra(Signature sig, T zero, const std::string& cond_name)
      : sig_(std::move(sig)), ops_(sig_.size()), zero_(std::move(zero)) {
    auto c = sig_.find(cond_name);
    if (!c) throw std::invalid_argument("no symbol named " + cond_name);
    if (c->arity() != 3)
      throw std::invalid_argument("the conditional symbol must be ternary");
    cond_ = *c;
  }

  void set_base(const std::string& name, BaseOp op) {
    auto moved = std::make_shared<BaseOp>(std::move(op));
    set_base_partial(name, [moved](std::span<const T> a) -> std::optional<T> {
      return (*moved)(a);
    });
  }

  /// A base operation that may itself be undefined. Such bases void the
  /// strictness converse the construction otherwise guarantees; validate()
  /// reports where.
  void set_base_partial(const std::string& name, PartialBaseOp op) {
    auto s = sig_.find(name);
    if (!s) throw std::invalid_argument("no symbol named " + name);
    if (*s == cond_)
      throw std::invalid_argument("the conditional is fixed by the construction");
    ops_.at(s->index()) = std::move(op);
  }

  void set_show(std::function<std::string(const T&)> show) { show_ = std::move(show); }

  const OpSym& cond_symbol() const { return cond_; }
  const T& zero() const { return zero_; }

  /// Checks op(a⃗) defined for all tuples over the given finite universe;
  /// returns a warning per violation (ops undefined on defined arguments
  /// break the guarantee that solutions satisfy the Elgot laws).
  std::vector<std::string> validate(std::span<const T> universe) const {
    std::vector<std::string> warnings;
    for (std::uint32_t i = 0; i < sig_.size(); ++i) {
      OpSym f = sig_.symbol(i);
      if (f == cond_) continue;
      if (!ops_[i]) {
        warnings.push_back("no operation registered for " + f.name());
        continue;
      }
      std::vector<std::size_t> idx(f.arity(), 0);
      std::vector<T> args(f.arity());
      bool more = true;
      while (more) {
        for (std::uint32_t j = 0; j < f.arity(); ++j) args[j] = universe[idx[j]];
        if (!ops_[i](args)) {
          warnings.push_back("operation " + f.name() +
                             " is undefined on defined arguments");
          break;
        }
        more = false;
        for (std::uint32_t j = 0; j < f.arity(); ++j) {
          if (++idx[j] < universe.size()) {
            more = true;
            break;
          }
          idx[j] = 0;
        }
      }
    }
    return warnings;
  }

  const Signature& signature() const override { return sig_; }

  V apply(const OpSym& f, std::span<const V> args) const override {
    if (!sig_.owns(f))
      throw std::invalid_argument("symbol " + f.name() + " is not interpreted here");
    if (f == cond_) {
      if (!args[0]) return std::nullopt;
      return *args[0] == zero_ ? args[1] : args[2];
    }
    if (!ops_[f.index()])
      throw std::invalid_argument("no operation registered for " + f.name());
    std::vector<T> plain;
    plain.reserve(args.size());
    for (const V& v : args) {
      if (!v) return std::nullopt;
      plain.push_back(*v);
    }
    return ops_[f.index()](plain);
  }

  /// The computation function ê of a flat system at one variable: nullopt
  /// when undefined. `touched` / aborted bookkeeping is shared with solve.
  std::optional<T> computation_fn(const FlatEq<V>& e, std::uint64_t x,
                                  const Budget& b) const {
    Run run;
    std::optional<T> v = eval(e, x, b, run);
    return run.aborted ? std::nullopt : v;
  }

  Solution<V> solve(const FlatEq<V>& e, std::span<const std::uint64_t> wanted,
                    const Budget& b) const override {
    Run run;
    for (auto x : wanted) eval(e, x, b, run);
    Solution<V> out;
    out.converged = !run.aborted;
    for (const auto& [x, v] : run.memo) out.values.emplace(x, v ? V(*v) : V());
    if (run.aborted)
      for (auto x : wanted)
        if (!run.memo.count(x) || !run.memo.at(x)) out.unresolved.push_back(x);
    return out;
  }

  /// Looks for a finite evaluable subtree within `fuel` layers: under a
  /// conditional only the tested child and the branch it selects are
  /// descended. Enlarging fuel never changes a defined answer.
  Solved<V> eval_tree(const CoTree& t, const std::function<V(const Leaf&)>& leaf_value,
                      const Budget& b) const override {
    bool wall = false;
    V v = search(t, b.fuel, leaf_value, wall);
    if (v) return {v, true};
    return {std::nullopt, !wall};  // genuine ↑ only if no cut branch was taken
  }

  double distance(const V& a, const V& b) const override { return a == b ? 0.0 : 1.0; }

  std::string show(const V& v) const override {
    if (!v) return "↑";
    if (show_) return show_(*v);
    if constexpr (std::is_arithmetic_v<T>) return std::to_string(*v);
    else return "<value>";
  }

 private:
  struct Run {
    std::unordered_map<std::uint64_t, std::optional<T>> memo;
    std::unordered_set<std::uint64_t> on_stack;
    std::size_t depth = 0;
    bool aborted = false;
  };

  std::optional<T> eval(const FlatEq<V>& e, std::uint64_t x, const Budget& b,
                        Run& run) const {
    auto it = run.memo.find(x);
    if (it != run.memo.end()) return it->second;
    if (run.on_stack.count(x)) return std::nullopt;  // cyclic need: undefined
    if (run.memo.size() > b.state_cap || run.depth > 16384) {
      run.aborted = true;
      return std::nullopt;
    }
    run.on_stack.insert(x);
    run.depth++;
    std::optional<T> result;
    FlatRow<V> row = e.rhs(x);
    if (row.is_param) {
      result = row.param;  // a parameter that is ↑ itself stays undefined
    } else if (row.sym == cond_) {
      std::optional<T> test = eval(e, row.args[0], b, run);
      if (test) result = eval(e, *test == zero_ ? row.args[1] : row.args[2], b, run);
    } else {
      std::vector<T> args;
      args.reserve(row.args.size());
      bool all = true;
      for (auto a : row.args) {
        std::optional<T> v = eval(e, a, b, run);
        if (!v) {
          all = false;
          break;
        }
        args.push_back(*v);
      }
      if (all) {
        if (!ops_[row.sym.index()])
          throw std::invalid_argument("no operation registered for " + row.sym.name());
        result = ops_[row.sym.index()](args);
      }
    }
    run.depth--;
    run.on_stack.erase(x);
    if (!run.aborted) run.memo.emplace(x, result);
    return result;
  }

  V search(const CoTree& t, std::uint64_t fuel,
           const std::function<V(const Leaf&)>& leaf_value, bool& wall) const {
    if (fuel == 0) {
      wall = true;
      return std::nullopt;
    }
    const Layer& l = t.layer();
    if (l.is_leaf()) return leaf_value(*l.leaf);
    if (l.sym == cond_) {
      V test = search(l.children[0], fuel - 1, leaf_value, wall);
      if (!test) return std::nullopt;
      return search(l.children[*test == zero_ ? 1 : 2], fuel - 1, leaf_value, wall);
    }
    std::vector<V> args;
    args.reserve(l.children.size());
    for (const CoTree& c : l.children) {
      V v = search(c, fuel - 1, leaf_value, wall);
      if (!v) return std::nullopt;
      args.push_back(std::move(v));
    }
    return apply(l.sym, args);
  }

  Signature sig_;
  std::vector<PartialBaseOp> ops_;
  T zero_;
  OpSym cond_;
  std::function<std::string(const T&)> show_;
};

/// The factorial base over the naturals with ↑ and cond testing zero.
inline CTreeAlgebra<std::uint64_t> nat_ctree_algebra() {
  Signature sig = Signature::make({{"one", 0}, {"pred", 1}, {"mul", 2}, {"cond", 3}});
  CTreeAlgebra<std::uint64_t> alg(sig, 0, "cond");
  alg.set_base("one", [](std::span<const std::uint64_t>) { return std::uint64_t{1}; });
  alg.set_base("pred", [](std::span<const std::uint64_t> a) {
    return a[0] == 0 ? std::uint64_t{0} : a[0] - 1;
  });
  alg.set_base("mul", [](std::span<const std::uint64_t> a) { return a[0] * a[1]; });
  return alg;
}

}  // namespace treerec

#pragma once

#include <optional>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "treerec/elgot.hpp"

namespace treerec {

/// Flat pointed order on T: nullopt is the bottom element, everything else
/// is discrete.
template <class T>
using FlatVal = std::optional<T>;

/// A CPO-enrichable algebra on a flat domain: operations are strict unless
/// registered raw (raw operations must be monotone on the flat order; the
/// ternary conditional is the stock example). Solving assigns least
/// solutions by Kleene iteration; on flat domains stabilization detection
/// makes the per-query least fixed point exact.
template <class T>
class FlatDomainAlgebra final : public ElgotAlgebra<FlatVal<T>> {
 public:
  using V = FlatVal<T>;
  using StrictOp = std::function<T(std::span<const T>)>;
  using RawOp = std::function<V(std::span<const V>)>;

  explicit FlatDomainAlgebra(Signature sig) : sig_(std::move(sig)), ops_(sig_.size()) {}

  void set_strict(const std::string& name, StrictOp op) {
    ops_.at(must_find(name).index()) = Op{std::move(op), nullptr};
  }

  void set_raw(const std::string& name, RawOp op) {
    ops_.at(must_find(name).index()) = Op{nullptr, std::move(op)};
  }

  /// cond(x,y,z): bottom if x is bottom, y if x = zero, z otherwise.
  void set_cond(const std::string& name, T zero) {
    OpSym c = must_find(name);
    if (c.arity() != 3)
      throw std::invalid_argument("conditional symbol must be ternary");
    set_raw(name, [zero](std::span<const V> a) -> V {
      if (!a[0]) return std::nullopt;
      return *a[0] == zero ? a[1] : a[2];
    });
  }

  void set_show(std::function<std::string(const T&)> show) { show_ = std::move(show); }

  const Signature& signature() const override { return sig_; }

  V apply(const OpSym& f, std::span<const V> args) const override {
    if (!sig_.owns(f))
      throw std::invalid_argument("symbol " + f.name() + " is not interpreted here");
    const Op& op = ops_[f.index()];
    if (op.raw) return op.raw(args);
    if (!op.strict)
      throw std::invalid_argument("no operation registered for " + f.name());
    std::vector<T> plain;
    plain.reserve(args.size());
    for (const V& v : args) {
      if (!v) return std::nullopt;
      plain.push_back(*v);
    }
    return op.strict(plain);
  }

  /// Kleene chain from constant bottom, demand-discovering variables; stops
  /// early once a sweep repeats with no new variables (the least fixed
  /// point on the touched part). Fuel-out leaves bottom entries flagged.
  Solution<V> solve(const FlatEq<V>& e, std::span<const std::uint64_t> wanted,
                    const Budget& b) const override {
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::vector<std::uint64_t> ids;
    std::vector<FlatRow<V>> rows;
    std::vector<V> cur;

    auto discover = [&](std::uint64_t x) -> std::size_t {
      auto it = index.find(x);
      if (it != index.end()) return it->second;
      std::size_t i = ids.size();
      index.emplace(x, i);
      ids.push_back(x);
      rows.push_back(e.rhs(x));
      cur.emplace_back(std::nullopt);
      return i;
    };
    for (auto x : wanted) discover(x);

    bool stabilized = false;
    for (std::uint64_t iter = 0; iter < b.fuel && !stabilized; ++iter) {
      std::size_t known = ids.size();
      std::vector<V> next(known);
      bool changed = false;
      for (std::size_t i = 0; i < known; ++i) {
        FlatRow<V> row = rows[i];  // by value: discover() may grow `rows`
        if (row.is_param) {
          next[i] = row.param;
        } else {
          std::vector<V> args;
          args.reserve(row.args.size());
          for (auto a : row.args) {
            std::size_t j = discover(a);
            args.push_back(j < known ? cur[j] : std::nullopt);
          }
          next[i] = apply(row.sym, args);
        }
        changed = changed || next[i] != cur[i];
      }
      bool grew = ids.size() > known;
      next.resize(ids.size());
      cur = std::move(next);
      stabilized = !changed && !grew;
      if (ids.size() > b.state_cap) break;
    }

    Solution<V> out;
    out.converged = stabilized;
    for (std::size_t i = 0; i < ids.size(); ++i) out.values.emplace(ids[i], cur[i]);
    if (!stabilized)
      for (std::size_t i = 0; i < ids.size(); ++i)
        if (!cur[i]) out.unresolved.push_back(ids[i]);
    return out;
  }

  /// Evaluates cuts of increasing depth with bottom below the cut; monotone
  /// in the depth, so the first defined value is the answer.
  Solved<V> eval_tree(const CoTree& t, const std::function<V(const Leaf&)>& leaf_value,
                      const Budget& b) const override {
    struct Key {
      const void* eng;
      std::uint64_t state;
      std::uint64_t depth;
      bool operator==(const Key&) const = default;
    };
    struct KeyHash {
      std::size_t operator()(const Key& k) const {
        std::size_t h = std::hash<const void*>{}(k.eng);
        h = h * 1099511628211ULL + k.state;
        return h * 1099511628211ULL + k.depth;
      }
    };
    std::unordered_map<Key, V, KeyHash> memo;
    std::function<V(const CoTree&, std::uint64_t)> eval =
        [&](const CoTree& u, std::uint64_t k) -> V {
      if (k == 0) return std::nullopt;
      auto sk = u.state_key();
      Key mk{sk.first, sk.second, k};
      auto it = memo.find(mk);
      if (it != memo.end()) return it->second;
      const Layer& l = u.layer();
      V v;
      if (l.is_leaf()) {
        v = leaf_value(*l.leaf);
      } else {
        std::vector<V> args;
        args.reserve(l.children.size());
        for (const CoTree& c : l.children) args.push_back(eval(c, k - 1));
        v = apply(l.sym, args);
      }
      memo.emplace(mk, v);
      return v;
    };
    for (std::uint64_t k = 1; k <= b.fuel; ++k) {
      V v = eval(t, k);
      if (v) return {v, true};
    }
    return {std::nullopt, false};
  }

  double distance(const V& a, const V& b) const override { return a == b ? 0.0 : 1.0; }

  std::string show(const V& v) const override {
    if (!v) return "⊥";
    if (show_) return show_(*v);
    if constexpr (std::is_arithmetic_v<T>) return std::to_string(*v);
    else return "<value>";
  }

 private:
  struct Op {
    StrictOp strict;
    RawOp raw;
  };

  OpSym must_find(const std::string& name) const {
    auto s = sig_.find(name);
    if (!s) throw std::invalid_argument("no symbol named " + name);
    return *s;
  }

  Signature sig_;
  std::vector<Op> ops_;
  std::function<std::string(const T&)> show_;
};

/// Interprets a guarded scheme by iterating the scheme-as-operator from the
/// constant-bottom function family, evaluated on demand per input. This is
/// a route independent of solving ē_A: right-hand terms are evaluated
/// whole, with unknowns referring to the previous iterate.
template <class T>
class LfpInterpreter {
 public:
  using V = FlatVal<T>;

  LfpInterpreter(const FlatDomainAlgebra<T>& alg, Rps r)
      : alg_(&alg), rps_(std::move(r)) {
    require_guarded(rps_);
    if (rps_.rhs_terms().empty() && rps_.unknowns().size() > 0)
      throw std::invalid_argument(
          "operator iteration needs finite right-hand terms");
  }

  /// The d-th iterate at unknown(args); d = 0 is constant bottom.
  V iterate(std::uint32_t unknown, std::vector<V> args, std::uint64_t d) const {
    if (d == 0) return std::nullopt;
    MemoKey k{unknown, args, d};
    auto it = memo_.find(k);
    if (it != memo_.end()) return it->second;
    V v = eval_term_at(rps_.rhs_terms().at(unknown), args, d);
    memo_.emplace(std::move(k), v);
    return v;
  }

  /// Least-fixed-point value: on the flat order a defined iterate is final.
  Solved<V> call(std::uint32_t unknown, std::span<const V> args,
                 std::uint64_t fuel) const {
    std::vector<V> a(args.begin(), args.end());
    for (std::uint64_t d = 1; d <= fuel; ++d) {
      V v = iterate(unknown, a, d);
      if (v) return {v, true};
    }
    return {std::nullopt, false};
  }

 private:
  V eval_term_at(const PartialTerm& t, const std::vector<V>& env, std::uint64_t d) const {
    switch (t.tag) {
      case PartialTerm::Tag::Var:
        return env.at(t.leaf);
      case PartialTerm::Tag::Node: {
        std::vector<V> args;
        args.reserve(t.children.size());
        for (const auto& c : t.children) args.push_back(eval_term_at(c, env, d));
        if (rps_.sum().from_left(t.sym))
          return alg_->apply(rps_.sum().project(t.sym), args);
        return iterate(rps_.sum().project(t.sym).index(), std::move(args), d - 1);
      }
      default:
        throw std::invalid_argument("unexpected leaf in a right-hand term");
    }
  }

  struct MemoKey {
    std::uint32_t unknown;
    std::vector<V> args;
    std::uint64_t depth;
    bool operator==(const MemoKey&) const = default;
  };
  struct MemoHash {
    std::size_t operator()(const MemoKey& k) const {
      std::size_t h = k.unknown * 0x9e3779b97f4a7c15ULL + k.depth;
      for (const auto& a : k.args) {
        h = h * 1099511628211ULL + (a ? std::hash<T>{}(*a) + 1 : 0);
      }
      return h;
    }
  };

  const FlatDomainAlgebra<T>* alg_;
  Rps rps_;
  mutable std::unordered_map<MemoKey, V, MemoHash> memo_;
};

template <class T>
Solved<FlatVal<T>> interpret_rps_lfp(const FlatDomainAlgebra<T>& alg, const Rps& r,
                                     std::uint32_t unknown,
                                     std::span<const FlatVal<T>> args,
                                     std::uint64_t fuel) {
  LfpInterpreter<T> lfp(alg, r);
  return lfp.call(unknown, args, fuel);
}

/// ⋁_k f^k(a) to the given fuel, realized by running the one-equation
/// scheme φ(x) ≈ F(x, φ(G x)) in the algebra where F is join (with bottom
/// as its unit) and G is f. `stabilized` reports whether one more round
/// left the value unchanged; for general pointed orders the result is only
/// a fuel-bounded approximation.
template <class T>
struct JoinChainResult {
  T value;
  bool stabilized;
};

template <class T>
JoinChainResult<T> lfp_of_endofunction(std::function<T(const T&, const T&)> join,
                                       std::function<T(const T&)> f, const T& a,
                                       std::uint64_t fuel) {
  Signature givens = Signature::make({{"F", 2}, {"G", 1}});
  Signature unknowns = Signature::make({{"phi", 1}});
  SignatureSum ss(givens, unknowns);
  OpSym F = *ss.sum().find("F"), G = *ss.sum().find("G"), phi = *ss.sum().find("phi");
  PartialTerm rhs = PartialTerm::node(
      F, {PartialTerm::var(0),
          PartialTerm::node(phi, {PartialTerm::node(G, {PartialTerm::var(0)})})});
  Rps scheme = Rps::from_terms(ss, {rhs});

  FlatDomainAlgebra<T> alg(givens);
  alg.set_raw("F", [join](std::span<const FlatVal<T>> xs) -> FlatVal<T> {
    if (!xs[0]) return xs[1];
    if (!xs[1]) return xs[0];
    return join(*xs[0], *xs[1]);
  });
  alg.set_strict("G", [f](std::span<const T> xs) { return f(xs[0]); });

  LfpInterpreter<T> lfp(alg, scheme);
  FlatVal<T> prev, cur;
  for (std::uint64_t d = 1; d <= fuel; ++d) {
    prev = cur;
    cur = lfp.iterate(0, {FlatVal<T>(a)}, d);
  }
  if (!cur) return {a, false};  // fuel 0: nothing computed
  return {*cur, fuel >= 2 && prev == cur};
}

namespace detail {

inline void require_symbol(const Signature& sig, const std::string& name,
                           std::uint32_t arity) {
  auto s = sig.find(name);
  if (!s)
    throw std::invalid_argument("this algebra needs a symbol named " + name);
  if (s->arity() != arity)
    throw std::invalid_argument("symbol " + name + " must have arity " +
                                std::to_string(arity));
}

}  // namespace detail

/// The factorial givens bound onto `sig` (which must declare one:0, pred:1,
/// mul:2, cond:3): one, pred (monus), mul, and cond testing against zero.
inline FlatDomainAlgebra<std::uint64_t> nat_bot_algebra(const Signature& sig) {
  detail::require_symbol(sig, "one", 0);
  detail::require_symbol(sig, "pred", 1);
  detail::require_symbol(sig, "mul", 2);
  detail::require_symbol(sig, "cond", 3);
  FlatDomainAlgebra<std::uint64_t> alg(sig);
  alg.set_strict("one", [](std::span<const std::uint64_t>) { return std::uint64_t{1}; });
  alg.set_strict("pred", [](std::span<const std::uint64_t> a) {
    return a[0] == 0 ? std::uint64_t{0} : a[0] - 1;
  });
  alg.set_strict("mul", [](std::span<const std::uint64_t> a) { return a[0] * a[1]; });
  alg.set_cond("cond", 0);
  return alg;
}

inline FlatDomainAlgebra<std::uint64_t> nat_bot_algebra() {
  return nat_bot_algebra(
      Signature::make({{"one", 0}, {"pred", 1}, {"mul", 2}, {"cond", 3}}));
}

/// Givens for the common-binary-prefix scheme, bound onto `sig` (F:3, G:1):
/// G halves, F returns its first argument when the first two agree and its
/// third otherwise (non-strict in the third argument exactly when they
/// agree).
inline FlatDomainAlgebra<std::uint64_t> gcd_prefix_algebra(const Signature& sig) {
  detail::require_symbol(sig, "F", 3);
  detail::require_symbol(sig, "G", 1);
  FlatDomainAlgebra<std::uint64_t> alg(sig);
  using V = FlatVal<std::uint64_t>;
  alg.set_raw("F", [](std::span<const V> a) -> V {
    if (!a[0] || !a[1]) return std::nullopt;
    if (*a[0] == *a[1]) return *a[0];
    return a[2];
  });
  alg.set_strict("G", [](std::span<const std::uint64_t> a) { return a[0] / 2; });
  return alg;
}

inline FlatDomainAlgebra<std::uint64_t> gcd_prefix_algebra() {
  return gcd_prefix_algebra(Signature::make({{"F", 3}, {"G", 1}}));
}

}  // namespace treerec

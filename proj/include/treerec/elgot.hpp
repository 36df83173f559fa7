#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "treerec/flatsys.hpp"
#include "treerec/rps.hpp"
#include "treerec/signature.hpp"

namespace treerec {

/// Approximation control: exact least/unique fixed points are not
/// computable in general, so every backend works to a budget.
struct Budget {
  std::uint64_t fuel = 256;        // iterations / unfolding depth
  double tol = 1e-10;              // metric backends
  std::size_t state_cap = 100000;  // demand-discovery cap

  Budget() = default;
  Budget(std::uint64_t f, double t) : fuel(f), tol(t) {}
};

template <class V>
struct Solved {
  V value{};
  bool resolved = true;  // false: budget ran out before the value settled
};

/// Everything a solver computed on one run: values for all demand-touched
/// variables, which of them are unresolved, and whether the run converged.
template <class V>
struct Solution {
  std::unordered_map<std::uint64_t, V> values;
  std::vector<std::uint64_t> unresolved;
  bool converged = true;

  Solved<V> at(std::uint64_t x) const {
    Solved<V> s;
    s.value = values.at(x);
    for (auto u : unresolved)
      if (u == x) s.resolved = false;
    return s;
  }
};

/// An algebra with a chosen solution operation for flat systems (satisfying
/// Functoriality and Compositionality, which the harness below tests), plus
/// an approximation of the induced evaluation of whole trees.
template <class V>
class ElgotAlgebra {
 public:
  virtual ~ElgotAlgebra() = default;

  virtual const Signature& signature() const = 0;
  virtual V apply(const OpSym& f, std::span<const V> args) const = 0;
  virtual Solution<V> solve(const FlatEq<V>& e, std::span<const std::uint64_t> wanted,
                            const Budget& b) const = 0;
  /// Evaluation of a tree whose leaves denote carrier elements.
  virtual Solved<V> eval_tree(const CoTree& t,
                              const std::function<V(const Leaf&)>& leaf_value,
                              const Budget& b) const = 0;
  virtual double distance(const V& a, const V& b) const = 0;
  virtual std::string show(const V& v) const = 0;

  bool close(const V& a, const V& b, double tol) const {
    return distance(a, b) <= tol;
  }
};

/// Bottom-up evaluation of a finite closed term; Param(i) and Var(i)
/// leaves both index into `leaves`.
template <class V>
V eval_term(const ElgotAlgebra<V>& alg, const PartialTerm& t, std::span<const V> leaves) {
  switch (t.tag) {
    case PartialTerm::Tag::Bottom:
      throw std::invalid_argument("cannot evaluate ⊥");
    case PartialTerm::Tag::Var:
    case PartialTerm::Tag::Param:
      return leaves[t.leaf];
    case PartialTerm::Tag::Node: {
      std::vector<V> args;
      args.reserve(t.children.size());
      for (const auto& c : t.children) args.push_back(eval_term(alg, c, leaves));
      return alg.apply(t.sym, args);
    }
  }
  throw std::logic_error("unreachable");
}

/// Algebra-specific approximation of the evaluation morphism on trees;
/// Param(i) and Var(i) leaves both index into `params`.
template <class V>
Solved<V> eval_cotree(const ElgotAlgebra<V>& alg, const CoTree& t,
                      std::span<const V> params, const Budget& b) {
  std::vector<V> copy(params.begin(), params.end());
  return alg.eval_tree(
      t, [copy](const Leaf& l) -> V { return copy.at(l.id); }, b);
}

/// ē_A — the demand-driven flat system a guarded scheme induces over an
/// algebra: variables are the hash-consed states of the scheme's one-step
/// system, parameter slots hold carrier elements.
template <class V>
class InducedFlatEq final : public FlatEq<V> {
 public:
  explicit InducedFlatEq(std::shared_ptr<const RpsStates> states)
      : states_(std::move(states)) {}

  /// State standing for unknown(args); `unknown` is indexed in the scheme's
  /// unknown signature.
  std::uint64_t query(std::uint32_t unknown, std::span<const V> args) const {
    const Rps& r = states_->rps();
    OpSym f = r.sum().inject_right(r.unknowns().symbol(unknown));
    if (args.size() != f.arity())
      throw std::invalid_argument("arity mismatch for unknown " + f.name());
    std::vector<std::uint64_t> arg_states;
    arg_states.reserve(args.size());
    for (const V& v : args) arg_states.push_back(states_->param_state(slot_of(v)));
    return states_->apply(f, std::move(arg_states));
  }

  FlatRow<V> rhs(std::uint64_t x) const override {
    const Layer& l = states_->step(x);
    if (l.is_leaf()) {
      if (l.leaf->is_var())
        throw std::invalid_argument(
            "free syntactic variable in an interpreted scheme run");
      std::lock_guard<std::mutex> g(mu_);
      return FlatRow<V>::parameter(slots_.at(l.leaf->id));
    }
    std::vector<std::uint64_t> args;
    args.reserve(l.children.size());
    for (const CoTree& c : l.children) args.push_back(c.state_key().second);
    return FlatRow<V>::flat(l.sym, std::move(args));
  }

  const RpsStates& states() const { return *states_; }

 private:
  std::uint64_t slot_of(const V& v) const {
    std::lock_guard<std::mutex> g(mu_);
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (slots_[i] == v) return i;
    slots_.push_back(v);
    return slots_.size() - 1;
  }

  std::shared_ptr<const RpsStates> states_;
  mutable std::mutex mu_;
  mutable std::vector<V> slots_;
};

/// The standard interpreted solution e‡: per unknown a function on the
/// carrier, computed per query by solving ē_A with the backend's solver.
template <class V>
class Interpretation {
 public:
  Interpretation(const ElgotAlgebra<V>& alg, const Rps& r, Budget b)
      : alg_(&alg),
        states_(RpsStates::make(r)),
        system_(std::make_shared<InducedFlatEq<V>>(states_)),
        budget_(b) {}

  Solved<V> call(std::uint32_t unknown, std::span<const V> args) const {
    std::uint64_t seed = system_->query(unknown, args);
    std::uint64_t wanted[1] = {seed};
    Solution<V> sol = alg_->solve(*system_, wanted, budget_);
    return sol.at(seed);
  }

  Solved<V> call(const std::string& unknown, std::span<const V> args) const {
    auto f = states_->rps().unknowns().find(unknown);
    if (!f) throw std::invalid_argument("no unknown named " + unknown);
    return call(f->index(), args);
  }

  /// Full solver output for one query (all demand-touched variables).
  Solution<V> solve_query(std::uint32_t unknown, std::span<const V> args) const {
    std::uint64_t seed = system_->query(unknown, args);
    std::uint64_t wanted[1] = {seed};
    return alg_->solve(*system_, wanted, budget_);
  }

  const InducedFlatEq<V>& system() const { return *system_; }
  const RpsStates& states() const { return *states_; }
  const Budget& budget() const { return budget_; }

 private:
  const ElgotAlgebra<V>* alg_;
  std::shared_ptr<const RpsStates> states_;
  std::shared_ptr<InducedFlatEq<V>> system_;
  Budget budget_;
};

template <class V>
Interpretation<V> interpret_rps(const ElgotAlgebra<V>& alg, const Rps& r, Budget b) {
  return Interpretation<V>(alg, r, b);
}

/// Compares evaluating the uninterpreted solution against the interpreted
/// solution on given input tuples (the two routes around the fundamental
/// triangle). Discrepancies are data, not errors.
struct FundamentalReport {
  std::size_t total = 0;
  std::size_t agreements = 0;  // within tol
  double max_discrepancy = 0.0;
  bool all_resolved = true;

  bool exact() const { return agreements == total && max_discrepancy == 0.0; }
};

template <class V>
FundamentalReport fundamental_check(const ElgotAlgebra<V>& alg, const Rps& r,
                                    std::uint32_t unknown,
                                    const std::vector<std::vector<V>>& tuples,
                                    const Budget& b, double tol) {
  std::vector<CoTree> solution = solve_uninterpreted(r);
  Interpretation<V> interp(alg, r, b);
  FundamentalReport rep;
  for (const auto& tuple : tuples) {
    std::span<const V> args(tuple);
    Solved<V> lhs = eval_cotree(alg, solution.at(unknown), args, b);
    Solved<V> rhs = interp.call(unknown, args);
    rep.total++;
    rep.all_resolved = rep.all_resolved && lhs.resolved && rhs.resolved;
    double d = alg.distance(lhs.value, rhs.value);
    rep.max_discrepancy = std::max(rep.max_discrepancy, d);
    if (d <= tol) rep.agreements++;
  }
  return rep;
}

// -- the law-testing harness ---------------------------------------------

struct LawReport {
  std::size_t functoriality_total = 0;
  std::size_t functoriality_failures = 0;
  std::size_t compositionality_total = 0;
  std::size_t compositionality_failures = 0;
  std::string first_counterexample;

  bool ok() const { return functoriality_failures == 0 && compositionality_failures == 0; }
};

namespace detail {

template <class V>
std::string show_table(const ElgotAlgebra<V>& alg, const FlatTable<V>& t) {
  std::ostringstream out;
  for (std::size_t x = 0; x < t.size(); ++x) {
    out << "x" << x << " ≈ ";
    if (t[x].is_param) {
      out << alg.show(t[x].param);
    } else {
      out << t[x].sym.name() << "(";
      for (std::size_t i = 0; i < t[x].args.size(); ++i)
        out << (i ? "," : "") << "x" << t[x].args[i];
      out << ")";
    }
    out << "; ";
  }
  return out.str();
}

template <class V>
FlatTable<V> random_system(const Signature& sig, std::size_t vars,
                           const std::function<V(std::mt19937_64&)>& sample,
                           std::mt19937_64& rng) {
  FlatTable<V> t;
  std::uniform_int_distribution<std::size_t> var_of(0, vars - 1);
  std::uniform_int_distribution<std::uint32_t> sym_of(0, sig.size() - 1);
  std::uniform_int_distribution<int> pct(0, 99);
  for (std::size_t x = 0; x < vars; ++x) {
    if (pct(rng) < 35) {
      t.push_back(FlatRow<V>::parameter(sample(rng)));
      continue;
    }
    OpSym f = sig.symbol(sym_of(rng));
    std::vector<std::uint64_t> args;
    for (std::uint32_t i = 0; i < f.arity(); ++i) args.push_back(var_of(rng));
    t.push_back(FlatRow<V>::flat(f, std::move(args)));
  }
  return t;
}

}  // namespace detail

/// Generates random flat systems and random morphisms of equations and
/// checks the two Elgot laws row-wise. Solutions are compared with the
/// algebra's metric at tolerance `tol`.
template <class V>
LawReport law_harness(const ElgotAlgebra<V>& alg,
                      const std::function<V(std::mt19937_64&)>& sample,
                      std::size_t samples, std::uint64_t seed, const Budget& b,
                      double tol) {
  const Signature& sig = alg.signature();
  std::mt19937_64 rng(seed);
  LawReport rep;

  auto all_vars = [](std::size_t n) {
    std::vector<std::uint64_t> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = i;
    return xs;
  };

  for (std::size_t round = 0; round < samples; ++round) {
    // Functoriality: build f on Y, pull e back along a surjective h, then
    // the solutions must satisfy e† = f† ∘ h.
    {
      std::uniform_int_distribution<std::size_t> ny_of(1, 4);
      std::size_t ny = ny_of(rng);
      std::uniform_int_distribution<std::size_t> nx_of(ny, 6);
      std::size_t nx = nx_of(rng);
      FlatTable<V> f = detail::random_system<V>(sig, ny, sample, rng);

      std::vector<std::uint64_t> h(nx);
      for (std::size_t x = 0; x < nx; ++x)
        h[x] = x < ny ? x : std::uniform_int_distribution<std::size_t>(0, ny - 1)(rng);
      std::vector<std::vector<std::uint64_t>> fiber(ny);
      for (std::size_t x = 0; x < nx; ++x) fiber[h[x]].push_back(x);

      FlatTable<V> e;
      for (std::size_t x = 0; x < nx; ++x) {
        const FlatRow<V>& fy = f[h[x]];
        if (fy.is_param) {
          e.push_back(fy);
          continue;
        }
        std::vector<std::uint64_t> args;
        for (auto y : fy.args) {
          const auto& pre = fiber[y];
          args.push_back(pre[std::uniform_int_distribution<std::size_t>(
              0, pre.size() - 1)(rng)]);
        }
        e.push_back(FlatRow<V>::flat(fy.sym, std::move(args)));
      }

      if (!is_morphism_of_equations(h, e, f, [](const V& a, const V& c) { return a == c; }))
        throw std::logic_error("harness generated a non-morphism");

      auto xs = all_vars(nx);
      auto ys = all_vars(ny);
      Solution<V> se = alg.solve(TableFlatEq<V>(e), xs, b);
      Solution<V> sf = alg.solve(TableFlatEq<V>(f), ys, b);
      rep.functoriality_total++;
      for (std::size_t x = 0; x < nx; ++x) {
        if (!alg.close(se.values.at(x), sf.values.at(h[x]), tol)) {
          rep.functoriality_failures++;
          if (rep.first_counterexample.empty()) {
            std::ostringstream out;
            out << "functoriality: e = " << detail::show_table(alg, e)
                << " f = " << detail::show_table(alg, f) << " at x" << x << ": "
                << alg.show(se.values.at(x)) << " vs "
                << alg.show(sf.values.at(h[x]));
            rep.first_counterexample = out.str();
          }
          break;
        }
      }
    }

    // Compositionality: (f† ▷ e)† = (f ⊞ e)† ∘ inl.
    {
      std::uniform_int_distribution<std::size_t> n_of(1, 3);
      std::size_t ny = n_of(rng), nx = n_of(rng);
      FlatTable<V> f = detail::random_system<V>(sig, ny, sample, rng);

      FlatTable<std::uint64_t> e;
      std::uniform_int_distribution<std::size_t> yvar(0, ny - 1), xvar(0, nx - 1);
      std::uniform_int_distribution<std::uint32_t> sym_of(0, sig.size() - 1);
      std::uniform_int_distribution<int> pct(0, 99);
      for (std::size_t x = 0; x < nx; ++x) {
        if (pct(rng) < 40) {
          e.push_back(FlatRow<std::uint64_t>::parameter(yvar(rng)));
          continue;
        }
        OpSym s = sig.symbol(sym_of(rng));
        std::vector<std::uint64_t> args;
        for (std::uint32_t i = 0; i < s.arity(); ++i) args.push_back(xvar(rng));
        e.push_back(FlatRow<std::uint64_t>::flat(s, std::move(args)));
      }

      auto ys = all_vars(ny);
      Solution<V> sf = alg.solve(TableFlatEq<V>(f), ys, b);
      FlatTable<V> renamed = rename_params<std::uint64_t, V>(
          e, [&](std::uint64_t y) { return sf.values.at(y); });
      auto xs = all_vars(nx);
      Solution<V> lhs = alg.solve(TableFlatEq<V>(renamed), xs, b);

      FlatTable<V> paired = pair_systems(f, e);
      Solution<V> rhs = alg.solve(TableFlatEq<V>(paired), all_vars(nx + ny), b);

      rep.compositionality_total++;
      for (std::size_t x = 0; x < nx; ++x) {
        if (!alg.close(lhs.values.at(x), rhs.values.at(x), tol)) {
          rep.compositionality_failures++;
          if (rep.first_counterexample.empty()) {
            std::ostringstream out;
            out << "compositionality: f = " << detail::show_table(alg, f)
                << " paired = " << detail::show_table(alg, paired) << " at x" << x
                << ": " << alg.show(lhs.values.at(x)) << " vs "
                << alg.show(rhs.values.at(x));
            rep.first_counterexample = out.str();
          }
          break;
        }
      }
    }
  }
  return rep;
}

}  // namespace treerec

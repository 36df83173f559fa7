#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "treerec/cotree.hpp"
#include "treerec/signature.hpp"

namespace treerec {

/// One equation x ≈ rhs of a flat system: either a single operation symbol
/// applied to variables, or a parameter of type P.
template <class P>
struct FlatRow {
  bool is_param = false;
  OpSym sym;
  std::vector<std::uint64_t> args;
  P param{};

  static FlatRow flat(OpSym f, std::vector<std::uint64_t> vars) {
    FlatRow r;
    r.sym = f;
    r.args = std::move(vars);
    return r;
  }
  static FlatRow parameter(P p) {
    FlatRow r;
    r.is_param = true;
    r.param = std::move(p);
    return r;
  }
};

template <class P>
using FlatTable = std::vector<FlatRow<P>>;

/// Explicit flat system solved in the space of trees: parameters are trees
/// whose Var leaves name the parameter object Y.
using TreeFlatSystem = FlatTable<CoTree>;

/// The unique solution per variable, realized as an unfolding over the
/// state space X + (states of the parameter trees).
std::vector<CoTree> solve_flat(const TreeFlatSystem& sys);

/// Finite equation system x ≈ t with arbitrary finite right-hand terms over
/// the signature; in a row, Var(i) leaves refer to system variables and
/// Param(y) leaves to parameters. Guardedness: no row is a bare Var leaf.
struct GuardedSystem {
  std::vector<PartialTerm> rows;
};

/// Introduces one fresh variable per proper subterm; fresh variables are
/// named by subterm path in `names` ("x1.0.2") for reproducible output.
/// Parameter leaves become Param rows carrying var(y). Throws naming the
/// offending variable if a row is a bare system variable.
TreeFlatSystem flatten_guarded(const GuardedSystem& g,
                               std::vector<std::string>* names = nullptr);

std::vector<CoTree> solve_guarded(const GuardedSystem& g);

/// h ▷ e — renames parameters, leaving flat rows untouched.
template <class A, class B, class Fn>
FlatTable<B> rename_params(const FlatTable<A>& e, Fn h) {
  FlatTable<B> out;
  out.reserve(e.size());
  for (const auto& r : e) {
    if (r.is_param) out.push_back(FlatRow<B>::parameter(h(r.param)));
    else out.push_back(FlatRow<B>::flat(r.sym, r.args));
  }
  return out;
}

/// f ⊞ e — simultaneous recursion. e : X → HX + Y has parameters that are
/// variables of f : Y → HY + P. The result lives on X + Y with X first;
/// Y-variable j appears as index |X| + j.
template <class P>
FlatTable<P> pair_systems(const FlatTable<P>& f, const FlatTable<std::uint64_t>& e) {
  const std::uint64_t nx = e.size();
  auto shifted = [&](const FlatRow<P>& r) {
    if (r.is_param) return r;
    std::vector<std::uint64_t> args;
    args.reserve(r.args.size());
    for (auto y : r.args) args.push_back(nx + y);
    return FlatRow<P>::flat(r.sym, std::move(args));
  };
  FlatTable<P> out;
  out.reserve(e.size() + f.size());
  for (const auto& r : e) {
    if (r.is_param) out.push_back(shifted(f.at(r.param)));
    else out.push_back(FlatRow<P>::flat(r.sym, r.args));
  }
  for (const auto& r : f) out.push_back(shifted(r));
  return out;
}

/// Is h : vars(e) → vars(f) a morphism of equations, i.e. does transport of
/// every row of e along h give the corresponding row of f? Parameters are
/// compared with `eq`.
template <class P, class Eq>
bool is_morphism_of_equations(const std::vector<std::uint64_t>& h,
                              const FlatTable<P>& e, const FlatTable<P>& f,
                              Eq eq) {
  if (h.size() != e.size()) return false;
  for (std::size_t x = 0; x < e.size(); ++x) {
    if (h[x] >= f.size()) return false;
    const auto& ex = e[x];
    const auto& fx = f[h[x]];
    if (ex.is_param != fx.is_param) return false;
    if (ex.is_param) {
      if (!eq(ex.param, fx.param)) return false;
      continue;
    }
    if (ex.sym != fx.sym || ex.args.size() != fx.args.size()) return false;
    for (std::size_t i = 0; i < ex.args.size(); ++i)
      if (h.at(ex.args[i]) != fx.args[i]) return false;
  }
  return true;
}

/// A flat equation morphism e : X → HX + A with parameters in a carrier A,
/// possibly demand-driven: X may be enumerated lazily, rhs is pure per
/// variable. Finite systems report their size.
template <class V>
class FlatEq {
 public:
  virtual ~FlatEq() = default;
  virtual FlatRow<V> rhs(std::uint64_t x) const = 0;
  virtual std::optional<std::size_t> var_count() const { return std::nullopt; }
};

template <class V>
class TableFlatEq final : public FlatEq<V> {
 public:
  explicit TableFlatEq(FlatTable<V> rows) : rows_(std::move(rows)) {}
  FlatRow<V> rhs(std::uint64_t x) const override { return rows_.at(x); }
  std::optional<std::size_t> var_count() const override { return rows_.size(); }
  const FlatTable<V>& rows() const { return rows_; }

 private:
  FlatTable<V> rows_;
};

/// Demand-driven version of ▷.
template <class A, class B>
class RenamedFlatEq final : public FlatEq<B> {
 public:
  RenamedFlatEq(std::shared_ptr<const FlatEq<A>> base, std::function<B(const A&)> h)
      : base_(std::move(base)), h_(std::move(h)) {}
  FlatRow<B> rhs(std::uint64_t x) const override {
    FlatRow<A> r = base_->rhs(x);
    if (r.is_param) return FlatRow<B>::parameter(h_(r.param));
    return FlatRow<B>::flat(r.sym, std::move(r.args));
  }
  std::optional<std::size_t> var_count() const override { return base_->var_count(); }

 private:
  std::shared_ptr<const FlatEq<A>> base_;
  std::function<B(const A&)> h_;
};

}  // namespace treerec

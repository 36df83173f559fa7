#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "treerec/elgot.hpp"
#include "treerec/kernels.hpp"

namespace treerec {

/// A contracting affine map of the line (dim 1, y ignored) or the plane.
struct AffineMap {
  kernels::Affine2 map;
  int dim = 1;

  static AffineMap line(double scale, double offset) {
    return {{scale, offset, 0.0, 0.0}, 1};
  }
  static AffineMap plane(double sx, double ox, double sy, double oy) {
    return {{sx, ox, sy, oy}, 2};
  }

  double contraction() const {
    return std::max(std::fabs(map.sx), dim == 2 ? std::fabs(map.sy) : 0.0);
  }
  /// The unique fixed point (each scale has modulus < 1).
  kernels::Point2 fixed_point() const;
};

/// A finite approximation of a non-empty compact set: points are kept in
/// canonical (sorted, deduplicated) order and `resolution` bounds the
/// Hausdorff distance to the set being approximated.
class PointSet {
 public:
  PointSet() = default;
  /// Canonicalizes; throws on an empty list.
  static PointSet of(std::vector<kernels::Point2> pts, int dim, double resolution);

  const std::vector<kernels::Point2>& points() const { return pts_; }
  int dim() const { return dim_; }
  double resolution() const { return res_; }
  std::size_t size() const { return pts_.size(); }
  bool valid() const { return !pts_.empty(); }

  PointSet with_resolution(double r) const;

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.dim_ == b.dim_ && a.res_ == b.res_ && a.pts_ == b.pts_;
  }

 private:
  std::vector<kernels::Point2> pts_;
  int dim_ = 1;
  double res_ = 0.0;
};

/// Hausdorff distance (OpenMP kernels); the serial reference is exposed for
/// the kernel-equivalence tests and the benchmark.
double hausdorff(const PointSet& a, const PointSet& b);
double hausdorff_serial_ref(const PointSet& a, const PointSet& b);

/// x[,y] per line, 12 significant digits, canonical order.
std::string to_csv(const PointSet& s);

/// One Banach iteration record: sweep number and maximal move.
struct TracePoint {
  std::uint64_t iteration;
  double residual;
};

/// An algebra on a complete metric space whose operations carry declared
/// contraction factors < 1. Flat systems are solved by Banach iteration
/// from the start element: the error after the stopping rule fires is at
/// most the budget's tol. Non-convergence within fuel is reported, not
/// hidden.
template <class V>
class CmsAlgebra final : public ElgotAlgebra<V> {
 public:
  using Op = std::function<V(std::span<const V>)>;

  CmsAlgebra(Signature sig, std::function<double(const V&, const V&)> metric, V start,
             double diameter)
      : sig_(std::move(sig)),
        ops_(sig_.size()),
        eps_(sig_.size(), 0.0),
        metric_(std::move(metric)),
        start_(std::move(start)),
        diameter_(diameter) {}

  /// Registers an operation with its contraction factor (must be < 1).
  void set_op(const std::string& name, double eps, Op op) {
    if (eps >= 1.0)
      throw std::invalid_argument("operation " + name +
                                  " must contract: factor " + std::to_string(eps));
    auto s = sig_.find(name);
    if (!s) throw std::invalid_argument("no symbol named " + name);
    ops_.at(s->index()) = std::move(op);
    eps_.at(s->index()) = eps;
    global_eps_ = 0.0;
    for (double e : eps_) global_eps_ = std::max(global_eps_, e);
  }

  void set_show(std::function<std::string(const V&)> show) { show_ = std::move(show); }
  void set_trace(std::vector<TracePoint>* sink) { trace_ = sink; }

  double contraction() const { return global_eps_; }
  const V& start() const { return start_; }

  const Signature& signature() const override { return sig_; }

  V apply(const OpSym& f, std::span<const V> args) const override {
    if (!sig_.owns(f))
      throw std::invalid_argument("symbol " + f.name() + " is not interpreted here");
    if (!ops_[f.index()])
      throw std::invalid_argument("no operation registered for " + f.name());
    return ops_[f.index()](args);
  }

  /// Jacobi sweeps s ↦ [a,A]∘(Hs+A)∘e from the start element. Stops when a
  /// sweep over a closed variable set moves everything by at most
  /// tol·(1−ε)/ε (then the returned iterate is within tol of the unique
  /// solution), or when the a-priori bound ε^k·diam reaches tol.
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
      cur.push_back(start_);
      return i;
    };
    for (auto x : wanted) discover(x);

    const double eps = global_eps_;
    const double move_limit = eps == 0.0 ? std::numeric_limits<double>::infinity()
                                         : b.tol * (1.0 - eps) / eps;
    double apriori = diameter_;
    bool converged = false;

    for (std::uint64_t iter = 0; iter < b.fuel && !converged; ++iter) {
      std::size_t known = ids.size();
      std::vector<V> next(known);
      double maxmove = 0.0;
      for (std::size_t i = 0; i < known; ++i) {
        FlatRow<V> row = rows[i];  // by value: discover() may grow `rows`
        if (row.is_param) {
          next[i] = row.param;
        } else {
          std::vector<V> args;
          args.reserve(row.args.size());
          for (auto a : row.args) {
            std::size_t j = discover(a);
            args.push_back(j < known ? cur[j] : start_);
          }
          next[i] = apply(row.sym, args);
        }
        maxmove = std::max(maxmove, metric_(next[i], cur[i]));
      }
      bool grew = ids.size() > known;
      next.resize(ids.size(), start_);
      cur = std::move(next);
      apriori *= eps;
      if (trace_) trace_->push_back({iter + 1, maxmove});
      converged = (!grew && maxmove <= move_limit) || apriori <= b.tol;
      if (ids.size() > b.state_cap) break;
    }

    Solution<V> out;
    out.converged = converged;
    for (std::size_t i = 0; i < ids.size(); ++i) out.values.emplace(ids[i], cur[i]);
    if (!converged)
      for (auto id : ids) out.unresolved.push_back(id);
    return out;
  }

  /// Evaluates deeper and deeper cuts with the start element below the cut;
  /// the error after depth k is at most ε^k · diameter.
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
      if (k == 0) return start_;
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
    double err = diameter_;
    V v = start_;
    for (std::uint64_t k = 1; k <= b.fuel; ++k) {
      v = eval(t, k);
      err *= global_eps_;
      if (err <= b.tol) return {v, true};
    }
    return {v, false};
  }

  double distance(const V& a, const V& b) const override { return metric_(a, b); }

  std::string show(const V& v) const override { return show_ ? show_(v) : "<value>"; }

 private:
  Signature sig_;
  std::vector<Op> ops_;
  std::vector<double> eps_;
  double global_eps_ = 0.0;
  std::function<double(const V&, const V&)> metric_;
  V start_;
  double diameter_;
  std::function<std::string(const V&)> show_;
  mutable std::vector<TracePoint>* trace_ = nullptr;
};

/// Per-query Banach iteration on the induced flat system; unique up to the
/// budget's tol by contraction.
template <class V>
Interpretation<V> interpret_rps_banach(const CmsAlgebra<V>& alg, const Rps& r,
                                       const Budget& b) {
  return Interpretation<V>(alg, r, b);
}

/// The set operation (A_1..A_n) ↦ ⋃ f_i[A_i] on point sets; contraction
/// factor is the largest factor of the maps, and resolutions propagate by
/// r ↦ max_i ε_i·r_i. All maps must genuinely contract.
CmsAlgebra<PointSet> ifs_algebra(const std::string& sym, std::vector<AffineMap> maps,
                                 double diameter = 2.0);

/// Applies ⋃ f_i[A_i] directly (the operation ifs_algebra interprets).
PointSet ifs_apply(const std::vector<AffineMap>& maps,
                   std::span<const PointSet> args);

/// Iterates x ≈ α(x,x) in the two-map algebra of x/3 and x/3 + 2/3 from
/// {0,1}; the result is within 3^-iters of the middle-thirds set.
PointSet cantor_set(std::uint32_t iters);

/// The canonical two Cantor maps and the three maps of the plane example
/// (thirds in x, one third in y).
std::vector<AffineMap> cantor_maps();
std::vector<AffineMap> plane_thirds_maps();

/// Distance between trees under the ε-lifted metric: structural difference
/// at depth k contributes ε^k, parameter distances are scaled by ε^depth,
/// everything capped at 1. Computes the level-(depth_cap) projection
/// distance, which is the supremum over all shallower levels.
double tree_distance(const CoTree& a, const CoTree& b, double eps,
                     std::uint32_t depth_cap,
                     const std::function<double(const Leaf&, const Leaf&)>& leaf_dist);

/// [0,1] with F(u,v) = (u+v)/4 and G(u) = sin(u)/2, both factor-1/2
/// contractions under the max metric.
CmsAlgebra<double> sin_interval_algebra();

}  // namespace treerec

#include "treerec/alg_cms.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace treerec {

kernels::Point2 AffineMap::fixed_point() const {
  // p = s·p + o per coordinate; |s| < 1
  double x = map.ox / (1.0 - map.sx);
  double y = dim == 2 ? map.oy / (1.0 - map.sy) : 0.0;
  return {x, y};
}

PointSet PointSet::of(std::vector<kernels::Point2> pts, int dim, double resolution) {
  if (pts.empty()) throw std::invalid_argument("point sets must be non-empty");
  if (dim != 1 && dim != 2) throw std::invalid_argument("dim must be 1 or 2");
  for (auto& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument("point coordinates must be finite");
    if (dim == 1) p.y = 0.0;
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  PointSet s;
  s.pts_ = std::move(pts);
  s.dim_ = dim;
  s.res_ = resolution;
  return s;
}

PointSet PointSet::with_resolution(double r) const {
  PointSet s = *this;
  s.res_ = r;
  return s;
}

double hausdorff(const PointSet& a, const PointSet& b) {
  double ab = kernels::directed_hausdorff_parallel(a.points(), b.points());
  double ba = kernels::directed_hausdorff_parallel(b.points(), a.points());
  return std::max(ab, ba);
}

double hausdorff_serial_ref(const PointSet& a, const PointSet& b) {
  double ab = kernels::directed_hausdorff_serial(a.points(), b.points());
  double ba = kernels::directed_hausdorff_serial(b.points(), a.points());
  return std::max(ab, ba);
}

namespace {

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::string to_csv(const PointSet& s) {
  std::string out;
  for (const auto& p : s.points()) {
    out += fmt12(p.x);
    if (s.dim() == 2) {
      out += ",";
      out += fmt12(p.y);
    }
    out += "\n";
  }
  return out;
}

PointSet ifs_apply(const std::vector<AffineMap>& maps, std::span<const PointSet> args) {
  if (args.size() != maps.size())
    throw std::invalid_argument("one argument set per map");
  int dim = maps.front().dim;
  std::vector<kernels::Point2> pts;
  std::size_t total = 0;
  for (const auto& a : args) total += a.size();
  pts.resize(total);
  std::size_t at = 0;
  double res = 0.0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    kernels::apply_affine_parallel(maps[i].map, args[i].points(),
                                   std::span<kernels::Point2>(pts).subspan(at));
    at += args[i].size();
    res = std::max(res, maps[i].contraction() * args[i].resolution());
  }
  return PointSet::of(std::move(pts), dim, res);
}

CmsAlgebra<PointSet> ifs_algebra(const std::string& sym, std::vector<AffineMap> maps,
                                 double diameter) {
  if (maps.empty()) throw std::invalid_argument("an IFS needs at least one map");
  int dim = maps.front().dim;
  double eps = 0.0;
  for (const auto& m : maps) {
    if (m.dim != dim) throw std::invalid_argument("all maps must share a dimension");
    if (m.contraction() >= 1.0)
      throw std::invalid_argument("IFS maps must contract (factor < 1)");
    eps = std::max(eps, m.contraction());
  }

  Signature sig = Signature::make({{sym, static_cast<std::uint32_t>(maps.size())}});
  // start at the fixed points of the maps: a 1-step-consistent seed
  std::vector<kernels::Point2> seed;
  seed.reserve(maps.size());
  for (const auto& m : maps) seed.push_back(m.fixed_point());
  PointSet start = PointSet::of(std::move(seed), dim, diameter);

  CmsAlgebra<PointSet> alg(
      sig, [](const PointSet& a, const PointSet& b) { return hausdorff(a, b); },
      std::move(start), diameter);
  alg.set_op(sym, eps, [maps](std::span<const PointSet> args) {
    return ifs_apply(maps, args);
  });
  alg.set_show([](const PointSet& s) {
    return "{" + std::to_string(s.size()) + " points, r=" + fmt12(s.resolution()) + "}";
  });
  return alg;
}

std::vector<AffineMap> cantor_maps() {
  return {AffineMap::line(1.0 / 3.0, 0.0), AffineMap::line(1.0 / 3.0, 2.0 / 3.0)};
}

std::vector<AffineMap> plane_thirds_maps() {
  return {AffineMap::plane(1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0),
          AffineMap::plane(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0),
          AffineMap::plane(1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 0.0)};
}

PointSet cantor_set(std::uint32_t iters) {
  auto maps = cantor_maps();
  PointSet s = PointSet::of({{0.0, 0.0}, {1.0, 0.0}}, 1, 1.0);
  for (std::uint32_t k = 0; k < iters; ++k) {
    PointSet args[2] = {s, s};
    s = ifs_apply(maps, args);
  }
  return s;
}

double tree_distance(const CoTree& a, const CoTree& b, double eps,
                     std::uint32_t depth_cap,
                     const std::function<double(const Leaf&, const Leaf&)>& leaf_dist) {
  struct Key {
    const void* ea;
    std::uint64_t sa;
    const void* eb;
    std::uint64_t sb;
    std::uint32_t k;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = std::hash<const void*>{}(k.ea);
      h = h * 1099511628211ULL + k.sa;
      h = h * 1099511628211ULL + std::hash<const void*>{}(k.eb);
      h = h * 1099511628211ULL + k.sb;
      return h * 1099511628211ULL + k.k;
    }
  };
  std::unordered_map<Key, double, KeyHash> memo;

  std::function<double(const CoTree&, const CoTree&, std::uint32_t)> level =
      [&](const CoTree& s, const CoTree& t, std::uint32_t k) -> double {
    if (k == 0) return 0.0;  // the level-0 projection identifies everything
    auto ka = s.state_key(), kb = t.state_key();
    if (ka == kb) return 0.0;
    Key key{ka.first, ka.second, kb.first, kb.second, k};
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const Layer& ls = s.layer();
    const Layer& lt = t.layer();
    double d;
    if (ls.is_leaf() && lt.is_leaf()) {
      d = std::min(leaf_dist(*ls.leaf, *lt.leaf), 1.0);
    } else if (ls.is_leaf() != lt.is_leaf() || ls.sym != lt.sym) {
      d = 1.0;  // structural difference at this level
    } else {
      double worst = 0.0;
      for (std::size_t i = 0; i < ls.children.size(); ++i)
        worst = std::max(worst, level(ls.children[i], lt.children[i], k - 1));
      d = eps * worst;
    }
    memo.emplace(key, d);
    return d;
  };
  return level(a, b, depth_cap);
}

CmsAlgebra<double> sin_interval_algebra() {
  Signature sig = Signature::make({{"F", 2}, {"G", 1}});
  CmsAlgebra<double> alg(
      sig, [](double a, double b) { return std::fabs(a - b); }, 0.0, 1.0);
  alg.set_op("F", 0.5,
             [](std::span<const double> a) { return (a[0] + a[1]) / 4.0; });
  alg.set_op("G", 0.5, [](std::span<const double> a) { return std::sin(a[0]) / 2.0; });
  alg.set_show([](double v) { return fmt12(v); });
  return alg;
}

}  // namespace treerec

#include "treerec/cotree.hpp"

#include <deque>
#include <sstream>
#include <stdexcept>

namespace treerec {

const Layer& TreeEngine::layer_of(std::uint64_t state) const {
  {
    std::lock_guard<std::mutex> g(mu_);
    auto it = memo_.find(state);
    if (it != memo_.end()) return it->second;
  }
  Layer l = expand(state);  // outside the lock: expand may force other states
  std::lock_guard<std::mutex> g(mu_);
  auto [it, fresh] = memo_.emplace(state, std::move(l));
  (void)fresh;
  return it->second;
}

const Layer& CoTree::layer() const {
  if (!eng_) throw std::logic_error("layer() on an empty CoTree");
  return eng_->layer_of(state_);
}

namespace {

class LeafEngine final : public TreeEngine {
 public:
  explicit LeafEngine(Leaf l) : leaf_(l) {}

 protected:
  Layer expand(std::uint64_t) const override {
    Layer l;
    l.leaf = leaf_;
    return l;
  }

 private:
  Leaf leaf_;
};

class NodeEngine final : public TreeEngine {
 public:
  NodeEngine(OpSym f, std::vector<CoTree> children)
      : sym_(f), children_(std::move(children)) {}

 protected:
  Layer expand(std::uint64_t) const override {
    Layer l;
    l.sym = sym_;
    l.children = children_;
    return l;
  }

 private:
  OpSym sym_;
  std::vector<CoTree> children_;
};

// Flattened finite term; states are node indices.
class TermGraphEngine final : public TreeEngine {
 public:
  struct Cell {
    std::optional<Leaf> leaf;
    OpSym sym;
    std::vector<std::uint64_t> children;
  };

  std::uint64_t add(const PartialTerm& t) {
    switch (t.tag) {
      case PartialTerm::Tag::Bottom:
        throw std::invalid_argument("finite terms with ⊥ have no tree embedding");
      case PartialTerm::Tag::Var:
        cells_.push_back({Leaf::var(t.leaf), OpSym{}, {}});
        return cells_.size() - 1;
      case PartialTerm::Tag::Param:
        cells_.push_back({Leaf::param(t.leaf), OpSym{}, {}});
        return cells_.size() - 1;
      case PartialTerm::Tag::Node: {
        std::vector<std::uint64_t> kids;
        kids.reserve(t.children.size());
        for (const auto& c : t.children) kids.push_back(add(c));
        cells_.push_back({std::nullopt, t.sym, std::move(kids)});
        return cells_.size() - 1;
      }
    }
    throw std::logic_error("unreachable");
  }

 protected:
  Layer expand(std::uint64_t state) const override {
    const Cell& c = cells_.at(state);
    Layer l;
    l.leaf = c.leaf;
    l.sym = c.sym;
    auto self = shared_from_this();
    for (auto k : c.children) l.children.emplace_back(self, k);
    return l;
  }

 private:
  std::vector<Cell> cells_;
};

}  // namespace

CoTree var(std::uint64_t v) {
  return CoTree(std::make_shared<LeafEngine>(Leaf::var(v)), 0);
}

CoTree param_leaf(std::uint64_t p) {
  return CoTree(std::make_shared<LeafEngine>(Leaf::param(p)), 0);
}

CoTree node(OpSym f, std::vector<CoTree> children) {
  if (children.size() != f.arity())
    throw std::invalid_argument("arity mismatch for symbol " + f.name());
  return CoTree(std::make_shared<NodeEngine>(f, std::move(children)), 0);
}

CoTree from_term(const PartialTerm& t) {
  auto eng = std::make_shared<TermGraphEngine>();
  std::uint64_t root = eng->add(t);
  return CoTree(eng, root);
}

PartialTerm cut(const CoTree& t, std::uint32_t depth) {
  if (depth == 0) return PartialTerm::bottom();
  const Layer& l = t.layer();
  if (l.leaf) {
    return l.leaf->is_var() ? PartialTerm::var(l.leaf->id)
                            : PartialTerm::param(l.leaf->id);
  }
  std::vector<PartialTerm> kids;
  kids.reserve(l.children.size());
  for (const CoTree& c : l.children) kids.push_back(cut(c, depth - 1));
  return PartialTerm::node(l.sym, std::move(kids));
}

bool cut_equal(const CoTree& a, const CoTree& b, std::uint32_t depth) {
  if (depth == 0) return true;
  if (a.state_key() == b.state_key()) return true;
  const Layer& la = a.layer();
  const Layer& lb = b.layer();
  if (la.is_leaf() != lb.is_leaf()) return false;
  if (la.is_leaf()) return *la.leaf == *lb.leaf;
  if (la.sym != lb.sym) return false;
  for (std::size_t i = 0; i < la.children.size(); ++i)
    if (!cut_equal(la.children[i], lb.children[i], depth - 1)) return false;
  return true;
}

// -- first-order substitution ------------------------------------------

namespace {

struct StateKeyHash {
  std::size_t operator()(const std::pair<const TreeEngine*, std::uint64_t>& k) const {
    return std::hash<const void*>{}(k.first) ^
           (k.second * 0x9e3779b97f4a7c15ULL);
  }
};

class SubstEngine final : public TreeEngine {
 public:
  explicit SubstEngine(VarSubst s) : subst_(std::move(s)) {}

  std::uint64_t intern(const CoTree& t) const {
    std::lock_guard<std::mutex> g(mu_);
    auto key = t.state_key();
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    std::uint64_t id = sources_.size();
    sources_.push_back(t);
    ids_.emplace(key, id);
    return id;
  }

 protected:
  Layer expand(std::uint64_t state) const override {
    CoTree src;
    {
      std::lock_guard<std::mutex> g(mu_);
      src = sources_[state];
    }
    const Layer& l = src.layer();
    if (l.leaf) {
      if (l.leaf->is_var()) {
        if (auto target = subst_(l.leaf->id)) return target->layer();
      }
      Layer out;
      out.leaf = l.leaf;
      return out;
    }
    Layer out;
    out.sym = l.sym;
    auto self = shared_from_this();
    out.children.reserve(l.children.size());
    for (const CoTree& c : l.children) out.children.emplace_back(self, intern(c));
    return out;
  }

 private:
  VarSubst subst_;
  mutable std::mutex mu_;
  mutable std::vector<CoTree> sources_;
  mutable std::unordered_map<std::pair<const TreeEngine*, std::uint64_t>,
                             std::uint64_t, StateKeyHash>
      ids_;
};

}  // namespace

CoTree subst(const CoTree& t, VarSubst s) {
  auto eng = std::make_shared<SubstEngine>(std::move(s));
  return CoTree(eng, eng->intern(t));
}

CoTree subst(const CoTree& t, const std::vector<CoTree>& by_index) {
  return subst(t, [by_index](std::uint64_t v) -> std::optional<CoTree> {
    if (v < by_index.size() && by_index[v].valid()) return by_index[v];
    return std::nullopt;
  });
}

// -- second-order substitution -----------------------------------------

SecondOrderMap::SecondOrderMap(Signature source, std::vector<CoTree> images)
    : source_(std::move(source)), images_(std::move(images)) {
  if (images_.size() != source_.size())
    throw std::invalid_argument("second-order map must cover every symbol");
  for (std::uint32_t i = 0; i < images_.size(); ++i) {
    const Layer& l = images_[i].layer();
    if (l.is_leaf() && l.leaf->is_var())
      throw std::invalid_argument("erasing image for symbol " +
                                  source_.symbol(i).name() +
                                  ": root of an image must be a node");
  }
}

SecondOrderMap SecondOrderMap::identity(const Signature& sig) {
  std::vector<CoTree> images;
  for (std::uint32_t i = 0; i < sig.size(); ++i) {
    OpSym f = sig.symbol(i);
    std::vector<CoTree> vars_;
    for (std::uint32_t j = 0; j < f.arity(); ++j) vars_.push_back(var(j));
    images.push_back(node(f, std::move(vars_)));
  }
  return SecondOrderMap(sig, std::move(images));
}

const CoTree& SecondOrderMap::image(const OpSym& f) const {
  if (!source_.owns(f))
    throw std::invalid_argument("symbol " + f.name() + " not in the source signature");
  return images_[f.index()];
}

namespace {

// States are either positions of the source tree (everything below still to
// be rewritten) or positions inside an image tree together with the states
// standing for its variables.
class SecondOrderEngine final : public TreeEngine {
 public:
  explicit SecondOrderEngine(SecondOrderMap m) : map_(std::move(m)) {}

  struct Entry {
    bool in_image = false;
    CoTree tree;                        // source position or image position
    std::vector<std::uint64_t> env;     // image only: states for vars 0..n-1
  };

  std::uint64_t intern(bool in_image, const CoTree& t,
                       std::vector<std::uint64_t> env) const {
    Key key{in_image, t.state_key(), env};
    std::lock_guard<std::mutex> g(mu_);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    std::uint64_t id = entries_.size();
    entries_.push_back(Entry{in_image, t, std::move(env)});
    ids_.emplace(std::move(key), id);
    return id;
  }

 protected:
  Layer expand(std::uint64_t state) const override {
    Entry e;
    {
      std::lock_guard<std::mutex> g(mu_);
      e = entries_[state];
    }
    const Layer& l = e.tree.layer();
    if (!e.in_image) {
      if (l.leaf) {
        Layer out;
        out.leaf = l.leaf;
        return out;
      }
      std::vector<std::uint64_t> env;
      env.reserve(l.children.size());
      for (const CoTree& c : l.children) env.push_back(intern(false, c, {}));
      return image_layer(l.sym, std::move(env));
    }
    // inside an image: splice it literally, plugging env states for variables
    if (l.leaf) {
      if (l.leaf->is_var()) {
        if (l.leaf->id >= e.env.size())
          throw std::invalid_argument("image tree uses variable " +
                                      std::to_string(l.leaf->id) +
                                      " beyond the symbol arity");
        return layer_of(e.env[l.leaf->id]);  // bounce to the plugged state
      }
      Layer out;
      out.leaf = l.leaf;
      return out;
    }
    Layer out;
    out.sym = l.sym;
    auto self = shared_from_this();
    for (const CoTree& c : l.children)
      out.children.emplace_back(self, intern(true, c, e.env));
    return out;
  }

 private:
  Layer image_layer(const OpSym& f, std::vector<std::uint64_t> env) const {
    const Layer& il = map_.image(f).layer();
    if (il.is_leaf()) {
      if (il.leaf->is_var()) {
        if (il.leaf->id >= env.size())
          throw std::invalid_argument("image root variable out of range");
        return layer_of(env[il.leaf->id]);  // cannot happen for non-erasing maps
      }
      Layer out;
      out.leaf = il.leaf;
      return out;
    }
    Layer out;
    out.sym = il.sym;
    auto self = shared_from_this();
    for (const CoTree& c : il.children)
      out.children.emplace_back(self, intern(true, c, env));
    return out;
  }

  struct Key {
    bool in_image;
    std::pair<const TreeEngine*, std::uint64_t> pos;
    std::vector<std::uint64_t> env;
    bool operator==(const Key& o) const {
      return in_image == o.in_image && pos == o.pos && env == o.env;
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = StateKeyHash{}(k.pos) ^ (k.in_image ? 0x5bd1e995u : 0u);
      for (auto v : k.env) h = h * 1099511628211ULL + v;
      return h;
    }
  };

  SecondOrderMap map_;
  mutable std::mutex mu_;
  mutable std::vector<Entry> entries_;
  mutable std::unordered_map<Key, std::uint64_t, KeyHash> ids_;
};

}  // namespace

CoTree second_order_subst(const CoTree& t, const SecondOrderMap& m) {
  auto eng = std::make_shared<SecondOrderEngine>(m);
  return CoTree(eng, eng->intern(false, t, {}));
}

// -- bisimilarity -------------------------------------------------------

namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  std::uint32_t add() {
    parent.push_back(parent.size());
    return parent.size() - 1;
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

Bisim bisimilar(const CoTree& a, const CoTree& b, std::size_t state_cap) {
  using Key = std::pair<const TreeEngine*, std::uint64_t>;
  std::unordered_map<Key, std::uint32_t, StateKeyHash> ids;
  std::vector<CoTree> trees;  // keeps engines alive
  UnionFind uf;

  auto intern = [&](const CoTree& t) -> std::uint32_t {
    auto key = t.state_key();
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    std::uint32_t id = uf.add();
    ids.emplace(key, id);
    trees.push_back(t);
    return id;
  };

  std::deque<std::pair<std::uint32_t, std::uint32_t>> work;
  work.emplace_back(intern(a), intern(b));
  while (!work.empty()) {
    if (ids.size() > state_cap) return Bisim::Undecided;
    auto [x, y] = work.front();
    work.pop_front();
    if (uf.find(x) == uf.find(y)) continue;
    const Layer& lx = trees[x].layer();
    const Layer& ly = trees[y].layer();
    if (lx.is_leaf() != ly.is_leaf()) return Bisim::Distinct;
    if (lx.is_leaf()) {
      if (!(*lx.leaf == *ly.leaf)) return Bisim::Distinct;
      uf.unite(x, y);
      continue;
    }
    if (lx.sym != ly.sym) return Bisim::Distinct;
    uf.unite(x, y);
    for (std::size_t i = 0; i < lx.children.size(); ++i)
      work.emplace_back(intern(lx.children[i]), intern(ly.children[i]));
  }
  return Bisim::Equal;
}

// -- DOT export ---------------------------------------------------------

namespace {

std::string leaf_label(const Leaf& l, const std::vector<std::string>& vars,
                       const std::vector<std::string>& params) {
  if (l.is_var())
    return l.id < vars.size() ? vars[l.id] : "v" + std::to_string(l.id);
  return l.id < params.size() ? params[l.id] : "p" + std::to_string(l.id);
}

void dot_term(const PartialTerm& t, const std::vector<std::string>& vars,
              const std::vector<std::string>& params, std::size_t& next,
              std::ostringstream& out) {
  std::size_t me = next++;
  std::string label;
  switch (t.tag) {
    case PartialTerm::Tag::Bottom: label = "⊥"; break;
    case PartialTerm::Tag::Node: label = t.sym.name(); break;
    default: label = leaf_label(t.tag == PartialTerm::Tag::Var
                                    ? Leaf::var(t.leaf)
                                    : Leaf::param(t.leaf),
                                vars, params);
  }
  out << "  n" << me << " [label=\"" << label << "\"];\n";
  for (const auto& c : t.children) {
    std::size_t child = next;
    dot_term(c, vars, params, next, out);
    out << "  n" << me << " -> n" << child << ";\n";
  }
}

}  // namespace

std::string dot_of_cut(const PartialTerm& t, const std::vector<std::string>& var_names,
                       const std::vector<std::string>& param_names) {
  std::ostringstream out;
  out << "digraph cut {\n  node [shape=plaintext];\n";
  std::size_t next = 0;
  dot_term(t, var_names, param_names, next, out);
  out << "}\n";
  return out.str();
}

std::string dot_of_state_graph(const CoTree& t, std::size_t state_cap,
                               const std::vector<std::string>& var_names,
                               const std::vector<std::string>& param_names) {
  using Key = std::pair<const TreeEngine*, std::uint64_t>;
  std::unordered_map<Key, std::size_t, StateKeyHash> ids;
  std::vector<CoTree> order;
  std::deque<CoTree> work;
  bool truncated = false;

  auto intern = [&](const CoTree& u) -> std::optional<std::size_t> {
    auto it = ids.find(u.state_key());
    if (it != ids.end()) return it->second;
    if (ids.size() >= state_cap) {
      truncated = true;
      return std::nullopt;
    }
    std::size_t id = ids.size();
    ids.emplace(u.state_key(), id);
    order.push_back(u);
    work.push_back(u);
    return id;
  };

  std::ostringstream edges;
  intern(t);
  while (!work.empty()) {
    CoTree u = work.front();
    work.pop_front();
    std::size_t me = ids[u.state_key()];
    const Layer& l = u.layer();
    if (l.is_leaf()) continue;
    for (std::size_t i = 0; i < l.children.size(); ++i) {
      if (auto c = intern(l.children[i]))
        edges << "  s" << me << " -> s" << *c << " [label=\"" << i << "\"];\n";
    }
  }

  std::ostringstream out;
  out << "digraph states {\n  node [shape=ellipse];\n";
  if (truncated) out << "  // truncated at " << state_cap << " states\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Layer& l = order[i].layer();
    std::string label =
        l.is_leaf() ? leaf_label(*l.leaf, var_names, param_names) : l.sym.name();
    out << "  s" << i << " [label=\"" << label << "\"];\n";
  }
  out << edges.str() << "}\n";
  return out.str();
}

}  // namespace treerec

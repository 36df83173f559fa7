#include "treerec/rps.hpp"

#include <stdexcept>

namespace treerec {

namespace {

void validate_rhs_term(const PartialTerm& t, const Signature& sum, std::uint32_t arity,
                       const std::string& who) {
  switch (t.tag) {
    case PartialTerm::Tag::Bottom:
      throw std::invalid_argument("rhs of " + who + " contains ⊥");
    case PartialTerm::Tag::Param:
      throw std::invalid_argument("rhs of " + who + " contains a parameter leaf");
    case PartialTerm::Tag::Var:
      if (t.leaf >= arity)
        throw std::invalid_argument("rhs of " + who + " uses variable " +
                                    std::to_string(t.leaf) + " beyond its arity");
      return;
    case PartialTerm::Tag::Node:
      if (!sum.owns(t.sym))
        throw std::invalid_argument("rhs of " + who + " uses foreign symbol " +
                                    t.sym.name());
      for (const auto& c : t.children) validate_rhs_term(c, sum, arity, who);
      return;
  }
}

}  // namespace

Rps Rps::from_terms(SignatureSum sum, std::vector<PartialTerm> rhs_terms) {
  if (rhs_terms.size() != sum.right().size())
    throw std::invalid_argument("every unknown needs exactly one right-hand side");
  std::vector<CoTree> trees;
  trees.reserve(rhs_terms.size());
  for (std::uint32_t k = 0; k < rhs_terms.size(); ++k) {
    validate_rhs_term(rhs_terms[k], sum.sum(), sum.right().symbol(k).arity(),
                      sum.right().symbol(k).name());
    trees.push_back(from_term(rhs_terms[k]));
  }
  return Rps(std::move(sum), std::move(trees), std::move(rhs_terms));
}

Rps Rps::from_trees(SignatureSum sum, std::vector<CoTree> rhs_trees) {
  if (rhs_trees.size() != sum.right().size())
    throw std::invalid_argument("every unknown needs exactly one right-hand side");
  for (const auto& t : rhs_trees)
    if (!t.valid()) throw std::invalid_argument("empty right-hand side tree");
  return Rps(std::move(sum), std::move(rhs_trees), {});
}

std::string GuardednessError::message() const {
  std::string out =
      "scheme is not guarded (Greibach normal form): every right-hand side must "
      "start with a given symbol; offending unknowns:";
  for (const auto& f : offending) out += " " + f.name();
  return out;
}

std::variant<GuardedWitness, GuardednessError> check_guarded(const Rps& r) {
  std::vector<OpSym> roots;
  GuardednessError err;
  for (std::uint32_t k = 0; k < r.unknowns().size(); ++k) {
    const Layer& l = r.rhs_tree(k).layer();
    if (l.is_leaf() || !r.sum().from_left(l.sym)) {
      err.offending.push_back(r.unknowns().symbol(k));
      continue;
    }
    roots.push_back(r.sum().project(l.sym));
  }
  if (!err.offending.empty()) return err;
  return GuardedWitness(std::move(roots));
}

GuardedWitness require_guarded(const Rps& r) {
  auto res = check_guarded(r);
  if (auto* err = std::get_if<GuardednessError>(&res))
    throw std::invalid_argument(err->message());
  return std::get<GuardedWitness>(std::move(res));
}

// -- state space ---------------------------------------------------------

RpsStates::RpsStates(Rps r, GuardedWitness w)
    : rps_(std::move(r)), witness_(std::move(w)) {}

std::shared_ptr<RpsStates> RpsStates::make(Rps r) {
  GuardedWitness w = require_guarded(r);
  return std::shared_ptr<RpsStates>(new RpsStates(std::move(r), std::move(w)));
}

namespace {

std::size_t hash_mix(std::size_t h, std::uint64_t v) {
  return h * 1099511628211ULL ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6));
}

}  // namespace

RpsStates::StateId RpsStates::intern(Entry e) const {
  std::size_t h = hash_mix(static_cast<std::size_t>(e.kind) + 1, e.head);
  for (auto x : e.xs) h = hash_mix(h, x);
  if (e.pos.valid()) {
    auto key = e.pos.state_key();
    h = hash_mix(h, reinterpret_cast<std::uintptr_t>(key.first));
    h = hash_mix(h, key.second);
  }
  auto same = [&](const Entry& a) {
    if (a.kind != e.kind || a.head != e.head || a.xs != e.xs) return false;
    if (a.pos.valid() != e.pos.valid()) return false;
    return !a.pos.valid() || a.pos.state_key() == e.pos.state_key();
  };
  std::lock_guard<std::mutex> g(mu_);
  auto& bucket = buckets_[h];
  for (auto id : bucket)
    if (same(entries_[id])) return id;
  StateId id = entries_.size();
  entries_.push_back(std::move(e));
  bucket.push_back(id);
  return id;
}

RpsStates::StateId RpsStates::var_state(std::uint64_t v) const {
  return intern(Entry{Kind::Var, v, {}, {}});
}

RpsStates::StateId RpsStates::param_state(std::uint64_t slot) const {
  return intern(Entry{Kind::Param, slot, {}, {}});
}

RpsStates::StateId RpsStates::apply(OpSym f, std::vector<StateId> args) const {
  if (!rps_.sum().sum().owns(f))
    throw std::invalid_argument("symbol " + f.name() + " is not a given or unknown");
  if (args.size() != f.arity())
    throw std::invalid_argument("arity mismatch for symbol " + f.name());
  return intern(Entry{Kind::Term, f.index(), std::move(args), {}});
}

RpsStates::StateId RpsStates::of_term(const PartialTerm& t,
                                      std::span<const StateId> env) const {
  switch (t.tag) {
    case PartialTerm::Tag::Bottom:
      throw std::invalid_argument("terms with ⊥ have no state");
    case PartialTerm::Tag::Var:
      if (!env.empty()) {
        if (t.leaf >= env.size())
          throw std::invalid_argument("variable beyond the environment");
        return env[t.leaf];
      }
      return var_state(t.leaf);
    case PartialTerm::Tag::Param:
      return param_state(t.leaf);
    case PartialTerm::Tag::Node: {
      std::vector<StateId> args;
      args.reserve(t.children.size());
      for (const auto& c : t.children) args.push_back(of_term(c, env));
      return apply(t.sym, std::move(args));
    }
  }
  throw std::logic_error("unreachable");
}

CoTree RpsStates::tree(StateId s) const {
  return CoTree(std::static_pointer_cast<const TreeEngine>(shared_from_this()), s);
}

Layer RpsStates::node_layer(const OpSym& given, const std::vector<StateId>& children) const {
  Layer l;
  l.sym = given;
  auto self = shared_from_this();
  l.children.reserve(children.size());
  for (auto c : children) l.children.emplace_back(self, c);
  return l;
}

Layer RpsStates::apply_unknown(std::uint32_t unknown,
                               const std::vector<StateId>& args) const {
  const Layer& l = rps_.rhs_tree(unknown).layer();
  // guardedness: the root is a given symbol
  std::vector<StateId> kids;
  kids.reserve(l.children.size());
  for (const CoTree& u : l.children)
    kids.push_back(intern(Entry{Kind::Img, 0, args, u}));
  return node_layer(rps_.sum().project(l.sym), kids);
}

Layer RpsStates::expand(std::uint64_t state) const {
  Entry e;
  {
    std::lock_guard<std::mutex> g(mu_);
    e = entries_[state];
  }
  switch (e.kind) {
    case Kind::Var: {
      Layer l;
      l.leaf = Leaf::var(e.head);
      return l;
    }
    case Kind::Param: {
      Layer l;
      l.leaf = Leaf::param(e.head);
      return l;
    }
    case Kind::Term: {
      OpSym f = rps_.sum().sum().symbol(static_cast<std::uint32_t>(e.head));
      if (rps_.sum().from_left(f)) return node_layer(rps_.sum().project(f), e.xs);
      return apply_unknown(rps_.sum().project(f).index(), e.xs);
    }
    case Kind::Img: {
      const Layer& l = e.pos.layer();
      if (l.is_leaf()) {
        if (!l.leaf->is_var())
          throw std::invalid_argument("right-hand trees must not contain parameter leaves");
        if (l.leaf->id >= e.xs.size())
          throw std::invalid_argument("right-hand tree uses a variable beyond the arity");
        return layer_of(e.xs[l.leaf->id]);
      }
      if (!rps_.sum().sum().owns(l.sym))
        throw std::invalid_argument("right-hand tree uses foreign symbol " + l.sym.name());
      std::vector<StateId> kids;
      kids.reserve(l.children.size());
      for (const CoTree& u : l.children)
        kids.push_back(intern(Entry{Kind::Img, 0, e.xs, u}));
      if (rps_.sum().from_left(l.sym))
        return node_layer(rps_.sum().project(l.sym), kids);
      return apply_unknown(rps_.sum().project(l.sym).index(), kids);
    }
  }
  throw std::logic_error("unreachable");
}

// -- solutions -----------------------------------------------------------

std::vector<CoTree> solve_uninterpreted(const Rps& r) {
  auto states = RpsStates::make(r);
  std::vector<CoTree> out;
  out.reserve(r.unknowns().size());
  for (std::uint32_t k = 0; k < r.unknowns().size(); ++k) {
    OpSym f = r.sum().inject_right(r.unknowns().symbol(k));
    std::vector<RpsStates::StateId> args;
    for (std::uint32_t i = 0; i < f.arity(); ++i) args.push_back(states->var_state(i));
    out.push_back(states->tree(states->apply(f, std::move(args))));
  }
  return out;
}

CoTree apply_solution(const Rps& r, const PartialTerm& t) {
  auto states = RpsStates::make(r);
  return states->tree(states->of_term(t));
}

SecondOrderMap solution_map(const Rps& r, const std::vector<CoTree>& solution) {
  if (solution.size() != r.unknowns().size())
    throw std::invalid_argument("solution must cover every unknown");
  std::vector<CoTree> images;
  const Signature& sum = r.sum().sum();
  for (std::uint32_t i = 0; i < sum.size(); ++i) {
    OpSym s = sum.symbol(i);
    if (r.sum().from_left(s)) {
      OpSym plain = r.sum().project(s);
      std::vector<CoTree> vars_;
      for (std::uint32_t j = 0; j < plain.arity(); ++j) vars_.push_back(var(j));
      images.push_back(node(plain, std::move(vars_)));
    } else {
      images.push_back(solution.at(r.sum().project(s).index()));
    }
  }
  return SecondOrderMap(sum, std::move(images));
}

}  // namespace treerec

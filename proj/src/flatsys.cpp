#include "treerec/flatsys.hpp"

#include <stdexcept>
#include <string>

namespace treerec {

namespace {

class FlatSolveEngine final : public TreeEngine {
 public:
  explicit FlatSolveEngine(TreeFlatSystem sys) : sys_(std::move(sys)) {}

 protected:
  Layer expand(std::uint64_t state) const override {
    const auto& row = sys_.at(state);
    if (row.is_param) return row.param.layer();  // splice the parameter tree
    Layer l;
    l.sym = row.sym;
    auto self = shared_from_this();
    l.children.reserve(row.args.size());
    for (auto x : row.args) l.children.emplace_back(self, x);
    return l;
  }

 private:
  TreeFlatSystem sys_;
};

}  // namespace

std::vector<CoTree> solve_flat(const TreeFlatSystem& sys) {
  for (std::size_t x = 0; x < sys.size(); ++x) {
    const auto& row = sys[x];
    if (row.is_param) {
      if (!row.param.valid())
        throw std::invalid_argument("row " + std::to_string(x) + " has no parameter tree");
      continue;
    }
    if (row.args.size() != row.sym.arity())
      throw std::invalid_argument("row " + std::to_string(x) + ": arity mismatch for " +
                                  row.sym.name());
    for (auto a : row.args)
      if (a >= sys.size())
        throw std::invalid_argument("row " + std::to_string(x) +
                                    " references unknown variable " + std::to_string(a));
  }
  auto eng = std::make_shared<FlatSolveEngine>(sys);
  std::vector<CoTree> out;
  out.reserve(sys.size());
  for (std::uint64_t x = 0; x < sys.size(); ++x) out.emplace_back(eng, x);
  return out;
}

namespace {

std::uint64_t flatten_term(const PartialTerm& t, const std::string& path,
                           std::size_t original_vars, TreeFlatSystem& rows,
                           std::vector<std::string>* names) {
  switch (t.tag) {
    case PartialTerm::Tag::Bottom:
      throw std::invalid_argument("guarded systems cannot contain ⊥");
    case PartialTerm::Tag::Var:
      if (t.leaf >= original_vars)
        throw std::invalid_argument("unknown system variable " + std::to_string(t.leaf));
      return t.leaf;  // reference the original variable
    case PartialTerm::Tag::Param: {
      rows.push_back(FlatRow<CoTree>::parameter(var(t.leaf)));
      if (names) names->push_back(path);
      return rows.size() - 1;
    }
    case PartialTerm::Tag::Node: {
      std::vector<std::uint64_t> args;
      args.reserve(t.children.size());
      for (std::size_t i = 0; i < t.children.size(); ++i)
        args.push_back(flatten_term(t.children[i], path + "." + std::to_string(i),
                                    original_vars, rows, names));
      rows.push_back(FlatRow<CoTree>::flat(t.sym, std::move(args)));
      if (names) names->push_back(path);
      return rows.size() - 1;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

TreeFlatSystem flatten_guarded(const GuardedSystem& g, std::vector<std::string>* names) {
  const std::size_t n = g.rows.size();
  TreeFlatSystem rows(n);
  if (names) {
    names->clear();
    for (std::size_t x = 0; x < n; ++x) names->push_back("x" + std::to_string(x));
  }
  for (std::size_t x = 0; x < n; ++x) {
    const PartialTerm& t = g.rows[x];
    switch (t.tag) {
      case PartialTerm::Tag::Var:
        throw std::invalid_argument("guardedness violation: variable x" +
                                    std::to_string(x) + " has a bare-variable equation");
      case PartialTerm::Tag::Bottom:
        throw std::invalid_argument("guarded systems cannot contain ⊥");
      case PartialTerm::Tag::Param:
        rows[x] = FlatRow<CoTree>::parameter(var(t.leaf));
        break;
      case PartialTerm::Tag::Node: {
        std::vector<std::uint64_t> args;
        args.reserve(t.children.size());
        for (std::size_t i = 0; i < t.children.size(); ++i)
          args.push_back(flatten_term(t.children[i],
                                      "x" + std::to_string(x) + "." + std::to_string(i),
                                      n, rows, names));
        rows[x] = FlatRow<CoTree>::flat(t.sym, std::move(args));
        break;
      }
    }
  }
  return rows;
}

std::vector<CoTree> solve_guarded(const GuardedSystem& g) {
  auto flat = flatten_guarded(g);
  auto sol = solve_flat(flat);
  sol.resize(g.rows.size());  // fresh variables are internal
  return sol;
}

}  // namespace treerec

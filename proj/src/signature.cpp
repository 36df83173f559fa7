#include "treerec/signature.hpp"

#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace treerec {

struct OpSym::Data {
  std::vector<std::pair<std::string, std::uint32_t>> entries;
  std::unordered_map<std::string, std::uint32_t> by_name;
};

const std::string& OpSym::name() const { return sig_->entries[index_].first; }
std::uint32_t OpSym::arity() const { return sig_->entries[index_].second; }

std::size_t OpSymHash::operator()(const OpSym& s) const {
  std::size_t h = std::hash<const void*>{}(s.sig_id());
  return h ^ (std::size_t(s.index()) * 0x9e3779b97f4a7c15ULL);
}

Signature::Signature() : data_(std::make_shared<OpSym::Data>()) {}

Signature Signature::make(std::vector<std::pair<std::string, std::uint32_t>> entries) {
  auto data = std::make_shared<OpSym::Data>();
  for (std::uint32_t i = 0; i < entries.size(); ++i) {
    auto [it, fresh] = data->by_name.emplace(entries[i].first, i);
    if (!fresh)
      throw std::invalid_argument("duplicate symbol name: " + entries[i].first);
  }
  data->entries = std::move(entries);
  Signature s;
  s.data_ = std::move(data);
  return s;
}

std::size_t Signature::size() const { return data_->entries.size(); }

OpSym Signature::symbol(std::uint32_t index) const {
  if (index >= data_->entries.size())
    throw std::out_of_range("symbol index out of range");
  return OpSym(data_, index);
}

std::optional<OpSym> Signature::find(const std::string& name) const {
  auto it = data_->by_name.find(name);
  if (it == data_->by_name.end()) return std::nullopt;
  return OpSym(data_, it->second);
}

bool Signature::owns(const OpSym& s) const { return s.sig_ == data_; }

std::vector<OpSym> Signature::symbols() const {
  std::vector<OpSym> out;
  out.reserve(size());
  for (std::uint32_t i = 0; i < size(); ++i) out.push_back(symbol(i));
  return out;
}

SignatureSum::SignatureSum(Signature left, Signature right)
    : left_(std::move(left)), right_(std::move(right)) {
  std::vector<std::pair<std::string, std::uint32_t>> entries;
  std::unordered_set<std::string> taken;
  for (std::uint32_t i = 0; i < left_.size(); ++i) {
    OpSym s = left_.symbol(i);
    entries.emplace_back(s.name(), s.arity());
    taken.insert(s.name());
  }
  for (std::uint32_t i = 0; i < right_.size(); ++i) {
    OpSym s = right_.symbol(i);
    std::string name = s.name();
    while (taken.count(name)) name += "'";
    taken.insert(name);
    entries.emplace_back(name, s.arity());
  }
  sum_ = Signature::make(std::move(entries));
}

OpSym SignatureSum::inject_left(const OpSym& s) const {
  if (!left_.owns(s)) throw std::invalid_argument("symbol not from left summand");
  return sum_.symbol(s.index());
}

OpSym SignatureSum::inject_right(const OpSym& s) const {
  if (!right_.owns(s)) throw std::invalid_argument("symbol not from right summand");
  return sum_.symbol(static_cast<std::uint32_t>(left_.size()) + s.index());
}

bool SignatureSum::from_left(const OpSym& s) const {
  return sum_.owns(s) && s.index() < left_.size();
}

bool SignatureSum::from_right(const OpSym& s) const {
  return sum_.owns(s) && s.index() >= left_.size();
}

OpSym SignatureSum::project(const OpSym& s) const {
  if (!sum_.owns(s)) throw std::invalid_argument("symbol not from the sum");
  if (s.index() < left_.size()) return left_.symbol(s.index());
  return right_.symbol(s.index() - static_cast<std::uint32_t>(left_.size()));
}

std::uint32_t arity(const OpSym& s) { return s.arity(); }

PartialTerm PartialTerm::node(OpSym f, std::vector<PartialTerm> children) {
  if (children.size() != f.arity())
    throw std::invalid_argument("arity mismatch for symbol " + f.name());
  PartialTerm t;
  t.tag = Tag::Node;
  t.sym = f;
  t.children = std::move(children);
  return t;
}

PartialTerm PartialTerm::var(std::uint64_t v) {
  PartialTerm t;
  t.tag = Tag::Var;
  t.leaf = v;
  return t;
}

PartialTerm PartialTerm::param(std::uint64_t p) {
  PartialTerm t;
  t.tag = Tag::Param;
  t.leaf = p;
  return t;
}

PartialTerm PartialTerm::bottom() { return PartialTerm{}; }

bool PartialTerm::operator==(const PartialTerm& o) const {
  if (tag != o.tag) return false;
  switch (tag) {
    case Tag::Bottom: return true;
    case Tag::Var:
    case Tag::Param: return leaf == o.leaf;
    case Tag::Node:
      if (sym != o.sym || children.size() != o.children.size()) return false;
      for (std::size_t i = 0; i < children.size(); ++i)
        if (!(children[i] == o.children[i])) return false;
      return true;
  }
  return false;
}

bool PartialTerm::contains_bottom() const {
  if (tag == Tag::Bottom) return true;
  for (const auto& c : children)
    if (c.contains_bottom()) return true;
  return false;
}

namespace {

void render(const PartialTerm& t, const std::vector<std::string>& vars,
            const std::vector<std::string>& params, std::string& out) {
  switch (t.tag) {
    case PartialTerm::Tag::Bottom:
      out += "⊥";
      return;
    case PartialTerm::Tag::Var:
      if (t.leaf < vars.size()) out += vars[t.leaf];
      else out += "v" + std::to_string(t.leaf);
      return;
    case PartialTerm::Tag::Param:
      if (t.leaf < params.size()) out += params[t.leaf];
      else out += "p" + std::to_string(t.leaf);
      return;
    case PartialTerm::Tag::Node:
      out += t.sym.name();
      if (!t.children.empty()) {
        out += "(";
        for (std::size_t i = 0; i < t.children.size(); ++i) {
          if (i) out += ", ";
          render(t.children[i], vars, params, out);
        }
        out += ")";
      }
      return;
  }
}

}  // namespace

std::string to_string(const PartialTerm& t) { return to_string(t, {}, {}); }

std::string to_string(const PartialTerm& t, const std::vector<std::string>& var_names,
                      const std::vector<std::string>& param_names) {
  std::string out;
  render(t, var_names, param_names, out);
  return out;
}

}  // namespace treerec

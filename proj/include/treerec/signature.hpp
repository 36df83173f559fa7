#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace treerec {

class Signature;

/// An operation symbol, identified by the signature it belongs to and its
/// position there. Two symbols compare equal iff they are the same position
/// of the same signature instance; names play no role in identity.
class OpSym {
 public:
  OpSym() = default;

  const std::string& name() const;
  std::uint32_t arity() const;
  std::uint32_t index() const { return index_; }
  bool valid() const { return sig_ != nullptr; }
  const void* sig_id() const { return sig_.get(); }

  friend bool operator==(const OpSym& a, const OpSym& b) {
    return a.sig_ == b.sig_ && a.index_ == b.index_;
  }
  friend bool operator!=(const OpSym& a, const OpSym& b) { return !(a == b); }

 private:
  friend class Signature;
  struct Data;
  OpSym(std::shared_ptr<const Data> sig, std::uint32_t index)
      : sig_(std::move(sig)), index_(index) {}

  std::shared_ptr<const Data> sig_;
  std::uint32_t index_ = 0;
};

struct OpSymHash {
  std::size_t operator()(const OpSym& s) const;
};

/// An ordered list of (name, arity) entries. Immutable once built and
/// freely shareable; copies are cheap handles onto the same identity.
class Signature {
 public:
  Signature();  // empty signature

  /// Builds a signature from entries in order. Throws std::invalid_argument
  /// naming the offending symbol when a name occurs twice.
  static Signature make(std::vector<std::pair<std::string, std::uint32_t>> entries);

  std::size_t size() const;
  OpSym symbol(std::uint32_t index) const;
  /// Looks a symbol up by name.
  std::optional<OpSym> find(const std::string& name) const;

  bool same_as(const Signature& other) const { return data_ == other.data_; }
  bool owns(const OpSym& s) const;

  std::vector<OpSym> symbols() const;

 private:
  friend class OpSym;
  friend class SignatureSum;
  std::shared_ptr<const OpSym::Data> data_;
};

/// Disjoint union of two signatures; symbols of `left` precede symbols of
/// `right`. Name clashes are kept distinct by priming the right-hand name.
class SignatureSum {
 public:
  SignatureSum(Signature left, Signature right);

  const Signature& sum() const { return sum_; }
  const Signature& left() const { return left_; }
  const Signature& right() const { return right_; }

  OpSym inject_left(const OpSym& s) const;
  OpSym inject_right(const OpSym& s) const;

  bool from_left(const OpSym& s) const;
  bool from_right(const OpSym& s) const;
  /// Inverse of the injections; s must belong to sum().
  OpSym project(const OpSym& s) const;

 private:
  Signature left_, right_, sum_;
};

std::uint32_t arity(const OpSym& s);

/// A finite tree over a signature with Var / Param / Bottom leaves; the
/// result type of cutting an infinite tree at a depth. Child counts always
/// match arities (enforced by the factory functions).
struct PartialTerm {
  enum class Tag : std::uint8_t { Node, Var, Param, Bottom };

  Tag tag = Tag::Bottom;
  OpSym sym;                          // Node only
  std::uint64_t leaf = 0;             // Var / Param only
  std::vector<PartialTerm> children;  // Node only

  static PartialTerm node(OpSym f, std::vector<PartialTerm> children);
  static PartialTerm var(std::uint64_t v);
  static PartialTerm param(std::uint64_t p);
  static PartialTerm bottom();

  bool operator==(const PartialTerm& o) const;
  bool contains_bottom() const;
};

/// Renders name(arg,...) terms; nullary symbols print bare, Bottom prints
/// as "⊥". Leaf names default to v<i> / p<i>.
using LeafNamer = std::string (*)(std::uint64_t);
std::string to_string(const PartialTerm& t);
std::string to_string(const PartialTerm& t,
                      const std::vector<std::string>& var_names,
                      const std::vector<std::string>& param_names);

}  // namespace treerec

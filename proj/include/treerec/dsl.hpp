#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "treerec/rps.hpp"

namespace treerec {

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(int line_, int col_, const std::string& msg)
      : std::runtime_error(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

/// The algebra block of a scheme file: a backend name plus arguments —
/// bare numbers, parenthesized number tuples, and key=value pairs.
struct AlgebraSpec {
  std::string name;
  std::vector<double> numbers;
  std::vector<std::vector<double>> tuples;
  std::map<std::string, std::string> kv;
};

/// A parsed scheme file: the scheme itself, the binder names of each
/// equation head (for printing), and the optional algebra block.
struct SchemeFile {
  Rps scheme;
  std::vector<std::vector<std::string>> head_vars;
  std::optional<AlgebraSpec> algebra;
};

/// Grammar (LL(1); '#' starts a comment, statements end with ';'):
///   stmt     := "given" decls | "unknown" decls | "algebra" algspec | equation
///   decls    := name ":" nat { "," name ":" nat }
///   equation := name [ "(" [ name {"," name} ] ")" ] "=" term
///   term     := name [ "(" [ term {"," term} ] ")" ]
///   algspec  := name [ "(" algargs ")" ]
/// Numbers in algebra arguments may be decimals or fractions (1/3).
SchemeFile parse_scheme(const std::string& text);

/// Canonical text form; parse_scheme(print_scheme(f)) reproduces f.
std::string print_scheme(const SchemeFile& f);

/// `rounds` simultaneous substitution rounds applied to unknown(0..n-1):
/// every unknown-rooted subterm is replaced by its right-hand side with the
/// (already rewritten) arguments plugged in. Needs finite right-hand terms.
PartialTerm expand_scheme(const Rps& r, std::uint32_t unknown, std::uint32_t rounds,
                          std::size_t node_cap = 1000000);

/// Replaces every unknown-rooted subterm by Bottom (for printing prefixes
/// of the unfolding).
PartialTerm prune_unknowns(const Rps& r, const PartialTerm& t);

}  // namespace treerec

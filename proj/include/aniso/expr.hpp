#pragma once

#include <memory>
#include <string>

#include "aniso/types.hpp"

namespace aniso {

/// Small arithmetic expressions over the spatial coordinates, used for
/// declarative boundary/F/f data in configs:
///
///   expr   := term (('+'|'-') term)*
///   term   := unary (('*'|'/') unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' unary)?
///   atom   := number | x1 | x2 | x3 | pi
///           | abs(e) | sin(e) | cos(e) | exp(e) | min(e,e) | max(e,e)
///           | '(' expr ')'
class Expr {
 public:
  /// Throws std::invalid_argument on syntax errors or out-of-range coordinates.
  static Expr parse(const std::string& text, int dim);

  double operator()(const VecN& x) const;
  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace aniso

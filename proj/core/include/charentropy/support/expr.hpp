#pragma once

#include <memory>
#include <string>

#include "charentropy/support/numeric.hpp"

namespace charentropy {

// Small arithmetic expression parser over the variables x, t, y.
// Supports + - * / ^, parentheses, numeric literals, pi, e, and the
// functions sin cos tan exp log sqrt abs sinh cosh tanh atan.
// Used for CLI inputs (initial profiles, weights, candidate functions).
class Expr {
 public:
  static Expr parse(const std::string& text);

  double eval(double x, double t, double y) const;
  double eval(const double* p) const { return eval(p[0], p[1], p[2]); }

  // ScalarField view; gradient falls back to finite differences.
  ScalarField field() const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
};

}  // namespace charentropy

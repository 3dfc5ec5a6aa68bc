#pragma once

#include <memory>
#include <string>
#include <vector>

#include "common.hpp"

namespace ebem {

// Small expression language for boundary data and gap functions. Grammar:
// numbers, t, x1, x2, pi, + - * / ^ (right associative, binds tighter than
// unary minus), parentheses, and the functions H (Heaviside, H(0) = 1),
// sin, cos, sqrt, max, min.
class Expr {
 public:
  struct Node;

  Expr() = default;
  bool valid() const { return root_ != nullptr; }
  const std::string& source() const { return src_; }

  double operator()(double t, const Vector2d& x = Vector2d::Zero()) const;

  // Roots of affine-in-t Heaviside arguments inside (0, tMax), sorted and
  // deduplicated; time quadrature splits at these jumps. Arguments that
  // involve x or are not affine contribute nothing.
  std::vector<double> time_breakpoints(double tMax) const;

 private:
  friend Expr parse_expr(const std::string& src);
  std::shared_ptr<const Node> root_;
  std::string src_;
};

// Throws a config error naming the offending column on malformed input.
Expr parse_expr(const std::string& src);

}  // namespace ebem

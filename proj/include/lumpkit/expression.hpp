#pragma once

#include "lumpkit/dual.hpp"
#include "lumpkit/errors.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lumpkit {

enum class Op : std::uint8_t { Constant, Variable, Add, Sub, Mul, Div, Neg, IntPow };

struct Node {
    Op op = Op::Constant;
    double value = 0.0;        // Constant
    std::uint32_t index = 0;   // Variable index, or IntPow exponent
    std::uint32_t lhs = 0;     // operand (Neg, IntPow) or left child
    std::uint32_t rhs = 0;     // right child

    bool operator==(const Node &) const = default;
};

/// Thrown by Expression::evaluate when a Div node meets an exactly zero
/// denominator. OdeSystem rethrows it as EvaluationError with the component.
struct ZeroDenominator {};

/// Immutable rational expression over indexed variables.
///
/// Nodes are stored in post-order in a flat arena; the root is the last node.
/// Builders fold constant subtrees and do nothing else, so no algebraic
/// rewriting ever changes where a denominator vanishes.
class Expression {
  public:
    static Expression constant(double c);
    static Expression variable(std::uint32_t index);

    friend Expression operator+(const Expression &a, const Expression &b);
    friend Expression operator-(const Expression &a, const Expression &b);
    friend Expression operator*(const Expression &a, const Expression &b);
    friend Expression operator/(const Expression &a, const Expression &b);
    friend Expression operator-(const Expression &a);
    friend Expression pow(const Expression &base, std::uint32_t exponent);

    const std::vector<Node> &nodes() const noexcept { return nodes_; }
    const Node &root() const { return nodes_.back(); }

    bool is_constant() const { return root().op == Op::Constant; }

    /// Largest variable index referenced plus one (0 for constant expressions).
    std::size_t variable_bound() const;

    double evaluate(std::span<const double> x) const;
    DualVector evaluate(std::span<const DualVector> x) const;

    /// Coefficients c and offset b such that the expression equals c.x + b,
    /// or nullopt if the expression is not affine in the variables.
    struct Affine {
        Eigen::VectorXd coefficients;
        double offset = 0.0;
    };
    std::optional<Affine> affine_form(std::size_t dim) const;

    /// Fully parenthesized text that parses back to the identical tree.
    std::string to_string(std::span<const std::string> names) const;

    bool operator==(const Expression &) const = default;

  private:
    std::vector<Node> nodes_;

    static Expression binary(Op op, const Expression &a, const Expression &b);
    void append(const Expression &other);
};

} // namespace lumpkit

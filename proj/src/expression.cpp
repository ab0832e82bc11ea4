#include "lumpkit/expression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lumpkit {

namespace {

double int_pow(double base, std::uint32_t exponent) {
    double result = 1.0;
    while (exponent != 0) {
        if (exponent & 1U)
            result *= base;
        base *= base;
        exponent >>= 1U;
    }
    return result;
}

DualVector int_pow(const DualVector &base, std::uint32_t exponent) {
    if (exponent == 0)
        return DualVector::constant(1.0, static_cast<std::size_t>(base.partials.size()));
    const double lower = int_pow(base.value, exponent - 1);
    return {lower * base.value, (static_cast<double>(exponent) * lower) * base.partials};
}

template<typename T>
T make_constant(double c, std::span<const T> x);

template<>
double make_constant<double>(double c, std::span<const double>) {
    return c;
}

template<>
DualVector make_constant<DualVector>(double c, std::span<const DualVector> x) {
    const std::size_t dim = x.empty() ? 0 : static_cast<std::size_t>(x.front().partials.size());
    return DualVector::constant(c, dim);
}

double value_of(double v) { return v; }
double value_of(const DualVector &v) { return v.value; }

template<typename T>
T evaluate_nodes(const std::vector<Node> &nodes, std::span<const T> x) {
    std::vector<T> stack(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Node &n = nodes[k];
        switch (n.op) {
        case Op::Constant:
            stack[k] = make_constant<T>(n.value, x);
            break;
        case Op::Variable:
            stack[k] = x[n.index];
            break;
        case Op::Add:
            stack[k] = stack[n.lhs] + stack[n.rhs];
            break;
        case Op::Sub:
            stack[k] = stack[n.lhs] - stack[n.rhs];
            break;
        case Op::Mul:
            stack[k] = stack[n.lhs] * stack[n.rhs];
            break;
        case Op::Div:
            if (value_of(stack[n.rhs]) == 0.0)
                throw ZeroDenominator{};
            stack[k] = stack[n.lhs] / stack[n.rhs];
            break;
        case Op::Neg:
            stack[k] = -stack[n.lhs];
            break;
        case Op::IntPow:
            stack[k] = int_pow(stack[n.lhs], n.index);
            break;
        }
    }
    return stack.back();
}

void format_constant(std::ostringstream &out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (v < 0.0 || (v == 0.0 && std::signbit(v)))
        out << '(' << buf << ')';
    else
        out << buf;
}

void print_node(std::ostringstream &out, const std::vector<Node> &nodes, std::uint32_t k,
                std::span<const std::string> names) {
    const Node &n = nodes[k];
    auto infix = [&](const char *op) {
        out << '(';
        print_node(out, nodes, n.lhs, names);
        out << ' ' << op << ' ';
        print_node(out, nodes, n.rhs, names);
        out << ')';
    };
    switch (n.op) {
    case Op::Constant:
        format_constant(out, n.value);
        break;
    case Op::Variable:
        if (n.index < names.size())
            out << names[n.index];
        else
            out << "x" << n.index;
        break;
    case Op::Add:
        infix("+");
        break;
    case Op::Sub:
        infix("-");
        break;
    case Op::Mul:
        infix("*");
        break;
    case Op::Div:
        infix("/");
        break;
    case Op::Neg:
        out << "(-";
        print_node(out, nodes, n.lhs, names);
        out << ')';
        break;
    case Op::IntPow:
        out << '(';
        print_node(out, nodes, n.lhs, names);
        out << '^' << n.index << ')';
        break;
    }
}

} // namespace

Expression Expression::constant(double c) {
    Expression e;
    e.nodes_.push_back(Node{Op::Constant, c, 0, 0, 0});
    return e;
}

Expression Expression::variable(std::uint32_t index) {
    Expression e;
    e.nodes_.push_back(Node{Op::Variable, 0.0, index, 0, 0});
    return e;
}

void Expression::append(const Expression &other) {
    const auto offset = static_cast<std::uint32_t>(nodes_.size());
    for (Node n : other.nodes_) {
        switch (n.op) {
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
            n.lhs += offset;
            n.rhs += offset;
            break;
        case Op::Neg:
        case Op::IntPow:
            n.lhs += offset;
            break;
        default:
            break;
        }
        nodes_.push_back(n);
    }
}

Expression Expression::binary(Op op, const Expression &a, const Expression &b) {
    if (a.is_constant() && b.is_constant()) {
        const double x = a.root().value;
        const double y = b.root().value;
        switch (op) {
        case Op::Add:
            return constant(x + y);
        case Op::Sub:
            return constant(x - y);
        case Op::Mul:
            return constant(x * y);
        case Op::Div:
            if (y != 0.0)
                return constant(x / y);
            break;
        default:
            break;
        }
    }
    Expression e;
    e.nodes_.reserve(a.nodes_.size() + b.nodes_.size() + 1);
    e.append(a);
    const auto left = static_cast<std::uint32_t>(e.nodes_.size() - 1);
    e.append(b);
    const auto right = static_cast<std::uint32_t>(e.nodes_.size() - 1);
    e.nodes_.push_back(Node{op, 0.0, 0, left, right});
    return e;
}

Expression operator+(const Expression &a, const Expression &b) { return Expression::binary(Op::Add, a, b); }
Expression operator-(const Expression &a, const Expression &b) { return Expression::binary(Op::Sub, a, b); }
Expression operator*(const Expression &a, const Expression &b) { return Expression::binary(Op::Mul, a, b); }
Expression operator/(const Expression &a, const Expression &b) { return Expression::binary(Op::Div, a, b); }

Expression operator-(const Expression &a) {
    if (a.is_constant())
        return Expression::constant(-a.root().value);
    Expression e = a;
    e.nodes_.push_back(Node{Op::Neg, 0.0, 0, static_cast<std::uint32_t>(a.nodes_.size() - 1), 0});
    return e;
}

Expression pow(const Expression &base, std::uint32_t exponent) {
    if (base.is_constant())
        return Expression::constant(int_pow(base.root().value, exponent));
    Expression e = base;
    e.nodes_.push_back(Node{Op::IntPow, 0.0, exponent, static_cast<std::uint32_t>(base.nodes_.size() - 1), 0});
    return e;
}

std::size_t Expression::variable_bound() const {
    std::size_t bound = 0;
    for (const Node &n : nodes_)
        if (n.op == Op::Variable)
            bound = std::max<std::size_t>(bound, n.index + 1);
    return bound;
}

double Expression::evaluate(std::span<const double> x) const { return evaluate_nodes<double>(nodes_, x); }

DualVector Expression::evaluate(std::span<const DualVector> x) const { return evaluate_nodes<DualVector>(nodes_, x); }

std::optional<Expression::Affine> Expression::affine_form(std::size_t dim) const {
    // An affine value per node, or nullopt once any node is nonlinear.
    std::vector<std::optional<Affine>> forms(nodes_.size());
    const auto d = static_cast<Eigen::Index>(dim);
    auto is_const = [](const Affine &f) { return f.coefficients.isZero(0.0); };
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const Node &n = nodes_[k];
        switch (n.op) {
        case Op::Constant:
            forms[k] = Affine{Eigen::VectorXd::Zero(d), n.value};
            break;
        case Op::Variable: {
            if (n.index >= dim)
                return std::nullopt;
            Affine f{Eigen::VectorXd::Zero(d), 0.0};
            f.coefficients[n.index] = 1.0;
            forms[k] = f;
            break;
        }
        case Op::Add:
        case Op::Sub: {
            if (!forms[n.lhs] || !forms[n.rhs])
                return std::nullopt;
            const double sign = n.op == Op::Add ? 1.0 : -1.0;
            forms[k] = Affine{forms[n.lhs]->coefficients + sign * forms[n.rhs]->coefficients,
                              forms[n.lhs]->offset + sign * forms[n.rhs]->offset};
            break;
        }
        case Op::Mul: {
            if (!forms[n.lhs] || !forms[n.rhs])
                return std::nullopt;
            const Affine &a = *forms[n.lhs];
            const Affine &b = *forms[n.rhs];
            if (is_const(a))
                forms[k] = Affine{a.offset * b.coefficients, a.offset * b.offset};
            else if (is_const(b))
                forms[k] = Affine{b.offset * a.coefficients, b.offset * a.offset};
            else
                return std::nullopt;
            break;
        }
        case Op::Div: {
            if (!forms[n.lhs] || !forms[n.rhs] || !is_const(*forms[n.rhs]) || forms[n.rhs]->offset == 0.0)
                return std::nullopt;
            const double inv = 1.0 / forms[n.rhs]->offset;
            forms[k] = Affine{forms[n.lhs]->coefficients * inv, forms[n.lhs]->offset * inv};
            break;
        }
        case Op::Neg:
            if (!forms[n.lhs])
                return std::nullopt;
            forms[k] = Affine{-forms[n.lhs]->coefficients, -forms[n.lhs]->offset};
            break;
        case Op::IntPow: {
            if (!forms[n.lhs])
                return std::nullopt;
            const Affine &a = *forms[n.lhs];
            if (n.index == 1)
                forms[k] = a;
            else if (n.index == 0)
                forms[k] = Affine{Eigen::VectorXd::Zero(d), 1.0};
            else if (is_const(a))
                forms[k] = Affine{Eigen::VectorXd::Zero(d), int_pow(a.offset, n.index)};
            else
                return std::nullopt;
            break;
        }
        }
    }
    return forms.back();
}

std::string Expression::to_string(std::span<const std::string> names) const {
    std::ostringstream out;
    print_node(out, nodes_, static_cast<std::uint32_t>(nodes_.size() - 1), names);
    return out.str();
}

} // namespace lumpkit

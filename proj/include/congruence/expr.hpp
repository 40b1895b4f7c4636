#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "congruence/errors.hpp"

namespace congruence {

enum class UnaryOp { Neg, Sin, Cos, Sinh, Cosh, Tanh, Exp, Log, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div };

// Immutable expression tree over a fixed chart-variable list.
// Smart constructors fold constants and apply shallow simplifications
// (0+e, 1*e, 0*e, e^1, ...); no canonical form is attempted.
class Expr {
public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    enum class Kind { Constant, Variable, Unary, Binary, Pow };

    struct Node {
        Kind kind;
        double value = 0.0;       // Constant
        int var_index = -1;       // Variable
        std::string var_name;     // Variable
        UnaryOp uop = UnaryOp::Neg;
        BinaryOp bop = BinaryOp::Add;
        long long exponent = 0;   // Pow
        NodePtr a, b;
    };

    Expr() : node_(constant(0.0).node_) {}

    static Expr constant(double v);
    static Expr variable(int index, std::string name);
    static Expr unary(UnaryOp op, const Expr& e);
    static Expr binary(BinaryOp op, const Expr& l, const Expr& r);
    static Expr pow(const Expr& base, long long exponent);

    static Expr add(const Expr& l, const Expr& r) { return binary(BinaryOp::Add, l, r); }
    static Expr sub(const Expr& l, const Expr& r) { return binary(BinaryOp::Sub, l, r); }
    static Expr mul(const Expr& l, const Expr& r) { return binary(BinaryOp::Mul, l, r); }
    static Expr div(const Expr& l, const Expr& r) { return binary(BinaryOp::Div, l, r); }

    double evaluate(std::span<const double> env) const;
    Expr differentiate(int var) const;
    std::string to_string() const;

    bool is_constant() const { return node_->kind == Kind::Constant; }
    bool is_constant(double v) const {
        return is_constant() && node_->value == v;
    }
    const Node& node() const { return *node_; }
    std::size_t size() const;  // node count

private:
    explicit Expr(NodePtr n) : node_(std::move(n)) {}
    NodePtr node_;
};

// Parses `text` as an expression in the named variables. Standard precedence:
// ^ binds tighter than unary minus, then * /, then + -; binary operators are
// left-associative and ^ takes a literal integer exponent.
Expr parse_expr(const std::string& text, const std::vector<std::string>& vars);

const char* unary_name(UnaryOp op);

}  // namespace congruence

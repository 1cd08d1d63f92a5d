#pragma once

#include <cstdio>
#include <string>

#include "roska/dsl/ast.hpp"

namespace roska::dsl {

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

// Precedence levels: 1 add/sub, 2 mul/div, 3 atoms/calls/unary.
inline int precedence(const Expr& e) {
    if (e.kind == Expr::Kind::binary) {
        switch (e.bop) {
            case BinaryOp::add:
            case BinaryOp::sub:
                return 1;
            case BinaryOp::mul:
            case BinaryOp::div:
                return 2;
            default:
                return 3;  // min/max print as calls
        }
    }
    return 3;
}

inline void print_expr(const Expr& e, std::string& out);

inline void print_child(const Expr& child, int parent_prec, bool is_right, std::string& out) {
    const int child_prec = precedence(child);
    // Parenthesize when binding would change: lower precedence, or equal
    // precedence on the right of a left-associative operator.
    const bool parens = child_prec < parent_prec || (child_prec == parent_prec && is_right);
    if (parens) out += '(';
    print_expr(child, out);
    if (parens) out += ')';
}

inline void print_expr(const Expr& e, std::string& out) {
    switch (e.kind) {
        case Expr::Kind::constant:
            out += format_real(e.value);
            return;
        case Expr::Kind::feature:
            out += e.feature;
            return;
        case Expr::Kind::unary: {
            switch (e.uop) {
                case UnaryOp::neg: {
                    out += '-';
                    // -(a+b), -(a*b): keep the whole operand under the minus.
                    const bool parens = e.child->kind == Expr::Kind::binary &&
                                        precedence(*e.child) <= 2;
                    if (parens) out += '(';
                    print_expr(*e.child, out);
                    if (parens) out += ')';
                    return;
                }
                case UnaryOp::abs:
                    out += "abs(";
                    break;
                case UnaryOp::exp:
                    out += "exp(";
                    break;
                case UnaryOp::tanh:
                    out += "tanh(";
                    break;
                case UnaryOp::sqrt:
                    out += "sqrt(";
                    break;
            }
            print_expr(*e.child, out);
            out += ')';
            return;
        }
        case Expr::Kind::binary: {
            if (e.bop == BinaryOp::min || e.bop == BinaryOp::max) {
                out += e.bop == BinaryOp::min ? "min(" : "max(";
                print_expr(*e.left, out);
                out += ", ";
                print_expr(*e.right, out);
                out += ')';
                return;
            }
            const int prec = precedence(e);
            print_child(*e.left, prec, false, out);
            switch (e.bop) {
                case BinaryOp::add:
                    out += " + ";
                    break;
                case BinaryOp::sub:
                    out += " - ";
                    break;
                case BinaryOp::mul:
                    out += " * ";
                    break;
                case BinaryOp::div:
                    out += " / ";
                    break;
                default:
                    break;
            }
            print_child(*e.right, prec, true, out);
            return;
        }
        case Expr::Kind::norm: {
            out += "norm(";
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += ", ";
                print_expr(*e.children[i], out);
            }
            out += ')';
            return;
        }
        case Expr::Kind::clamp:
            out += "clamp(";
            print_expr(*e.child, out);
            out += ", ";
            out += format_real(e.lo);
            out += ", ";
            out += format_real(e.hi);
            out += ')';
            return;
    }
}

}  // namespace detail

inline std::string print(const Expr& e) {
    std::string out;
    detail::print_expr(e, out);
    return out;
}

/// Canonical text: one block per component in order, fixed field order,
/// transform always explicit. parse(print(p)) is structurally equal to p.
inline std::string print(const RewardProgram& p) {
    std::string out;
    for (const auto& c : p.components) {
        out += "component ";
        out += c.name;
        out += " {\n  temp = ";
        out += format_real(c.temperature);
        out += "\n  expr = ";
        detail::print_expr(*c.expr, out);
        out += "\n  weight = ";
        out += format_real(c.weight);
        out += "\n  transform = ";
        out += transform_name(c.transform);
        out += "\n}\n";
    }
    return out;
}

}  // namespace roska::dsl

#pragma once

#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roska/dsl/ast.hpp"

namespace roska::dsl {

namespace detail {

struct Token {
    enum class Kind { ident, real, punct, eof };
    Kind kind;
    std::string text;
    double value = 0.0;
    int line = 1, column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            consume();
        current_.line = line_;
        current_.column = column_;
        if (pos_ >= text_.size()) {
            current_.kind = Token::Kind::eof;
            current_.text = "<eof>";
            return;
        }
        const char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                consume();
            current_.kind = Token::Kind::ident;
            current_.text = std::string(text_.substr(start, pos_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                consume();
            if (pos_ < text_.size() && text_[pos_] == '.') {
                consume();
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    consume();
            }
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                std::size_t mark = pos_;
                consume();
                if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) consume();
                if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    while (pos_ < text_.size() &&
                           std::isdigit(static_cast<unsigned char>(text_[pos_])))
                        consume();
                } else {
                    rewind(mark);  // bare 'e' belongs to the next token
                }
            }
            current_.kind = Token::Kind::real;
            current_.text = std::string(text_.substr(start, pos_ - start));
            current_.value = std::strtod(current_.text.c_str(), nullptr);
            return;
        }
        current_.kind = Token::Kind::punct;
        current_.text = std::string(1, c);
        consume();
    }

    void consume() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void rewind(std::size_t mark) {
        // Only used within a single line (exponent backtrack).
        column_ -= static_cast<int>(pos_ - mark);
        pos_ = mark;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1, column_ = 1;
    Token current_;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    RewardProgram parse_program(std::string source_text) {
        RewardProgram program;
        program.source_text = std::move(source_text);
        while (lex_.peek().kind != Token::Kind::eof) program.components.push_back(parse_component());
        if (program.components.empty()) fail("expected 'component'");
        validate(program);
        return program;
    }

private:
    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = lex_.peek();
        throw ParseError(t.line, t.column, "expected " + expected + ", got '" + t.text + "'");
    }

    void expect_ident(const std::string& word) {
        const Token& t = lex_.peek();
        if (t.kind != Token::Kind::ident || t.text != word) fail("'" + word + "'");
        lex_.take();
    }

    void expect_punct(char c) {
        const Token& t = lex_.peek();
        if (t.kind != Token::Kind::punct || t.text[0] != c) fail(std::string("'") + c + "'");
        lex_.take();
    }

    std::string take_ident(const std::string& what) {
        const Token& t = lex_.peek();
        if (t.kind != Token::Kind::ident) fail(what);
        return lex_.take().text;
    }

    double take_signed_real() {
        bool negate = false;
        while (lex_.peek().kind == Token::Kind::punct &&
               (lex_.peek().text[0] == '-' || lex_.peek().text[0] == '+')) {
            if (lex_.take().text[0] == '-') negate = !negate;
        }
        const Token& t = lex_.peek();
        if (t.kind != Token::Kind::real) fail("a number");
        double v = lex_.take().value;
        return negate ? -v : v;
    }

    // component := "component" IDENT "{" "temp" "=" REAL "expr" "=" expr
    //              "weight" "=" REAL ["transform" "=" IDENT] "}"
    RewardComponent parse_component() {
        expect_ident("component");
        RewardComponent c;
        c.name = take_ident("component name");
        expect_punct('{');
        expect_ident("temp");
        expect_punct('=');
        c.temperature = take_signed_real();
        expect_ident("expr");
        expect_punct('=');
        c.expr = parse_expr();
        expect_ident("weight");
        expect_punct('=');
        c.weight = take_signed_real();
        if (lex_.peek().kind == Token::Kind::ident && lex_.peek().text == "transform") {
            lex_.take();
            expect_punct('=');
            const Token& t = lex_.peek();
            std::string name = take_ident("transform name");
            if (name == "exp_neg_over_temp") {
                c.transform = Transform::exp_neg_over_temp;
            } else if (name == "identity") {
                c.transform = Transform::identity;
            } else {
                throw ValidationError("unknown transform '" + name + "' at " +
                                      std::to_string(t.line) + ":" + std::to_string(t.column));
            }
        }
        expect_punct('}');
        return c;
    }

    bool peek_punct(char c) const {
        return lex_.peek().kind == Token::Kind::punct && lex_.peek().text[0] == c;
    }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        while (peek_punct('+') || peek_punct('-')) {
            const char op = lex_.take().text[0];
            lhs = binary(op == '+' ? BinaryOp::add : BinaryOp::sub, lhs, parse_term());
        }
        return lhs;
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        while (peek_punct('*') || peek_punct('/')) {
            const char op = lex_.take().text[0];
            lhs = binary(op == '*' ? BinaryOp::mul : BinaryOp::div, lhs, parse_factor());
        }
        return lhs;
    }

    ExprPtr parse_factor() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::punct && t.text[0] == '-') {
            lex_.take();
            return unary(UnaryOp::neg, parse_factor());
        }
        if (t.kind == Token::Kind::real) return constant(lex_.take().value);
        if (t.kind == Token::Kind::punct && t.text[0] == '(') {
            lex_.take();
            ExprPtr inner = parse_expr();
            expect_punct(')');
            return inner;
        }
        if (t.kind == Token::Kind::ident) {
            Token name = lex_.take();
            if (!peek_punct('(')) return feature(name.text);
            lex_.take();  // '('
            ExprPtr e = parse_call(name);
            expect_punct(')');
            return e;
        }
        fail("an expression");
    }

    ExprPtr parse_call(const Token& name) {
        const std::string& fn = name.text;
        auto arity_error = [&](const char* need) -> ParseError {
            return ParseError(name.line, name.column, fn + " expects " + need);
        };
        if (fn == "abs" || fn == "exp" || fn == "tanh" || fn == "sqrt") {
            ExprPtr arg = parse_expr();
            if (peek_punct(',')) throw arity_error("1 argument");
            UnaryOp op = fn == "abs"   ? UnaryOp::abs
                         : fn == "exp" ? UnaryOp::exp
                         : fn == "tanh" ? UnaryOp::tanh
                                        : UnaryOp::sqrt;
            return unary(op, arg);
        }
        if (fn == "min" || fn == "max") {
            ExprPtr a = parse_expr();
            if (!peek_punct(',')) throw arity_error("2 arguments");
            lex_.take();
            ExprPtr b = parse_expr();
            if (peek_punct(',')) throw arity_error("2 arguments");
            return binary(fn == "min" ? BinaryOp::min : BinaryOp::max, a, b);
        }
        if (fn == "norm") {
            std::vector<ExprPtr> args;
            args.push_back(parse_expr());
            while (peek_punct(',')) {
                lex_.take();
                args.push_back(parse_expr());
            }
            return norm(std::move(args));
        }
        if (fn == "clamp") {
            ExprPtr arg = parse_expr();
            if (!peek_punct(',')) throw arity_error("3 arguments");
            lex_.take();
            double lo = take_clamp_bound();
            if (!peek_punct(',')) throw arity_error("3 arguments");
            lex_.take();
            double hi = take_clamp_bound();
            if (peek_punct(',')) throw arity_error("3 arguments");
            if (lo > hi)
                throw ValidationError("clamp bounds out of order at " + std::to_string(name.line) +
                                      ":" + std::to_string(name.column));
            return clamp(arg, lo, hi);
        }
        throw ValidationError("unknown function '" + fn + "' at " + std::to_string(name.line) +
                              ":" + std::to_string(name.column));
    }

    double take_clamp_bound() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::real ||
            (t.kind == Token::Kind::punct && (t.text[0] == '-' || t.text[0] == '+')))
            return take_signed_real();
        throw ParseError(t.line, t.column, "clamp bounds must be numeric literals");
    }

    Lexer lex_;
};

}  // namespace detail

/// Parses program text. Throws ParseError (syntax) or ValidationError (invariants).
inline RewardProgram parse(std::string_view text) {
    detail::Parser parser(text);
    return parser.parse_program(std::string(text));
}

}  // namespace roska::dsl

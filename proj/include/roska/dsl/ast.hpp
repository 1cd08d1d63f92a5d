#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "roska/common/errors.hpp"

namespace roska::dsl {

enum class UnaryOp { neg, abs, exp, tanh, sqrt };
enum class BinaryOp { add, sub, mul, div, min, max };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression tree node. Immutable after construction; subtrees are shared.
struct Expr {
    enum class Kind { constant, feature, unary, binary, norm, clamp };

    Kind kind;
    double value = 0.0;             // constant
    std::string feature;            // feature
    UnaryOp uop = UnaryOp::neg;     // unary
    BinaryOp bop = BinaryOp::add;   // binary
    ExprPtr child;                  // unary, clamp
    ExprPtr left, right;            // binary
    std::vector<ExprPtr> children;  // norm (order-2)
    double lo = 0.0, hi = 0.0;      // clamp bounds
};

inline ExprPtr constant(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::constant;
    e->value = v;
    return e;
}

inline ExprPtr feature(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::feature;
    e->feature = std::move(name);
    return e;
}

/// neg of a constant folds to a negated constant so printing stays canonical.
inline ExprPtr unary(UnaryOp op, ExprPtr c) {
    if (op == UnaryOp::neg && c->kind == Expr::Kind::constant) return constant(-c->value);
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::unary;
    e->uop = op;
    e->child = std::move(c);
    return e;
}

inline ExprPtr binary(BinaryOp op, ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::binary;
    e->bop = op;
    e->left = std::move(l);
    e->right = std::move(r);
    return e;
}

inline ExprPtr norm(std::vector<ExprPtr> children) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::norm;
    e->children = std::move(children);
    return e;
}

inline ExprPtr clamp(ExprPtr c, double lo, double hi) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::clamp;
    e->child = std::move(c);
    e->lo = lo;
    e->hi = hi;
    return e;
}

inline bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::constant:
            return a.value == b.value;
        case Expr::Kind::feature:
            return a.feature == b.feature;
        case Expr::Kind::unary:
            return a.uop == b.uop && equal(*a.child, *b.child);
        case Expr::Kind::binary:
            return a.bop == b.bop && equal(*a.left, *b.left) && equal(*a.right, *b.right);
        case Expr::Kind::norm: {
            if (a.children.size() != b.children.size()) return false;
            for (std::size_t i = 0; i < a.children.size(); ++i)
                if (!equal(*a.children[i], *b.children[i])) return false;
            return true;
        }
        case Expr::Kind::clamp:
            return a.lo == b.lo && a.hi == b.hi && equal(*a.child, *b.child);
    }
    return false;
}

enum class Transform { exp_neg_over_temp, identity };

inline const char* transform_name(Transform t) {
    return t == Transform::exp_neg_over_temp ? "exp_neg_over_temp" : "identity";
}

struct RewardComponent {
    std::string name;
    ExprPtr expr;
    double temperature = 0.1;  // must stay > 0
    Transform transform = Transform::exp_neg_over_temp;
    double weight = 1.0;
};

/// Parsed reward program: ordered, uniquely named, weighted components.
struct RewardProgram {
    std::vector<RewardComponent> components;
    std::string source_text;
};

inline bool equal(const RewardComponent& a, const RewardComponent& b) {
    return a.name == b.name && a.temperature == b.temperature && a.transform == b.transform &&
           a.weight == b.weight && equal(*a.expr, *b.expr);
}

/// Structural equality; source_text is not part of program identity.
inline bool equal(const RewardProgram& a, const RewardProgram& b) {
    if (a.components.size() != b.components.size()) return false;
    for (std::size_t i = 0; i < a.components.size(); ++i)
        if (!equal(a.components[i], b.components[i])) return false;
    return true;
}

inline void collect_features(const Expr& e, std::set<std::string>& out) {
    switch (e.kind) {
        case Expr::Kind::feature:
            out.insert(e.feature);
            break;
        case Expr::Kind::unary:
        case Expr::Kind::clamp:
            collect_features(*e.child, out);
            break;
        case Expr::Kind::binary:
            collect_features(*e.left, out);
            collect_features(*e.right, out);
            break;
        case Expr::Kind::norm:
            for (const auto& c : e.children) collect_features(*c, out);
            break;
        case Expr::Kind::constant:
            break;
    }
}

inline std::set<std::string> features_used(const RewardProgram& p) {
    std::set<std::string> out;
    for (const auto& c : p.components) collect_features(*c.expr, out);
    return out;
}

/// Throws ValidationError on duplicate names or non-positive temperature.
inline void validate(const RewardProgram& p) {
    if (p.components.empty()) throw ValidationError("program must declare at least one component");
    std::set<std::string> seen;
    for (const auto& c : p.components) {
        if (!seen.insert(c.name).second)
            throw ValidationError("duplicate component name '" + c.name + "'");
        if (!(c.temperature > 0.0))
            throw ValidationError("component '" + c.name + "': temperature must be > 0");
    }
}

/// Throws FeatureMismatch if the program references a feature outside `available`.
template <typename Range>
void validate_against_features(const RewardProgram& p, const Range& available) {
    std::set<std::string> have(std::begin(available), std::end(available));
    for (const auto& name : features_used(p)) {
        if (!have.count(name))
            throw FeatureMismatch("reward program uses feature '" + name +
                                  "' not exported by the environment");
    }
}

}  // namespace roska::dsl

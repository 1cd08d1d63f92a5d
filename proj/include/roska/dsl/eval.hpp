#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "roska/dsl/ast.hpp"

namespace roska::dsl {

inline constexpr double kDivEpsilon = 1e-8;
/// Magnitude cap applied after every node so no finite feature map (or weight)
/// can drive an intermediate or total to infinity.
inline constexpr double kValueCap = 1e150;

inline double cap_value(double v) {
    if (v > kValueCap) return kValueCap;
    if (v < -kValueCap) return -kValueCap;
    return v;
}

/// Guarded denominator: sign(d) * max(|d|, eps); +0 maps to +eps.
inline double guard_denominator(double d) {
    if (std::abs(d) >= kDivEpsilon) return d;
    return std::signbit(d) ? -kDivEpsilon : kDivEpsilon;
}

namespace detail {

enum class OpCode : std::uint8_t {
    push_const,
    push_feature,
    neg,
    abs,
    exp,
    tanh,
    sqrt,
    add,
    sub,
    mul,
    div,
    min,
    max,
    norm,
    clamp,
};

struct Instr {
    OpCode op;
    int index = 0;  // feature slot, or norm argument count
    double a = 0.0, b = 0.0;  // constant / clamp bounds
};

inline void compile_expr(const Expr& e, const std::unordered_map<std::string, int>& slots,
                         std::vector<Instr>& tape) {
    switch (e.kind) {
        case Expr::Kind::constant:
            tape.push_back({OpCode::push_const, 0, e.value, 0.0});
            return;
        case Expr::Kind::feature: {
            auto it = slots.find(e.feature);
            if (it == slots.end()) throw MissingFeature(e.feature);
            tape.push_back({OpCode::push_feature, it->second, 0.0, 0.0});
            return;
        }
        case Expr::Kind::unary:
            compile_expr(*e.child, slots, tape);
            switch (e.uop) {
                case UnaryOp::neg:
                    tape.push_back({OpCode::neg});
                    return;
                case UnaryOp::abs:
                    tape.push_back({OpCode::abs});
                    return;
                case UnaryOp::exp:
                    tape.push_back({OpCode::exp});
                    return;
                case UnaryOp::tanh:
                    tape.push_back({OpCode::tanh});
                    return;
                case UnaryOp::sqrt:
                    tape.push_back({OpCode::sqrt});
                    return;
            }
            return;
        case Expr::Kind::binary: {
            compile_expr(*e.left, slots, tape);
            compile_expr(*e.right, slots, tape);
            switch (e.bop) {
                case BinaryOp::add:
                    tape.push_back({OpCode::add});
                    return;
                case BinaryOp::sub:
                    tape.push_back({OpCode::sub});
                    return;
                case BinaryOp::mul:
                    tape.push_back({OpCode::mul});
                    return;
                case BinaryOp::div:
                    tape.push_back({OpCode::div});
                    return;
                case BinaryOp::min:
                    tape.push_back({OpCode::min});
                    return;
                case BinaryOp::max:
                    tape.push_back({OpCode::max});
                    return;
            }
            return;
        }
        case Expr::Kind::norm:
            for (const auto& c : e.children) compile_expr(*c, slots, tape);
            tape.push_back({OpCode::norm, static_cast<int>(e.children.size())});
            return;
        case Expr::Kind::clamp:
            compile_expr(*e.child, slots, tape);
            tape.push_back({OpCode::clamp, 0, e.lo, e.hi});
            return;
    }
}

}  // namespace detail

/// Reward program compiled against a fixed feature layout. One shared
/// evaluation core serves both the map-based API and the trainer hot loop.
class CompiledProgram {
public:
    CompiledProgram() = default;

    CompiledProgram(const RewardProgram& program, std::span<const std::string> feature_names) {
        std::unordered_map<std::string, int> slots;
        for (std::size_t i = 0; i < feature_names.size(); ++i)
            slots.emplace(feature_names[i], static_cast<int>(i));
        components_.reserve(program.components.size());
        std::size_t max_depth = 0;
        for (const auto& c : program.components) {
            Compiled cc;
            cc.name = c.name;
            cc.temperature = c.temperature;
            cc.transform = c.transform;
            cc.weight = c.weight;
            detail::compile_expr(*c.expr, slots, cc.tape);
            max_depth = std::max(max_depth, stack_need(cc.tape));
            components_.push_back(std::move(cc));
        }
        stack_.resize(std::max<std::size_t>(max_depth, 1));
    }

    std::size_t component_count() const { return components_.size(); }
    const std::string& component_name(std::size_t i) const { return components_[i].name; }

    /// Evaluates all components; returns the weighted total. Component values
    /// land in `component_values` (resized to component_count()).
    double evaluate(std::span<const double> features, std::vector<double>& component_values) {
        component_values.resize(components_.size());
        double total = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            const Compiled& c = components_[i];
            double raw = run_tape(c.tape, features);
            double value = raw;
            if (c.transform == Transform::exp_neg_over_temp)
                value = cap_value(std::exp(-raw / c.temperature));
            component_values[i] = value;
            total = cap_value(total + cap_value(c.weight * value));
        }
        if (!std::isfinite(total)) throw NonFiniteResult("total reward is not finite");
        return total;
    }

private:
    struct Compiled {
        std::string name;
        double temperature;
        Transform transform;
        double weight;
        std::vector<detail::Instr> tape;
    };

    static std::size_t stack_need(const std::vector<detail::Instr>& tape) {
        std::size_t depth = 0, peak = 0;
        for (const auto& in : tape) {
            using detail::OpCode;
            switch (in.op) {
                case OpCode::push_const:
                case OpCode::push_feature:
                    ++depth;
                    break;
                case OpCode::add:
                case OpCode::sub:
                case OpCode::mul:
                case OpCode::div:
                case OpCode::min:
                case OpCode::max:
                    --depth;
                    break;
                case OpCode::norm:
                    depth -= static_cast<std::size_t>(in.index) - 1;
                    break;
                default:
                    break;
            }
            peak = std::max(peak, depth);
        }
        return peak;
    }

    double run_tape(const std::vector<detail::Instr>& tape, std::span<const double> features) {
        double* sp = stack_.data();
        for (const auto& in : tape) {
            using detail::OpCode;
            switch (in.op) {
                case OpCode::push_const:
                    *sp++ = cap_value(in.a);
                    break;
                case OpCode::push_feature: {
                    const double v = features[static_cast<std::size_t>(in.index)];
                    if (!std::isfinite(v))
                        throw NonFiniteResult("feature value is not finite");
                    *sp++ = cap_value(v);
                    break;
                }
                case OpCode::neg:
                    sp[-1] = -sp[-1];
                    break;
                case OpCode::abs:
                    sp[-1] = std::abs(sp[-1]);
                    break;
                case OpCode::exp:
                    sp[-1] = cap_value(std::exp(sp[-1]));
                    break;
                case OpCode::tanh:
                    sp[-1] = std::tanh(sp[-1]);
                    break;
                case OpCode::sqrt:
                    sp[-1] = std::sqrt(std::max(sp[-1], 0.0));
                    break;
                case OpCode::add:
                    --sp;
                    sp[-1] = cap_value(sp[-1] + sp[0]);
                    break;
                case OpCode::sub:
                    --sp;
                    sp[-1] = cap_value(sp[-1] - sp[0]);
                    break;
                case OpCode::mul:
                    --sp;
                    sp[-1] = cap_value(sp[-1] * sp[0]);
                    break;
                case OpCode::div:
                    --sp;
                    sp[-1] = cap_value(sp[-1] / guard_denominator(sp[0]));
                    break;
                case OpCode::min:
                    --sp;
                    sp[-1] = std::min(sp[-1], sp[0]);
                    break;
                case OpCode::max:
                    --sp;
                    sp[-1] = std::max(sp[-1], sp[0]);
                    break;
                case OpCode::norm: {
                    const int n = in.index;
                    double sum = 0.0;
                    for (int k = 0; k < n; ++k) {
                        const double v = sp[-1 - k];
                        sum = std::min(sum + v * v, 1e300);
                    }
                    sp -= n;
                    *sp++ = std::sqrt(sum);
                    break;
                }
                case OpCode::clamp:
                    sp[-1] = std::min(std::max(sp[-1], in.a), in.b);
                    break;
            }
        }
        return sp[-1];
    }

    std::vector<Compiled> components_;
    std::vector<double> stack_;
};

struct EvalResult {
    double total = 0.0;
    std::map<std::string, double> components;
};

/// Pure evaluation against a named feature map.
/// Throws MissingFeature for unresolved names; never returns non-finite values.
inline EvalResult evaluate(const RewardProgram& program,
                           const std::map<std::string, double>& features) {
    std::vector<std::string> names;
    std::vector<double> values;
    names.reserve(features.size());
    values.reserve(features.size());
    for (const auto& [name, value] : features) {
        names.push_back(name);
        values.push_back(value);
    }
    CompiledProgram compiled(program, names);
    std::vector<double> component_values;
    EvalResult out;
    out.total = compiled.evaluate(values, component_values);
    for (std::size_t i = 0; i < component_values.size(); ++i)
        out.components[compiled.component_name(i)] = component_values[i];
    return out;
}

}  // namespace roska::dsl

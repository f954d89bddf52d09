#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "hilfer/core_types.hpp"
#include "hilfer/expression.hpp"

namespace hilfer {

// Built-in right-hand sides. Each carries its descriptor so that analysis and
// the oracles can use closed-form facts instead of sampling.

inline Rhs constant_rhs(double c) {
    return {[c](double, double) { return c; }, ConstantRhs{c}};
}

inline Rhs linear_rhs(double a, double b) {
    return {[a, b](double, double y) { return a * y + b; }, LinearRhs{a, b}};
}

/// f(t, y) = t^(sigma-1), independent of y.
inline Rhs power_rhs(double sigma) {
    if (!(sigma >= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "power rhs needs sigma >= 1");
    }
    return {[sigma](double t, double) { return std::pow(t, sigma - 1.0); }, PowerRhs{sigma}};
}

/// f(t, y) = offset + scale * y/(1+y).
inline Rhs logistic_rhs(double offset, double scale) {
    return {[offset, scale](double, double y) { return offset + scale * y / (1.0 + y); },
            LogisticRhs{offset, scale}};
}

inline Rhs expression_rhs(const std::string& text) {
    auto expr = std::make_shared<const Expression>(text);
    return {[expr](double t, double y) { return (*expr)(t, y); }, ExpressionRhs{text}};
}

/// Lipschitz constant in y for catalog entries; nullopt when not known in closed form.
inline std::optional<double> analytic_lipschitz(const RhsSpec& spec) {
    if (std::holds_alternative<ConstantRhs>(spec)) return 0.0;
    if (const auto* l = std::get_if<LinearRhs>(&spec)) return std::abs(l->a);
    if (std::holds_alternative<PowerRhs>(spec)) return 0.0;
    if (const auto* g = std::get_if<LogisticRhs>(&spec)) return std::abs(g->scale);  // sup of 1/(1+y)^2 on y >= 0
    return std::nullopt;
}

/**
 * Constant bounds A1 <= f(t,y) <= A2 over (0,1] x [0,inf) for catalog
 * entries, when both are finite. Logistic uses y/(1+y) in [0,1).
 */
inline std::optional<std::pair<double, double>> analytic_bounds(const RhsSpec& spec) {
    if (const auto* c = std::get_if<ConstantRhs>(&spec)) return std::pair{c->c, c->c};
    if (const auto* l = std::get_if<LinearRhs>(&spec)) {
        if (l->a == 0.0) return std::pair{l->b, l->b};
        return std::nullopt;
    }
    if (const auto* p = std::get_if<PowerRhs>(&spec)) {
        if (p->sigma == 1.0) return std::pair{1.0, 1.0};
        return std::pair{0.0, 1.0};
    }
    if (const auto* g = std::get_if<LogisticRhs>(&spec)) {
        return std::pair{std::min(g->offset, g->offset + g->scale), std::max(g->offset, g->offset + g->scale)};
    }
    return std::nullopt;
}

inline std::string describe(const RhsSpec& spec) {
    struct Visitor {
        std::string operator()(const ConstantRhs& c) const { return "constant c=" + std::to_string(c.c); }
        std::string operator()(const LinearRhs& l) const {
            return "linear a*y+b, a=" + std::to_string(l.a) + " b=" + std::to_string(l.b);
        }
        std::string operator()(const PowerRhs& p) const { return "power t^(sigma-1), sigma=" + std::to_string(p.sigma); }
        std::string operator()(const LogisticRhs& g) const {
            return "logistic offset+scale*y/(1+y), offset=" + std::to_string(g.offset) +
                   " scale=" + std::to_string(g.scale);
        }
        std::string operator()(const ExpressionRhs& e) const { return "expression " + e.text; }
        std::string operator()(const CustomRhs&) const { return "custom callback"; }
    };
    return std::visit(Visitor{}, spec);
}

}  // namespace hilfer

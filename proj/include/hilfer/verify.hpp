#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <variant>
#include <vector>

#include "hilfer/core_types.hpp"
#include "hilfer/fracops.hpp"

namespace hilfer {

struct ResidualReport {
    double interior_residual = 0.0;
    double boundary_residual = 0.0;
    double t_cut = 0.05;
    std::size_t node_count = 0;
};

/**
 * int_0^1 t^(gamma-1) w(t) dt with w piecewise linear between nodes, using
 * exact moments of t^(gamma-1) and t^gamma on every cell so the endpoint
 * singularity is integrated without loss.
 */
inline double weighted_integral(const WeightedGridFunction& w) {
    const GradedMesh& mesh = w.mesh();
    const double g = w.gamma();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
        const double a = mesh[k];
        const double b = mesh[k + 1];
        const double m0 = (std::pow(b, g) - std::pow(a, g)) / g;
        const double m1 = (std::pow(b, g + 1.0) - std::pow(a, g + 1.0)) / (g + 1.0);
        acc += (w[k] * (b * m0 - m1) + w[k + 1] * (m1 - a * m0)) / (b - a);
    }
    return acc;
}

/**
 * Interior residual max |D^{alpha,beta} y(t_i) - f(t_i, y(t_i))| over nodes
 * with t_i >= t_cut, plus the boundary defect |Gamma(gamma) w(0) - lambda int y - d|.
 */
inline ResidualReport residual_check(const HilferProblem& problem, const DerivedConstants& consts,
                                     const WeightedGridFunction& solution, const QuadratureRule& rule,
                                     double t_cut = 0.05) {
    if (!(t_cut > 0.0 && t_cut < 0.5)) {
        throw Error(ErrorCode::InvalidArgument, "t_cut must lie in (0, 0.5)");
    }
    detail::require_rule_matches(solution, rule);
    if (solution.gamma() != consts.gamma) {
        throw Error(ErrorCode::MeshMismatch, "solution weight does not match gamma");
    }
    detail::require_nodes(*rule.mesh);

    std::vector<double> deriv;
    if (problem.alpha < 1.0) {
        deriv = hilfer_derivative(problem.alpha, problem.beta, solution, rule);
    } else {
        deriv = detail::differentiate(rule.mesh->nodes(), detail::plain_values(solution));
    }

    ResidualReport rep;
    rep.t_cut = t_cut;
    const GradedMesh& mesh = *rule.mesh;
    for (std::size_t i = 1; i < mesh.size(); ++i) {
        if (mesh[i] < t_cut) continue;
        const double y = solution.physical_at_node(i);
        rep.interior_residual = std::max(rep.interior_residual, std::abs(deriv[i] - problem.rhs(mesh[i], y)));
        ++rep.node_count;
    }
    rep.boundary_residual =
        std::abs(gamma_fn(consts.gamma) * solution[0] - problem.lambda * weighted_integral(solution) - problem.d);
    return rep;
}

/**
 * Closed form for f == c:
 *   w(t) = Lambda + lambda c/(Gamma(gamma) mu Gamma(alpha+2)) + c t^(1-gamma+alpha)/Gamma(alpha+1).
 */
inline WeightedGridFunction constant_rhs_oracle(const HilferProblem& problem, const DerivedConstants& consts,
                                                const MeshPtr& mesh) {
    double c = 0.0;
    if (const auto* k = std::get_if<ConstantRhs>(&problem.rhs.spec)) {
        c = k->c;
    } else if (const auto* l = std::get_if<LinearRhs>(&problem.rhs.spec); l && l->a == 0.0) {
        c = l->b;
    } else {
        throw Error(ErrorCode::NotConstantRhs, "oracle needs a constant right-hand side");
    }
    if (!(consts.mu > 0.0)) {
        throw Error(ErrorCode::SingularProblem, "constant oracle needs mu > 0");
    }
    const double a = problem.alpha;
    const double g = consts.gamma;
    const double level =
        consts.capital_lambda + problem.lambda * c / (gamma_fn(g) * consts.mu * gamma_fn(a + 2.0));
    return WeightedGridFunction::sample(mesh, g, [&](double t) {
        return level + c * std::pow(t, 1.0 - g + a) / gamma_fn(a + 1.0);
    });
}

/**
 * Closed form for f(t,y) = t^(sigma-1) with lambda = 0:
 *   y(t) = d/Gamma(gamma) t^(gamma-1) + Gamma(sigma)/Gamma(alpha+sigma) t^(alpha+sigma-1).
 */
inline WeightedGridFunction power_rhs_oracle(const HilferProblem& problem, double sigma, const MeshPtr& mesh) {
    if (problem.lambda != 0.0) {
        throw Error(ErrorCode::RequiresLambdaZero, "power oracle holds only for lambda = 0");
    }
    if (!(sigma >= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "power oracle needs sigma >= 1");
    }
    const double a = problem.alpha;
    const double g = problem.gamma();
    const double level = problem.d / gamma_fn(g);
    const double coef = gamma_fn(sigma) / gamma_fn(a + sigma);
    return WeightedGridFunction::sample(mesh, g, [&](double t) {
        return level + coef * std::pow(t, a + sigma - g);
    });
}

}  // namespace hilfer

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hilfer/core_types.hpp"
#include "hilfer/error.hpp"
#include "hilfer/fracops.hpp"

namespace hilfer {

/**
 * Quadrature tables for the fixed-point operator: I^alpha acting on
 * C_{1-gamma} samples, and the weights of the boundary functional
 * int_0^1 Q(tau)/Gamma(alpha) f(tau) dtau. Depends only on
 * (mesh, alpha, gamma, scheme), so sweeps share one instance per key.
 */
struct DeltaTables {
    std::shared_ptr<const ProductIntegrator> convolution;
    std::shared_ptr<const std::vector<double>> boundary;

    static DeltaTables build(const MeshPtr& mesh, double alpha, double gamma,
                             Scheme scheme = Scheme::ProductTrapezoidal) {
        DeltaTables t;
        t.convolution = std::make_shared<const ProductIntegrator>(mesh, alpha, gamma, scheme);
        t.boundary = std::make_shared<const std::vector<double>>(
            boundary_functional_weights(mesh, alpha, gamma, scheme));
        return t;
    }
};

/**
 * phi(0) from phi(t_1), phi(t_2) under the local model phi = A + B t^(1-gamma),
 * i.e. f = A t^(gamma-1) + B, which the first-cell quadrature integrates
 * exactly. gamma = 1 (or close to it) uses a straight line in t instead.
 */
inline double origin_extrapolate(const GradedMesh& mesh, double gamma, double phi1, double phi2) {
    const double t1 = mesh[1];
    const double t2 = mesh[2];
    if (1.0 - gamma > 1e-3) {
        const double s1 = std::pow(t1, 1.0 - gamma);
        const double s2 = std::pow(t2, 1.0 - gamma);
        return (phi1 * s2 - phi2 * s1) / (s2 - s1);
    }
    return (phi1 * t2 - phi2 * t1) / (t2 - t1);
}

/**
 * Weighted samples phi_j = t_j^(1-gamma) f(t_j, y_j) of the right-hand side
 * along a candidate y = t^(gamma-1) w. f is not evaluated at t = 0 (outside
 * its domain, and y is unbounded there when gamma < 1); phi_0 is extrapolated
 * and clamped at 0, since f >= 0 forces a nonnegative limit.
 */
inline std::vector<double> weighted_rhs_samples(const HilferProblem& problem,
                                                const WeightedGridFunction& w) {
    const GradedMesh& mesh = w.mesh();
    const double gamma = w.gamma();
    std::vector<double> phi(w.size());
    for (std::size_t j = 1; j < w.size(); ++j) {
        const double t = mesh[j];
        const double weight = gamma == 1.0 ? 1.0 : std::pow(t, gamma - 1.0);
        const double f = problem.rhs(t, weight * w[j]);
        if (!std::isfinite(f)) {
            throw Error(ErrorCode::RhsEvaluationFailure,
                        "f(t, y) is not finite at t = " + std::to_string(t));
        }
        if (f < 0.0) {
            throw Error(ErrorCode::RhsNegative,
                        "f(t, y) = " + std::to_string(f) + " < 0 at t = " + std::to_string(t) +
                            "; f must map into [0, inf)");
        }
        phi[j] = f / weight;
    }
    phi[0] = phi.size() > 2 ? std::max(0.0, origin_extrapolate(mesh, gamma, phi[1], phi[2])) : phi[1];
    return phi;
}

/**
 * DeltaOperator: the fixed-point map of the equivalent integral equation
 *
 *   Delta y(t) = Lambda t^(gamma-1)
 *              + lambda t^(gamma-1) / (Gamma(gamma) mu) * int_0^1 Q(tau)/Gamma(alpha) f(tau, y) dtau
 *              + I^alpha f(., y)(t),
 *
 * applied in weighted form: it returns w'_j = t_j^(1-gamma) Delta y(t_j),
 * with w'_0 equal to the weighted limit at the origin.
 */
class DeltaOperator {
public:
    DeltaOperator(HilferProblem problem, DerivedConstants consts, DeltaTables tables)
        : problem_(std::move(problem)), consts_(consts), tables_(std::move(tables)) {
        if (std::abs(consts_.mu) < kMuThreshold) {
            throw Error(ErrorCode::SingularProblem, "mu = 0: the fixed-point operator is undefined");
        }
        if (!tables_.convolution || !tables_.boundary) {
            throw Error(ErrorCode::InvalidArgument, "missing quadrature tables");
        }
        if (tables_.convolution->gamma() != consts_.gamma) {
            throw Error(ErrorCode::MeshMismatch, "quadrature tables built for a different gamma");
        }
    }

    DeltaOperator(const HilferProblem& problem, const DerivedConstants& consts, const QuadratureRule& rule)
        : DeltaOperator(problem, consts, DeltaTables::build(rule.mesh, problem.alpha, consts.gamma, rule.scheme)) {}

    const HilferProblem& problem() const { return problem_; }
    const DerivedConstants& constants() const { return consts_; }
    const MeshPtr& mesh() const { return tables_.convolution->mesh_ptr(); }
    const DeltaTables& tables() const { return tables_; }

    /// int_0^1 Q(tau)/Gamma(alpha) f(tau, y(tau)) dtau from weighted rhs samples.
    double boundary_functional(std::span<const double> phi) const {
        const auto& weights = *tables_.boundary;
        double acc = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k) acc += weights[k] * phi[k];
        return acc;
    }

    WeightedGridFunction operator()(const WeightedGridFunction& w) const {
        check_input(w);
        const std::vector<double> phi = weighted_rhs_samples(problem_, w);
        std::vector<double> out = tables_.convolution->apply(phi);
        const double boundary = boundary_functional(phi);
        const double offset = consts_.capital_lambda +
                              problem_.lambda * boundary / (gamma_fn(consts_.gamma) * consts_.mu);
        for (double& v : out) v += offset;
        return {mesh(), consts_.gamma, std::move(out)};
    }

    /**
     * int_0^1 y(s) ds for y = Delta-image data of w, from the closed form
     * A = d / (mu Gamma(gamma+1)) + (1/mu) int_0^1 Q/Gamma(alpha) f(tau, y) dtau.
     */
    double solution_integral(const WeightedGridFunction& w) const {
        check_input(w);
        const std::vector<double> phi = weighted_rhs_samples(problem_, w);
        return problem_.d / (consts_.mu * gamma_fn(consts_.gamma + 1.0)) +
               boundary_functional(phi) / consts_.mu;
    }

    /// |Gamma(gamma) w(0) - lambda int_0^1 y - d|: the integral boundary condition defect.
    double boundary_defect(const WeightedGridFunction& w) const {
        return std::abs(gamma_fn(consts_.gamma) * w[0] - problem_.lambda * solution_integral(w) - problem_.d);
    }

private:
    void check_input(const WeightedGridFunction& w) const {
        if (!w.mesh().same_as(*mesh()) || w.gamma() != consts_.gamma) {
            throw Error(ErrorCode::MeshMismatch, "iterate does not live on the operator's mesh/weight");
        }
    }

    HilferProblem problem_;
    DerivedConstants consts_;
    DeltaTables tables_;
};

inline WeightedGridFunction apply_delta(const HilferProblem& problem, const DerivedConstants& consts,
                                        const WeightedGridFunction& w, const QuadratureRule& rule) {
    return DeltaOperator(problem, consts, rule)(w);
}

// ---------------------------------------------------------------------------
// Upper/lower solution brackets

struct SolutionBracket {
    WeightedGridFunction lower;
    WeightedGridFunction upper;

    bool contains(const WeightedGridFunction& w, double slack) const {
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (w[j] < lower[j] - slack || w[j] > upper[j] + slack) return false;
        }
        return true;
    }

    WeightedGridFunction midpoint() const {
        std::vector<double> v(lower.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = 0.5 * (lower[j] + upper[j]);
        return {lower.mesh_ptr(), lower.gamma(), std::move(v)};
    }
};

/**
 * Bracket from global bounds A1 <= f <= A2: the images of the operator with
 * f frozen at A1 and at A2,
 *
 *   y(t) = Lambda t^(gamma-1) + lambda A t^(gamma-1) / (Gamma(gamma) mu Gamma(alpha+2))
 *        + A t^alpha / Gamma(alpha+1).
 *
 * With lambda = 0 this is d/Gamma(gamma) t^(gamma-1) + A t^alpha/Gamma(alpha+1).
 * For lambda > 0 the middle term is required: the operator is monotone in f
 * when mu > 0, so every fixed point lies between the two images.
 */
inline SolutionBracket bracket_from_bounds(const HilferProblem& problem, const DerivedConstants& consts,
                                           const MeshPtr& mesh) {
    if (!problem.lower_bound || !problem.upper_bound) {
        throw Error(ErrorCode::MissingBounds, "bracket needs both A1 and A2");
    }
    if (!(consts.mu > 0.0)) {
        throw Error(ErrorCode::SingularProblem, "bracket ordering requires mu > 0");
    }
    const double a = problem.alpha;
    const double gamma = consts.gamma;
    const double g_a1 = gamma_fn(a + 1.0);
    const double boundary_coef = problem.lambda / (gamma_fn(gamma) * consts.mu * gamma_fn(a + 2.0));
    auto image = [&](double level) {
        return WeightedGridFunction::sample(mesh, gamma, [&](double t) {
            return consts.capital_lambda + boundary_coef * level + level * std::pow(t, 1.0 - gamma + a) / g_a1;
        });
    };
    return {image(*problem.lower_bound), image(*problem.upper_bound)};
}

// ---------------------------------------------------------------------------
// Control functions

/**
 * ControlFunctions: G(t,x) = sup_{a<=y<=x} f(t,y) and g(t,x) = inf_{x<=y<=b} f(t,y)
 * realized on a uniform y-grid over [a,b]. x is clamped to [a,b]. Both are
 * nondecreasing in x by construction.
 */
struct ControlFunctions {
    double y_lo = 0.0;
    double y_hi = 0.0;
    std::function<double(double, double)> upper;
    std::function<double(double, double)> lower;
};

inline ControlFunctions build_control_functions(const HilferProblem& problem, double y_lo, double y_hi,
                                                std::size_t samples = 256) {
    if (!(y_lo >= 0.0) || !(y_lo <= y_hi) || !std::isfinite(y_hi)) {
        throw Error(ErrorCode::InvalidInterval, "control interval needs 0 <= y_lo <= y_hi");
    }
    if (samples < 2) {
        throw Error(ErrorCode::InvalidArgument, "control functions need at least 2 samples");
    }
    auto grid = std::make_shared<std::vector<double>>(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        (*grid)[k] = y_lo + (y_hi - y_lo) * static_cast<double>(k) / static_cast<double>(samples - 1);
    }
    grid->back() = y_hi;

    ControlFunctions cf;
    cf.y_lo = y_lo;
    cf.y_hi = y_hi;
    cf.upper = [rhs = problem.rhs, grid, y_lo, y_hi](double t, double x) {
        const double xc = std::clamp(x, y_lo, y_hi);
        double best = rhs(t, (*grid)[0]);
        for (std::size_t k = 1; k < grid->size() && (*grid)[k] <= xc; ++k) {
            best = std::max(best, rhs(t, (*grid)[k]));
        }
        return best;
    };
    cf.lower = [rhs = problem.rhs, grid, y_lo, y_hi](double t, double x) {
        const double xc = std::clamp(x, y_lo, y_hi);
        double best = rhs(t, grid->back());
        for (std::size_t k = grid->size() - 1; k-- > 0 && (*grid)[k] >= xc;) {
            best = std::min(best, rhs(t, (*grid)[k]));
        }
        return best;
    };
    return cf;
}

/// Copy of `problem` with f replaced by a control function.
inline HilferProblem with_rhs(HilferProblem problem, std::function<double(double, double)> f) {
    problem.rhs = Rhs{std::move(f), CustomRhs{}};
    return problem;
}

// ---------------------------------------------------------------------------
// Picard iteration

struct PicardSettings {
    enum class InitialGuess { LambdaProfile, BracketMidpoint, UserSupplied };

    double tol = 1e-10;
    std::size_t max_iter = 200;
    InitialGuess initial_guess = InitialGuess::LambdaProfile;
    std::optional<WeightedGridFunction> user_guess;

    void validate() const {
        if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
        if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
        if (initial_guess == InitialGuess::UserSupplied && !user_guess) {
            throw Error(ErrorCode::InvalidArgument, "user-supplied initial guess missing");
        }
    }
};

/**
 * SolveResult: final iterate plus the successive-difference history
 * ||w_{k+1} - w_k||. A run that hits max_iter has converged = false and
 * still carries its last iterate and history for diagnosis.
 */
struct SolveResult {
    WeightedGridFunction solution;
    std::size_t iterations = 0;
    std::vector<double> history;
    bool converged = false;

    /// Late-stage contraction ratio history[k+1]/history[k], averaged over the last few steps.
    std::optional<double> observed_ratio(std::size_t window = 3) const {
        std::vector<double> ratios;
        for (std::size_t k = 1; k < history.size(); ++k) {
            if (history[k - 1] > 0.0 && history[k] > 0.0) ratios.push_back(history[k] / history[k - 1]);
        }
        if (ratios.empty()) return std::nullopt;
        const std::size_t m = std::min(window, ratios.size());
        double worst = 0.0;
        for (std::size_t k = ratios.size() - m; k < ratios.size(); ++k) worst = std::max(worst, ratios[k]);
        return worst;
    }
};

inline WeightedGridFunction initial_guess(const DeltaOperator& op, const PicardSettings& settings) {
    switch (settings.initial_guess) {
        case PicardSettings::InitialGuess::UserSupplied: {
            const auto& g = *settings.user_guess;
            if (!g.mesh().same_as(*op.mesh()) || g.gamma() != op.constants().gamma) {
                throw Error(ErrorCode::MeshMismatch, "initial guess lives on a different mesh/weight");
            }
            return g;
        }
        case PicardSettings::InitialGuess::BracketMidpoint:
            return bracket_from_bounds(op.problem(), op.constants(), op.mesh()).midpoint();
        case PicardSettings::InitialGuess::LambdaProfile:
            break;
    }
    return WeightedGridFunction::constant(op.mesh(), op.constants().gamma, op.constants().capital_lambda);
}

inline SolveResult solve_picard(const DeltaOperator& op, const PicardSettings& settings) {
    settings.validate();
    WeightedGridFunction w = initial_guess(op, settings);
    SolveResult result{w, 0, {}, false};
    for (std::size_t k = 1; k <= settings.max_iter; ++k) {
        WeightedGridFunction next = op(w);
        const double diff = weighted_distance(next, w);
        result.history.push_back(diff);
        result.iterations = k;
        w = std::move(next);
        if (!std::isfinite(diff)) break;
        if (diff <= settings.tol) {
            result.converged = true;
            break;
        }
    }
    result.solution = std::move(w);
    return result;
}

inline SolveResult solve_picard(const HilferProblem& problem, const DerivedConstants& consts,
                                const PicardSettings& settings, const QuadratureRule& rule) {
    return solve_picard(DeltaOperator(problem, consts, rule), settings);
}

}  // namespace hilfer

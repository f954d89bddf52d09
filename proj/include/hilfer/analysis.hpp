#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hilfer/core_types.hpp"
#include "hilfer/fracops.hpp"
#include "hilfer/rhs_catalog.hpp"

namespace hilfer {

struct Annotation {
    std::string key;
    double value = 0.0;
};

/**
 * Certificate: one machine-checked hypothesis. `holds` is exactly the
 * stated comparison of `value` against `threshold`. A certificate that
 * could not be computed (missing input) has evaluable = false and holds = false.
 */
struct Certificate {
    std::string name;
    bool holds = false;
    double value = std::numeric_limits<double>::quiet_NaN();
    double threshold = std::numeric_limits<double>::quiet_NaN();
    bool evaluable = true;
    std::string detail;
    std::vector<Annotation> annotations;

    std::optional<double> annotation(const std::string& key) const {
        for (const auto& a : annotations) {
            if (a.key == key) return a.value;
        }
        return std::nullopt;
    }
};

inline Certificate not_evaluable(std::string name, std::string why) {
    Certificate c;
    c.name = std::move(name);
    c.evaluable = false;
    c.detail = std::move(why);
    return c;
}

inline Certificate check_mu(const DerivedConstants& consts) {
    Certificate c;
    c.name = "mu";
    c.value = consts.mu;
    c.threshold = kMuThreshold;
    c.holds = consts.mu > kMuThreshold;
    c.detail = "mu = 1 - lambda/Gamma(gamma+1) must be nonzero; positivity further needs mu > 0";
    c.annotations.push_back({"mu_positive", consts.mu > 0.0 ? 1.0 : 0.0});
    return c;
}

/// max over a uniform tau-grid of Q(tau)/Gamma(alpha), compared against e.
inline Certificate check_kernel_bound(double alpha, std::size_t grid_size) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0,1]");
    }
    if (grid_size < 2) {
        throw Error(ErrorCode::InvalidArgument, "kernel grid needs at least 2 points");
    }
    const double g = gamma_fn(alpha);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid_size; ++k) {
        const double tau = static_cast<double>(k) / static_cast<double>(grid_size - 1);
        worst = std::max(worst, q_kernel(tau, alpha) / g);
    }
    Certificate c;
    c.name = "kernel_bound";
    c.value = worst;
    c.threshold = std::numbers::e;
    c.holds = worst < std::numbers::e;
    c.detail = "max Q(tau)/Gamma(alpha) over " + std::to_string(grid_size) + " tau points";
    // Q is decreasing, so the supremum is Q(0)/Gamma(alpha) = 1/Gamma(alpha+1).
    c.annotations.push_back({"sharpened_constant", 1.0 / gamma_fn(alpha + 1.0)});
    return c;
}

struct LipschitzEstimate {
    enum class Method { UserSupplied, Analytic, Sampled };

    double value = 0.0;
    Method method = Method::Sampled;
    std::size_t t_grid = 0;
    std::size_t y_grid = 0;
    /// Sampling only bounds the constant from below.
    bool needs_confirmation = false;
};

inline std::string to_string(LipschitzEstimate::Method m) {
    switch (m) {
        case LipschitzEstimate::Method::UserSupplied: return "user-supplied";
        case LipschitzEstimate::Method::Analytic: return "analytic";
        case LipschitzEstimate::Method::Sampled: return "sampled";
    }
    return "unknown";
}

/**
 * Largest adjacent-pair difference quotient |f(t,y_{k+1}) - f(t,y_k)|/(y_{k+1}-y_k)
 * over t = i/t_grid (i = 1..t_grid) and a uniform y-grid on [y_lo, y_hi].
 * Refining either grid by nesting never decreases the result.
 */
inline LipschitzEstimate estimate_lipschitz(const HilferProblem& problem, std::size_t t_grid, std::size_t y_grid,
                                            double y_lo, double y_hi) {
    if (t_grid < 2 || y_grid < 2) {
        throw Error(ErrorCode::InvalidArgument, "lipschitz grids need at least 2 points");
    }
    if (!(y_lo <= y_hi) || !std::isfinite(y_lo) || !std::isfinite(y_hi)) {
        throw Error(ErrorCode::InvalidInterval, "lipschitz y-range must satisfy y_lo <= y_hi");
    }
    const double span = y_hi - y_lo;
    std::vector<double> ys(y_grid), fs(y_grid);
    for (std::size_t k = 0; k < y_grid; ++k) {
        ys[k] = y_lo + span * static_cast<double>(k) / static_cast<double>(y_grid - 1);
    }
    double worst = 0.0;
    for (std::size_t i = 1; i <= t_grid; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(t_grid);
        for (std::size_t k = 0; k < y_grid; ++k) {
            fs[k] = problem.rhs(t, ys[k]);
            if (!std::isfinite(fs[k])) {
                throw Error(ErrorCode::RhsEvaluationFailure,
                            "f(" + std::to_string(t) + ", " + std::to_string(ys[k]) + ") is not finite");
            }
        }
        for (std::size_t k = 0; k + 1 < y_grid; ++k) {
            const double dy = ys[k + 1] - ys[k];
            if (dy > 0.0) worst = std::max(worst, std::abs(fs[k + 1] - fs[k]) / dy);
        }
    }
    return {worst, LipschitzEstimate::Method::Sampled, t_grid, y_grid, true};
}

/// The contraction constant (lambda e/(Gamma(gamma) mu) + 1/Gamma(alpha+1)) L_f.
inline double contraction_value(const DerivedConstants& consts, double alpha, double lambda, double lipschitz) {
    return lambda * std::numbers::e / (gamma_fn(consts.gamma) * consts.mu) * lipschitz +
           lipschitz / gamma_fn(alpha + 1.0);
}

inline Certificate contraction_certificate(const DerivedConstants& consts, double alpha, double lambda,
                                           double lipschitz) {
    if (!(consts.mu > 0.0)) {
        throw Error(ErrorCode::SingularProblem, "contraction theory needs mu > 0");
    }
    if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) {
        throw Error(ErrorCode::InvalidArgument, "lipschitz constant must be finite and >= 0");
    }
    Certificate c;
    c.name = "contraction";
    c.value = contraction_value(consts, alpha, lambda, lipschitz);
    c.threshold = 1.0;
    c.holds = c.value < 1.0;
    c.detail = "(lambda e/(Gamma(gamma) mu) + 1/Gamma(alpha+1)) * L_f < 1";
    c.annotations.push_back({"q", c.value});
    const double sharp = lambda / (gamma_fn(consts.gamma) * consts.mu * gamma_fn(alpha + 1.0)) * lipschitz +
                         lipschitz / gamma_fn(alpha + 1.0);
    c.annotations.push_back({"sharpened_value", sharp});
    return c;
}

/// Sampled falsification of A1 <= f(t,y) <= A2 on t = i/t_grid, y uniform on [y_lo, y_hi].
inline Certificate check_bounds(const HilferProblem& problem, std::size_t t_grid, std::size_t y_grid, double y_lo,
                                double y_hi) {
    if (!problem.lower_bound || !problem.upper_bound) {
        return not_evaluable("bounds", "A1 and A2 not both supplied");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 1; i <= t_grid; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(t_grid);
        for (std::size_t k = 0; k < y_grid; ++k) {
            const double y = y_lo + (y_hi - y_lo) * static_cast<double>(k) / static_cast<double>(y_grid - 1);
            const double f = problem.rhs(t, y);
            if (!std::isfinite(f)) {
                Certificate c = not_evaluable("bounds", "f not finite at a sample point");
                return c;
            }
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
    }
    Certificate c;
    c.name = "bounds";
    // Signed slack: the worse of (min f - A1) and (A2 - max f); holds iff >= 0.
    c.value = std::min(lo - *problem.lower_bound, *problem.upper_bound - hi);
    c.threshold = 0.0;
    c.holds = c.value >= 0.0;
    c.detail = "sampled min f - A1 and A2 - max f";
    c.annotations.push_back({"sampled_min", lo});
    c.annotations.push_back({"sampled_max", hi});
    return c;
}

struct ReportOptions {
    std::size_t t_grid = 32;
    std::size_t y_grid = 65;
    double y_max = 10.0;
    std::size_t kernel_grid = 1000;
    /// Fall back to a sampled L_f when neither the user nor the catalog supplies one.
    bool estimate_lipschitz = false;
};

/// Lipschitz constant from, in order: the problem, the catalog, sampling (if enabled).
inline std::optional<LipschitzEstimate> resolve_lipschitz(const HilferProblem& problem, const ReportOptions& opts) {
    if (problem.lipschitz) return LipschitzEstimate{*problem.lipschitz, LipschitzEstimate::Method::UserSupplied};
    if (auto l = analytic_lipschitz(problem.rhs.spec)) return LipschitzEstimate{*l, LipschitzEstimate::Method::Analytic};
    if (opts.estimate_lipschitz) return estimate_lipschitz(problem, opts.t_grid, opts.y_grid, 0.0, opts.y_max);
    return std::nullopt;
}

/**
 * Certificates in fixed order: f >= 0 on a sample grid, mu, kernel bound,
 * contraction. Failures are data; only an invalid problem throws.
 */
inline std::vector<Certificate> hypothesis_report(const HilferProblem& problem, const ReportOptions& opts = {}) {
    problem.validate();
    std::vector<Certificate> out;

    {
        Certificate c;
        c.name = "nonnegativity";
        c.threshold = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        bool finite = true;
        for (std::size_t i = 1; i <= opts.t_grid && finite; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(opts.t_grid);
            for (std::size_t k = 0; k < opts.y_grid; ++k) {
                const double y = opts.y_max * static_cast<double>(k) / static_cast<double>(opts.y_grid - 1);
                double f;
                try {
                    f = problem.rhs(t, y);
                } catch (const std::exception&) {
                    f = std::numeric_limits<double>::quiet_NaN();
                }
                if (!std::isfinite(f)) {
                    finite = false;
                    break;
                }
                lo = std::min(lo, f);
            }
        }
        c.value = finite ? lo : std::numeric_limits<double>::quiet_NaN();
        c.holds = finite && lo >= 0.0;
        char range[64];
        std::snprintf(range, sizeof range, "[0, %g]", opts.y_max);
        c.detail = finite ? "sampled min f over (0,1] x " + std::string(range)
                          : "f not finite at a sample point";
        out.push_back(std::move(c));
    }

    const DerivedConstants consts = compute_constants(problem);
    out.push_back(check_mu(consts));
    out.push_back(check_kernel_bound(problem.alpha, opts.kernel_grid));

    if (!(consts.mu > kMuThreshold)) {
        out.push_back(not_evaluable("contraction", "requires mu > 0"));
        return out;
    }
    std::optional<LipschitzEstimate> lip;
    try {
        lip = resolve_lipschitz(problem, opts);
    } catch (const Error& e) {
        out.push_back(not_evaluable("contraction", e.what()));
        return out;
    }
    if (!lip) {
        out.push_back(not_evaluable("contraction", "L_f not supplied and rhs has no known Lipschitz constant"));
        return out;
    }
    Certificate c = contraction_certificate(consts, problem.alpha, problem.lambda, lip->value);
    c.detail += "; L_f " + to_string(lip->method);
    if (lip->needs_confirmation) c.detail += " (lower bound; user must confirm analytically for a sound certificate)";
    out.push_back(std::move(c));
    return out;
}

}  // namespace hilfer

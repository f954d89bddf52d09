#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hilfer/error.hpp"
#include "hilfer/gamma.hpp"

namespace hilfer {

/// Singularity threshold on |mu|.
inline constexpr double kMuThreshold = 1e-12;

/**
 * GradedMesh: nodes t_j = (j/n)^r on [0,1].
 *
 * Grading r > 1 clusters nodes near the origin where both the t^(gamma-1)
 * solution weight and the (t-s)^(alpha-1) kernel are singular. r = 1 is
 * the uniform mesh.
 */
class GradedMesh {
public:
    GradedMesh(std::size_t n, double r) : n_(n), r_(r) {
        if (n < 1) {
            throw Error(ErrorCode::InvalidArgument, "mesh needs at least one interval");
        }
        if (!std::isfinite(r) || r < 1.0) {
            throw Error(ErrorCode::InvalidArgument, "grading exponent must be >= 1");
        }
        nodes_.resize(n + 1);
        const double dn = static_cast<double>(n);
        for (std::size_t j = 0; j <= n; ++j) {
            nodes_[j] = std::pow(static_cast<double>(j) / dn, r);
        }
        nodes_[0] = 0.0;
        nodes_[n] = 1.0;
    }

    /// Grading that resolves a t^(gamma-1) endpoint singularity.
    static double default_grading(double gamma) { return std::max(1.0, 2.0 / gamma); }

    static std::shared_ptr<const GradedMesh> make(std::size_t n, double r) {
        return std::make_shared<const GradedMesh>(n, r);
    }

    std::size_t n() const { return n_; }
    double r() const { return r_; }
    std::size_t size() const { return nodes_.size(); }
    double operator[](std::size_t j) const { return nodes_[j]; }
    std::span<const double> nodes() const { return nodes_; }

    bool same_as(const GradedMesh& other) const { return n_ == other.n_ && r_ == other.r_; }

private:
    std::size_t n_;
    double r_;
    std::vector<double> nodes_;
};

using MeshPtr = std::shared_ptr<const GradedMesh>;

/**
 * WeightedGridFunction: samples w_j of w(t) = t^(1-gamma) y(t).
 *
 * The weighted values stay bounded at t = 0 even though y itself blows up
 * like t^(gamma-1), so w_0 is an ordinary unknown. gamma = 1 gives plain
 * samples of y.
 */
class WeightedGridFunction {
public:
    WeightedGridFunction(MeshPtr mesh, double gamma, std::vector<double> values)
        : mesh_(std::move(mesh)), gamma_(gamma), values_(std::move(values)) {
        if (!mesh_) {
            throw Error(ErrorCode::InvalidArgument, "null mesh");
        }
        if (!(gamma_ > 0.0 && gamma_ <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "weight exponent gamma must lie in (0,1]");
        }
        if (values_.size() != mesh_->size()) {
            throw Error(ErrorCode::MeshMismatch,
                        "expected " + std::to_string(mesh_->size()) + " samples, got " +
                            std::to_string(values_.size()));
        }
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::InvalidArgument, "grid function samples must be finite");
            }
        }
    }

    static WeightedGridFunction constant(MeshPtr mesh, double gamma, double c) {
        const std::size_t size = mesh->size();
        return {std::move(mesh), gamma, std::vector<double>(size, c)};
    }

    template <typename Fn>
    static WeightedGridFunction sample(MeshPtr mesh, double gamma, Fn&& weighted_fn) {
        std::vector<double> v(mesh->size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = weighted_fn((*mesh)[j]);
        return {std::move(mesh), gamma, std::move(v)};
    }

    const GradedMesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    double gamma() const { return gamma_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t j) const { return values_[j]; }

    /// Unweighted y(t_j) for j >= 1.
    double physical_at_node(std::size_t j) const {
        return std::pow((*mesh_)[j], gamma_ - 1.0) * values_[j];
    }

    bool in_cone(double slack = 0.0) const {
        return std::all_of(values_.begin(), values_.end(), [slack](double v) { return v >= -slack; });
    }

private:
    MeshPtr mesh_;
    double gamma_;
    std::vector<double> values_;
};

/// max_j |w_j|, the discrete C_{1-gamma} norm.
inline double weighted_norm(const WeightedGridFunction& w) {
    double m = 0.0;
    for (double v : w.values()) m = std::max(m, std::abs(v));
    return m;
}

/// weighted_norm of a - b; both must live on the same mesh.
inline double weighted_distance(const WeightedGridFunction& a, const WeightedGridFunction& b) {
    if (!a.mesh().same_as(b.mesh()) || a.size() != b.size()) {
        throw Error(ErrorCode::MeshMismatch, "grid functions live on different meshes");
    }
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

/// y(t) = t^(gamma-1) w(t) with w interpolated linearly between nodes.
inline double to_physical(const WeightedGridFunction& w, double t) {
    if (!(t > 0.0 && t <= 1.0)) {
        throw Error(ErrorCode::OutOfDomain, "to_physical requires t in (0,1]");
    }
    const auto nodes = w.mesh().nodes();
    auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
    std::size_t hi = it == nodes.end() ? nodes.size() - 1 : static_cast<std::size_t>(it - nodes.begin());
    std::size_t lo = hi - 1;
    const double theta = (t - nodes[lo]) / (nodes[hi] - nodes[lo]);
    const double wt = (1.0 - theta) * w[lo] + theta * w[hi];
    return w.gamma() == 1.0 ? wt : std::pow(t, w.gamma() - 1.0) * wt;
}

// Right-hand side catalog descriptors. The descriptor travels with the
// callable so that oracles and certificates can use closed-form facts.
struct ConstantRhs {
    double c = 0.0;
};
struct LinearRhs {  // a*y + b
    double a = 0.0;
    double b = 0.0;
};
struct PowerRhs {  // t^(sigma-1)
    double sigma = 1.0;
};
struct LogisticRhs {  // offset + scale * y/(1+y)
    double offset = 0.0;
    double scale = 1.0;
};
struct ExpressionRhs {
    std::string text;
};
struct CustomRhs {};

using RhsSpec = std::variant<ConstantRhs, LinearRhs, PowerRhs, LogisticRhs, ExpressionRhs, CustomRhs>;

/// f(t, y). The callable must be re-entrant.
struct Rhs {
    std::function<double(double, double)> eval;
    RhsSpec spec = CustomRhs{};

    double operator()(double t, double y) const { return eval(t, y); }
};

/// gamma = alpha + beta(1 - alpha), pinned exactly at the beta endpoints.
inline double composite_order(double alpha, double beta) {
    if (beta == 0.0) return alpha;
    if (beta == 1.0) return 1.0;
    return std::min(1.0, alpha + beta * (1.0 - alpha));
}

/**
 * HilferProblem: D^{alpha,beta} y = f(t,y) on (0,1] with
 * I^{1-gamma} y(0) = lambda * int_0^1 y + d.
 */
struct HilferProblem {
    double alpha = 0.5;
    double beta = 0.0;
    double lambda = 0.0;
    double d = 0.0;
    Rhs rhs;
    std::optional<double> lipschitz;
    std::optional<double> lower_bound;
    std::optional<double> upper_bound;

    double gamma() const { return composite_order(alpha, beta); }

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0,1]");
        }
        if (!(beta >= 0.0 && beta <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "beta must lie in [0,1]");
        }
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
        }
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw Error(ErrorCode::InvalidArgument, "d must be >= 0");
        }
        if (!rhs.eval) {
            throw Error(ErrorCode::InvalidArgument, "right-hand side is not set");
        }
        if (lipschitz && !(*lipschitz > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "lipschitz constant must be > 0");
        }
        if (lower_bound && !(*lower_bound >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "lower bound A1 must be >= 0");
        }
        if (upper_bound && !(*upper_bound > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "upper bound A2 must be > 0");
        }
        if (lower_bound && upper_bound && *lower_bound > *upper_bound) {
            throw Error(ErrorCode::InvalidArgument, "bounds must satisfy A1 <= A2");
        }
    }
};

struct DerivedConstants {
    double gamma = 1.0;
    double mu = 1.0;
    double capital_lambda = 0.0;

    bool mu_positive() const { return mu > 0.0; }
};

/// gamma, mu and Lambda without the |mu| check; Lambda is inf/nan when mu == 0.
inline DerivedConstants compute_constants(const HilferProblem& p) {
    DerivedConstants c;
    c.gamma = composite_order(p.alpha, p.beta);
    const double g_gamma = gamma_fn(c.gamma);
    const double g_gamma1 = gamma_fn(c.gamma + 1.0);
    c.mu = 1.0 - p.lambda / g_gamma1;
    c.capital_lambda = (p.lambda / (c.mu * g_gamma * g_gamma1) + 1.0 / g_gamma) * p.d;
    return c;
}

inline DerivedConstants derive_constants(const HilferProblem& p) {
    p.validate();
    DerivedConstants c = compute_constants(p);
    if (std::abs(c.mu) < kMuThreshold) {
        throw Error(ErrorCode::SingularProblem,
                    "mu = 1 - lambda/Gamma(gamma+1) vanishes; the equivalence with the integral "
                    "equation requires mu != 0");
    }
    return c;
}

}  // namespace hilfer

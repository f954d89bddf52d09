#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "hilfer/core_types.hpp"
#include "hilfer/error.hpp"
#include "hilfer/gamma.hpp"

namespace hilfer {

enum class Scheme { ProductRectangle, ProductTrapezoidal };

/// Discretization of the convolution integrals: a scheme on a mesh.
struct QuadratureRule {
    Scheme scheme = Scheme::ProductTrapezoidal;
    MeshPtr mesh;
};

namespace detail {

struct CellMoments {
    double a0;  // int_a^b (t-s)^(order-1) ds
    double a1;  // int_a^b (t-s)^(order-1) (s-a)/h ds
};

/**
 * Moments of the kernel (t-s)^(order-1) over a cell [a, a+h] seen from a
 * target t with D = t - a >= h.
 *
 * The textbook closed form subtracts nearly equal powers when the cell is
 * far from t (h << D). There we expand (1 - v)^(order-1) in v = (s-a)/D
 * instead, which converges geometrically for h/D <= 1/2.
 */
inline CellMoments cell_moments(double dist, double h, double order) {
    const double x = h / dist;
    if (x > 0.5) {
        const double rest = std::max(dist - h, 0.0);
        const double pa = std::pow(dist, order);
        const double pb = rest > 0.0 ? std::pow(rest, order) : 0.0;
        const double a0 = (pa - pb) / order;
        const double m1 = (pa * dist - pb * rest) / (order + 1.0);
        return {a0, (dist * a0 - m1) / h};
    }
    double coef = 1.0;
    double xk = 1.0;
    double s0 = 0.0;
    double s1 = 0.0;
    for (int k = 0; k < 400; ++k) {
        const double t0 = coef * xk / (k + 1);
        s0 += t0;
        s1 += coef * xk / (k + 2);
        if (std::abs(t0) <= 1e-17 * std::abs(s0)) break;
        coef *= (k + 1 - order) / (k + 1);
        xk *= x;
    }
    const double scale = std::pow(dist, order - 1.0) * h;
    return {scale * s0, scale * s1};
}

inline double complete_beta(double p, double q) {
    return std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q));
}

/// Unnormalized lower incomplete beta int_0^x u^(p-1) (1-u)^(q-1) du.
inline double incomplete_beta(double x, double p, double q) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return complete_beta(p, q);
    if (x > 0.5) return complete_beta(p, q) - incomplete_beta(1.0 - x, q, p);
    double coef = 1.0;
    double xk = 1.0;
    double sum = 0.0;
    for (int k = 0; k < 400; ++k) {
        const double term = coef * xk / (p + k);
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
        coef *= (k + 1 - q) / (k + 1);
        xk *= x;
    }
    return std::pow(x, p) * sum;
}

/**
 * Cumulative kernel integrals int_0^{t_k} (t-s)^(order-1) s^(p-1) ds for all
 * nodes k <= i, target t = t_i, kept in a form whose successive differences
 * do not cancel: the lower incomplete beta while t_k/t <= 1/2, the
 * complementary tail beyond that.
 */
class CumulativeBeta {
public:
    CumulativeBeta(std::span<const double> nodes, std::size_t i, double order, double p)
        : full_(complete_beta(p, order)), scale_(std::pow(nodes[i], order + p - 1.0)) {
        value_.resize(i + 1);
        upper_.resize(i + 1);
        const double t = nodes[i];
        for (std::size_t k = 0; k <= i; ++k) {
            const double x = nodes[k] / t;
            upper_[k] = x > 0.5;
            value_[k] = upper_[k] ? incomplete_beta(1.0 - x, order, p) : incomplete_beta(x, p, order);
        }
    }

    /// int_{t_k}^{t_{k+1}} (t-s)^(order-1) s^(p-1) ds.
    double cell(std::size_t k) const {
        double diff;
        if (upper_[k] && upper_[k + 1]) {
            diff = value_[k] - value_[k + 1];
        } else if (!upper_[k] && !upper_[k + 1]) {
            diff = value_[k + 1] - value_[k];
        } else {
            diff = (full_ - value_[k + 1]) - value_[k];
        }
        return scale_ * diff;
    }

private:
    double full_;
    double scale_;
    std::vector<double> value_;
    std::vector<bool> upper_;
};

/**
 * Product-integration row for target node i: coefficients c_k such that
 * t_i^(1-gamma) (I^order g)(t_i) ~= sum_k c_k w_k, where g(s) = s^(gamma-1) w(s).
 *
 * Trapezoidal: on each cell g is reconstructed as A s^(gamma-1) + B through
 * the two node values, so both the t^(gamma-1) singular part and constants
 * are integrated exactly; on the first cell A is the weighted origin sample
 * w_0. Rectangle: g is the right node value, and s^(gamma-1) w_1 on the first
 * cell. For gamma = 1 both reduce to the plain product rules with moments
 * built from powers of node distances. Cells where s^(gamma-1) is flat to
 * 1e-8 fall back to the plain linear reconstruction.
 */
inline void product_row(const GradedMesh& mesh, double order, double gamma, Scheme scheme,
                        std::size_t i, std::span<double> row) {
    std::fill(row.begin(), row.end(), 0.0);
    if (i == 0) return;
    const double t = mesh[i];
    const bool trapezoid = scheme == Scheme::ProductTrapezoidal;

    if (gamma < 1.0) {
        const CumulativeBeta m0(mesh.nodes(), i, order, gamma);
        {
            const double t1 = mesh[1];
            const double p0 = m0.cell(0);
            const double e1 = std::pow(t1, gamma - 1.0);
            if (trapezoid) {
                const double a0 = cell_moments(t, t1, order).a0;
                row[0] += p0 - e1 * a0;
                row[1] += e1 * a0;
            } else {
                row[1] += p0;
            }
        }
        for (std::size_t k = 1; k < i; ++k) {
            const double a = mesh[k];
            const double b = mesh[k + 1];
            const auto m = cell_moments(t - a, b - a, order);
            const double ea = std::pow(a, gamma - 1.0);
            const double eb = std::pow(b, gamma - 1.0);
            if (!trapezoid) {
                row[k + 1] += m.a0 * eb;
                continue;
            }
            const double den = ea - eb;
            if (den > 1e-8 * ea) {
                const double p0 = m0.cell(k);
                row[k] += (p0 - eb * m.a0) / den * ea;
                row[k + 1] += (ea * m.a0 - p0) / den * eb;
            } else {
                row[k] += (m.a0 - m.a1) * ea;
                row[k + 1] += m.a1 * eb;
            }
        }
    } else {
        for (std::size_t k = 0; k < i; ++k) {
            const double a = mesh[k];
            const auto m = cell_moments(t - a, mesh[k + 1] - a, order);
            if (trapezoid) {
                row[k] += m.a0 - m.a1;
                row[k + 1] += m.a1;
            } else {
                row[k + 1] += m.a0;
            }
        }
    }

    const double scale = (gamma < 1.0 ? std::pow(t, 1.0 - gamma) : 1.0) / gamma_fn(order);
    for (double& c : row) c *= scale;
}

}  // namespace detail

/**
 * ProductIntegrator: precomputed product-quadrature weights for I^order
 * acting on weighted grid functions of a fixed weight exponent gamma.
 *
 * Maps C_{1-gamma} samples to C_{1-gamma} samples: input w_k with
 * g = t^(gamma-1) w, output t_i^(1-gamma) (I^order g)(t_i). The output at
 * the origin is the limit value 0. Weights are stored as a packed lower
 * triangle, so construction is O(n^2) and apply is one triangular matvec.
 */
class ProductIntegrator {
public:
    ProductIntegrator(MeshPtr mesh, double order, double gamma,
                      Scheme scheme = Scheme::ProductTrapezoidal)
        : mesh_(std::move(mesh)), order_(order), gamma_(gamma), scheme_(scheme) {
        if (!mesh_) throw Error(ErrorCode::InvalidArgument, "null mesh");
        if (!(order > 0.0) || !std::isfinite(order)) {
            throw Error(ErrorCode::OutOfDomain, "integral order must be > 0");
        }
        if (!(gamma > 0.0 && gamma <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "weight exponent must lie in (0,1]");
        }
        const std::size_t n = mesh_->n();
        weights_.resize((n + 1) * (n + 2) / 2);
        for (std::size_t i = 1; i <= n; ++i) {
            detail::product_row(*mesh_, order_, gamma_, scheme_, i, row_mut(i));
        }
    }

    const GradedMesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    double order() const { return order_; }
    double gamma() const { return gamma_; }
    Scheme scheme() const { return scheme_; }

    std::span<const double> row(std::size_t i) const {
        return {weights_.data() + offset(i), i + 1};
    }

    std::vector<double> apply(std::span<const double> w) const {
        if (w.size() != mesh_->size()) {
            throw Error(ErrorCode::MeshMismatch, "sample count differs from mesh node count");
        }
        std::vector<double> out(w.size(), 0.0);
        for (std::size_t i = 1; i < w.size(); ++i) {
            const auto r = row(i);
            double acc = 0.0;
            for (std::size_t k = 0; k <= i; ++k) acc += r[k] * w[k];
            out[i] = acc;
        }
        return out;
    }

    WeightedGridFunction apply(const WeightedGridFunction& g) const {
        if (!g.mesh().same_as(*mesh_) || g.gamma() != gamma_) {
            throw Error(ErrorCode::MeshMismatch, "grid function does not match integrator mesh/weight");
        }
        return {mesh_, gamma_, apply(g.values())};
    }

private:
    static std::size_t offset(std::size_t i) { return i * (i + 1) / 2; }
    std::span<double> row_mut(std::size_t i) { return {weights_.data() + offset(i), i + 1}; }

    MeshPtr mesh_;
    double order_;
    double gamma_;
    Scheme scheme_;
    std::vector<double> weights_;
};

namespace detail {

inline void require_rule_matches(const WeightedGridFunction& g, const QuadratureRule& rule) {
    if (!rule.mesh) throw Error(ErrorCode::InvalidArgument, "quadrature rule without mesh");
    if (g.size() != rule.mesh->size() || !g.mesh().same_as(*rule.mesh)) {
        throw Error(ErrorCode::MeshMismatch, "sample count differs from mesh node count");
    }
}

inline void require_nodes(const GradedMesh& mesh) {
    if (mesh.n() < 4) {
        throw Error(ErrorCode::InsufficientNodes, "fractional derivatives need n >= 4 intervals");
    }
}

/**
 * Three-point derivative on a nonuniform mesh: centered in the interior,
 * one-sided at the ends. A non-finite origin value is skipped: node 0 is
 * reported as NaN and node 1 uses a forward stencil.
 */
inline std::vector<double> differentiate(std::span<const double> t, std::span<const double> v) {
    const std::size_t n = t.size() - 1;
    std::vector<double> d(n + 1, 0.0);
    auto forward = [&](std::size_t i) {
        const double h1 = t[i + 1] - t[i];
        const double h2 = t[i + 2] - t[i + 1];
        return -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * v[i] + (h1 + h2) / (h1 * h2) * v[i + 1] -
               h1 / (h2 * (h1 + h2)) * v[i + 2];
    };
    auto centered = [&](std::size_t i) {
        const double h1 = t[i] - t[i - 1];
        const double h2 = t[i + 1] - t[i];
        return -h2 / (h1 * (h1 + h2)) * v[i - 1] + (h2 - h1) / (h1 * h2) * v[i] +
               h1 / (h2 * (h1 + h2)) * v[i + 1];
    };
    const bool origin_ok = std::isfinite(v[0]);
    d[0] = origin_ok ? forward(0) : std::numeric_limits<double>::quiet_NaN();
    d[1] = origin_ok ? centered(1) : forward(1);
    for (std::size_t i = 2; i < n; ++i) d[i] = centered(i);
    {
        const double h1 = t[n - 1] - t[n - 2];
        const double h2 = t[n] - t[n - 1];
        d[n] = h2 / (h1 * (h1 + h2)) * v[n - 2] - (h1 + h2) / (h1 * h2) * v[n - 1] +
               (2.0 * h2 + h1) / (h2 * (h1 + h2)) * v[n];
    }
    return d;
}

/// Plain node values of g = t^(gamma-1) w; the origin holds the limit (possibly infinite).
inline std::vector<double> plain_values(const WeightedGridFunction& g) {
    std::vector<double> y(g.size());
    for (std::size_t j = 1; j < g.size(); ++j) y[j] = g.physical_at_node(j);
    if (g.gamma() == 1.0 || g[0] == 0.0) {
        y[0] = g.gamma() == 1.0 ? g[0] : 0.0;
    } else {
        y[0] = std::copysign(std::numeric_limits<double>::infinity(), g[0]);
    }
    return y;
}

/**
 * Plain node values of v = I^order g from its weighted representation u.
 * Near the origin v ~ c t^(gamma - 1 + order), which fixes the limit at t = 0.
 */
inline std::vector<double> unweight_integral(const WeightedGridFunction& g,
                                             std::span<const double> u, double order) {
    const GradedMesh& mesh = g.mesh();
    std::vector<double> v(u.size());
    for (std::size_t j = 1; j < u.size(); ++j) {
        v[j] = g.gamma() == 1.0 ? u[j] : std::pow(mesh[j], g.gamma() - 1.0) * u[j];
    }
    const double e = g.gamma() - 1.0 + order;
    if (e > 1e-14 || g[0] == 0.0) {
        v[0] = 0.0;
    } else if (e >= -1e-14) {
        v[0] = gamma_fn(g.gamma()) * g[0];
    } else {
        v[0] = std::copysign(std::numeric_limits<double>::infinity(), g[0]);
    }
    return v;
}

/// v = d/dt I^(1-order) g as plain node values.
inline std::vector<double> derivative_of_integral(const WeightedGridFunction& g, double order,
                                                  Scheme scheme) {
    std::vector<double> v;
    if (order >= 1.0) {
        v = plain_values(g);
    } else {
        ProductIntegrator integ(g.mesh_ptr(), 1.0 - order, g.gamma(), scheme);
        v = unweight_integral(g, integ.apply(g.values()), 1.0 - order);
    }
    return differentiate(g.mesh().nodes(), v);
}

}  // namespace detail

/// Riemann-Liouville integral I^order g, returned in the same weighted representation as g.
inline WeightedGridFunction rl_integral(double order, const WeightedGridFunction& g,
                                        const QuadratureRule& rule) {
    detail::require_rule_matches(g, rule);
    ProductIntegrator integ(rule.mesh, order, g.gamma(), rule.scheme);
    return integ.apply(g);
}

/**
 * Riemann-Liouville derivative D^order g = d/dt I^(1-order) g as plain node
 * values. Entry 0 is a one-sided estimate, or NaN when I^(1-order) g is
 * unbounded at the origin.
 */
inline std::vector<double> rl_derivative(double order, const WeightedGridFunction& g,
                                         const QuadratureRule& rule) {
    if (!(order > 0.0 && order < 1.0)) {
        throw Error(ErrorCode::OutOfDomain, "derivative order must lie in (0,1)");
    }
    detail::require_rule_matches(g, rule);
    detail::require_nodes(*rule.mesh);
    return detail::derivative_of_integral(g, order, rule.scheme);
}

/**
 * Hilfer derivative D^{alpha,beta} g = I^{beta(1-alpha)} D I^{1-gamma} g as
 * plain node values. The intermediate D^gamma g is carried in C_{1-gamma}
 * form with its origin sample copied from node 1. Entry 0 is NaN whenever
 * the outer integral is applied.
 */
inline std::vector<double> hilfer_derivative(double alpha, double beta, const WeightedGridFunction& g,
                                             const QuadratureRule& rule) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::OutOfDomain, "Hilfer order alpha must lie in (0,1)");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw Error(ErrorCode::OutOfDomain, "Hilfer type beta must lie in [0,1]");
    }
    detail::require_rule_matches(g, rule);
    detail::require_nodes(*rule.mesh);

    const double gamma = composite_order(alpha, beta);
    std::vector<double> d = detail::derivative_of_integral(g, gamma, rule.scheme);
    const double outer = beta * (1.0 - alpha);
    if (outer == 0.0) return d;

    const GradedMesh& mesh = *rule.mesh;
    std::vector<double> psi(d.size());
    for (std::size_t i = 1; i < d.size(); ++i) {
        psi[i] = gamma == 1.0 ? d[i] : std::pow(mesh[i], 1.0 - gamma) * d[i];
    }
    psi[0] = (gamma == 1.0 && std::isfinite(d[0])) ? d[0] : psi[1];

    ProductIntegrator integ(rule.mesh, outer, gamma, rule.scheme);
    std::vector<double> out = integ.apply(psi);
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (gamma != 1.0) out[i] *= std::pow(mesh[i], gamma - 1.0);
    }
    out[0] = std::numeric_limits<double>::quiet_NaN();
    return out;
}

/// Caputo derivative I^(1-order) g' with g' by three-point differences; g must be bounded at 0.
inline std::vector<double> caputo_derivative(double order, const WeightedGridFunction& g,
                                             const QuadratureRule& rule) {
    if (!(order > 0.0 && order < 1.0)) {
        throw Error(ErrorCode::OutOfDomain, "derivative order must lie in (0,1)");
    }
    detail::require_rule_matches(g, rule);
    detail::require_nodes(*rule.mesh);
    const std::vector<double> y = detail::plain_values(g);
    if (!std::isfinite(y[0])) {
        throw Error(ErrorCode::OutOfDomain, "Caputo derivative needs a function bounded at the origin");
    }
    const std::vector<double> dy = detail::differentiate(rule.mesh->nodes(), y);
    ProductIntegrator integ(rule.mesh, 1.0 - order, 1.0, rule.scheme);
    return integ.apply(dy);
}

/// Q(tau) = int_tau^1 (s - tau)^(alpha-1) ds = (1 - tau)^alpha / alpha.
inline double q_kernel(double tau, double alpha) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::OutOfDomain, "tau must lie in [0,1]");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::OutOfDomain, "alpha must lie in (0,1]");
    return std::pow(1.0 - tau, alpha) / alpha;
}

/**
 * Weights c_k with sum_k c_k phi_k ~= int_0^1 Q(tau)/Gamma(alpha) f(tau) dtau,
 * for f = t^(gamma-1) phi. Since Q/Gamma(alpha) = (1-tau)^alpha/Gamma(alpha+1),
 * this functional is I^(alpha+1) f evaluated at t = 1.
 */
inline std::vector<double> boundary_functional_weights(const MeshPtr& mesh, double alpha, double gamma,
                                                       Scheme scheme = Scheme::ProductTrapezoidal) {
    std::vector<double> row(mesh->size());
    detail::product_row(*mesh, alpha + 1.0, gamma, scheme, mesh->n(), row);
    return row;
}

}  // namespace hilfer

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hilfer/fracops.hpp"
#include "oracles.hpp"

using namespace hilfer;

namespace {

QuadratureRule rule_on(std::size_t n, double r, Scheme s = Scheme::ProductTrapezoidal) {
    return {s, GradedMesh::make(n, r)};
}

// Plain samples (gamma = 1) of g.
template <typename G>
WeightedGridFunction plain(const QuadratureRule& rule, G g) {
    return WeightedGridFunction::sample(rule.mesh, 1.0, g);
}

double max_error_from(const std::vector<double>& got, const GradedMesh& mesh, double t_min,
                      const std::function<double(double)>& exact) {
    double e = 0.0;
    for (std::size_t i = 1; i < mesh.size(); ++i) {
        if (mesh[i] >= t_min) e = std::max(e, std::abs(got[i] - exact(mesh[i])));
    }
    return e;
}

std::vector<double> values(const WeightedGridFunction& g) { return {g.values().begin(), g.values().end()}; }

// A smooth random function: a few low-frequency modes plus a quadratic.
struct RandomSmooth {
    double c[4], k[4], ph[4], p0, p1, p2;
    explicit RandomSmooth(std::mt19937& rng) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int m = 0; m < 4; ++m) {
            c[m] = u(rng);
            k[m] = 1.0 + 2.0 * m + u(rng);
            ph[m] = 3.0 * u(rng);
        }
        p0 = u(rng);
        p1 = u(rng);
        p2 = u(rng);
    }
    double operator()(double t) const {
        double s = p0 + p1 * t + p2 * t * t;
        for (int m = 0; m < 4; ++m) s += c[m] * std::cos(k[m] * t + ph[m]);
        return s;
    }
};

}  // namespace

TEST(RlIntegral, ZeroMapsToZero) {
    auto rule = rule_on(32, 2.0);
    auto out = rl_integral(0.4, WeightedGridFunction::constant(rule.mesh, 0.7, 0.0), rule);
    for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(RlIntegral, OrderOneOfConstantIsExact) {
    auto rule = rule_on(16, 1.7);
    auto out = rl_integral(1.0, plain(rule, [](double) { return 2.5; }), rule);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], 2.5 * (*rule.mesh)[i], 1e-15);
}

TEST(RlIntegral, PowerRuleExample) {
    auto rule = rule_on(1024, 2.0 / 1.5);
    auto out = rl_integral(0.5, plain(rule, [](double t) { return std::sqrt(t); }), rule);
    EXPECT_NEAR(out[1024], oracle::gamma(1.5) / oracle::gamma(2.0), 1e-6);
    EXPECT_NEAR(out[1024], 0.8862269, 1e-6);
}

TEST(RlIntegral, PowerRuleConvergesSecondOrder) {
    for (double a : {0.3, 0.5, 0.9}) {
        for (double sigma : {1.0, 1.5, 2.0}) {
            const double coef = oracle::gamma(sigma) / oracle::gamma(a + sigma);
            auto exact = [&](double t) { return coef * std::pow(t, a + sigma - 1.0); };
            double prev = 0.0;
            for (std::size_t n : {64, 128, 256}) {
                auto rule = rule_on(n, std::max(1.0, 2.0 / a));
                auto out = rl_integral(a, plain(rule, [&](double t) { return std::pow(t, sigma - 1.0); }), rule);
                const double e = max_error_from(values(out), *rule.mesh, 0.0, exact);
                if (prev > 1e-13) {
                    EXPECT_GT(prev / e, 3.0) << a << " " << sigma << " n=" << n;
                }
                prev = e;
            }
            EXPECT_LT(prev, 1e-4);
        }
    }
}

TEST(RlIntegral, WeightedSingularPowerIsExact) {
    // I^a t^(gamma-1) = Gamma(gamma)/Gamma(gamma+a) t^(gamma+a-1); in weighted form w == 1 maps to a power of t.
    for (double g : {0.3, 0.75}) {
        for (double a : {0.2, 0.6, 1.4}) {
            auto rule = rule_on(40, 2.0 / g);
            auto out = rl_integral(a, WeightedGridFunction::constant(rule.mesh, g, 1.0), rule);
            const double coef = oracle::gamma(g) / oracle::gamma(g + a);
            for (std::size_t i = 1; i < out.size(); ++i) {
                EXPECT_NEAR(out[i], coef * std::pow((*rule.mesh)[i], a), 1e-12) << g << " " << a << " " << i;
            }
            EXPECT_EQ(out[0], 0.0);
        }
    }
}

TEST(RlIntegral, WeightedConstantIsExact) {
    // g == 1 in C_{1-gamma} form: w = t^(1-gamma), so I^a 1 = t^a/Gamma(a+1).
    const double g = 0.6;
    auto rule = rule_on(64, 2.0 / g);
    auto w = WeightedGridFunction::sample(rule.mesh, g, [&](double t) { return std::pow(t, 1.0 - g); });
    auto out = rl_integral(0.45, w, rule);
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double t = (*rule.mesh)[i];
        EXPECT_NEAR(out[i], std::pow(t, 1.0 - g) * std::pow(t, 0.45) / oracle::gamma(1.45), 1e-13);
    }
}

TEST(RlIntegral, MatchesDirectQuadratureOnSmoothInput) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        RandomSmooth g(rng);
        for (double a : {0.3, 0.7}) {
            double prev = 0.0;
            for (std::size_t n : {256, 512}) {
                auto rule = rule_on(n, 2.0);
                auto out = rl_integral(a, plain(rule, g), rule);
                double e = 0.0;
                for (std::size_t i : {n / 4, n / 2, n}) {
                    e = std::max(e, std::abs(out[i] - oracle::rl_integral(g, a, (*rule.mesh)[i])));
                }
                if (prev > 0.0) {
                    EXPECT_GT(prev / e, 3.0) << a;
                }
                prev = e;
            }
            EXPECT_LT(prev, 5e-5) << a;
        }
    }
}

TEST(RlIntegral, RectangleIsFirstOrder) {
    auto exact = [](double t) { return std::pow(t, 1.5) / oracle::gamma(2.5); };
    double prev = 0.0;
    for (std::size_t n : {128, 256, 512}) {
        auto rule = rule_on(n, 1.0, Scheme::ProductRectangle);
        auto out = rl_integral(0.5, plain(rule, [](double t) { return t; }), rule);
        const double e = max_error_from(values(out), *rule.mesh, 0.0, exact);
        if (prev > 0.0) {
            EXPECT_GT(prev / e, 1.8);
        }
        prev = e;
    }
    EXPECT_LT(prev, 5e-3);
}

TEST(RlIntegral, Linear) {
    std::mt19937 rng(3);
    RandomSmooth f(rng), g(rng);
    auto rule = rule_on(64, 2.0);
    auto a = rl_integral(0.4, plain(rule, f), rule);
    auto b = rl_integral(0.4, plain(rule, g), rule);
    auto ab = rl_integral(0.4, plain(rule, [&](double t) { return 2.0 * f(t) - 3.0 * g(t); }), rule);
    for (std::size_t i = 0; i < ab.size(); ++i) EXPECT_NEAR(ab[i], 2.0 * a[i] - 3.0 * b[i], 1e-13);
}

TEST(RlIntegral, VanishesAtFirstNodeAsMeshRefines) {
    // For bounded g, I^a g(t_1) ~ g(0) t_1^a / Gamma(a+1) -> 0.
    double prev = 1.0;
    for (std::size_t n : {16, 64, 256, 1024}) {
        auto rule = rule_on(n, 2.0);
        auto out = rl_integral(0.3, plain(rule, [](double t) { return 1.0 + std::sin(5 * t); }), rule);
        const double t1 = (*rule.mesh)[1];
        EXPECT_LT(std::abs(out[1]), prev);
        EXPECT_NEAR(out[1], std::pow(t1, 0.3) / oracle::gamma(1.3), 5.0 * t1);
        prev = std::abs(out[1]);
    }
}

TEST(RlIntegral, RejectsMismatchAndBadOrder) {
    auto rule = rule_on(16, 2.0);
    auto other = WeightedGridFunction::constant(GradedMesh::make(16, 1.0), 1.0, 1.0);
    try {
        rl_integral(0.5, other, rule);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MeshMismatch);
    }
    auto g = WeightedGridFunction::constant(rule.mesh, 1.0, 1.0);
    EXPECT_THROW(rl_integral(0.0, g, rule), Error);
    EXPECT_THROW(rl_integral(-0.5, g, rule), Error);
}

TEST(Semigroup, RandomSmoothInputs) {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 3; ++trial) {
        RandomSmooth g(rng);
        for (double a : {0.3, 0.5, 0.7}) {
            for (double b : {0.3, 0.5, 0.7}) {
                double prev = 0.0;
                for (std::size_t n : {128, 256}) {
                    auto rule = rule_on(n, 2.0);
                    auto x = plain(rule, g);
                    auto lhs = rl_integral(a, rl_integral(b, x, rule), rule);
                    auto rhs = rl_integral(a + b, x, rule);
                    double e = 0.0;
                    for (std::size_t i = 0; i < lhs.size(); ++i) e = std::max(e, std::abs(lhs[i] - rhs[i]));
                    EXPECT_LT(e, 2e-3);
                    if (prev > 1e-12) {
                        EXPECT_GT(prev / e, 2.0) << a << " " << b;
                    }
                    prev = e;
                }
            }
        }
    }
}

TEST(Semigroup, WeightedInputs) {
    const double g = 0.65;
    double prev = 0.0;
    for (std::size_t n : {128, 256, 512}) {
        auto rule = rule_on(n, 2.0 / g);
        auto w = WeightedGridFunction::sample(rule.mesh, g, [](double t) { return 1.0 + t * std::cos(3 * t); });
        auto lhs = rl_integral(0.3, rl_integral(0.5, w, rule), rule);
        auto rhs = rl_integral(0.8, w, rule);
        const double e = weighted_distance(lhs, rhs);
        if (prev > 0.0) {
            EXPECT_GT(prev / e, 3.0);
        }
        prev = e;
    }
    EXPECT_LT(prev, 1e-5);
}

TEST(RlDerivative, AnnihilatesSingularPower) {
    // D^a t^(a-1) = 0: in C_{1-a} form the input is w == 1.
    for (double a : {0.3, 0.5, 0.8}) {
        auto rule = rule_on(256, 2.0 / a);
        const GradedMesh& m = *rule.mesh;
        auto d = rl_derivative(a, WeightedGridFunction::constant(rule.mesh, a, 1.0), rule);
        // I^(1-a) t^(a-1) = Gamma(a) exactly; what remains is rounding of that constant
        // divided by the local step, which only matters on the tiny cells next to 0.
        for (std::size_t i = 1; i < d.size(); ++i) {
            const double h = std::min(m[i] - m[i - 1], i + 1 < m.size() ? m[i + 1] - m[i] : 1.0);
            EXPECT_LE(std::abs(d[i]), 1e-8 + 16.0 * 2.2e-16 * gamma_fn(a) / h) << a << " " << i;
            if (m[i] >= 1e-3) {
                EXPECT_NEAR(d[i], 0.0, 1e-8);
            }
        }
    }
}

TEST(RlDerivative, OfIdentity) {
    auto rule = rule_on(512, 2.0);
    auto d = rl_derivative(0.5, plain(rule, [](double t) { return t; }), rule);
    const double c = 1.0 / oracle::gamma(1.5);
    EXPECT_NEAR(c, 1.1283792, 1e-7);
    EXPECT_LT(max_error_from(d, *rule.mesh, 0.01, [&](double t) { return c * std::sqrt(t); }), 1e-4);
}

TEST(RlDerivative, OfZeroAndOfConstant) {
    auto rule = rule_on(256, 2.0);
    auto z = rl_derivative(0.4, WeightedGridFunction::constant(rule.mesh, 1.0, 0.0), rule);
    for (double v : z) EXPECT_NEAR(v, 0.0, 1e-11);
    const double c = 3.0 / oracle::gamma(0.6);
    double prev = 0.0;
    for (std::size_t n : {256, 512, 1024}) {
        auto r = rule_on(n, 2.0);
        auto d = rl_derivative(0.4, plain(r, [](double) { return 3.0; }), r);
        const double e = max_error_from(d, *r.mesh, 0.05, [&](double t) { return c * std::pow(t, -0.4); });
        if (prev > 0.0) {
            EXPECT_GT(prev / e, 3.0);
        }
        prev = e;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(RlDerivative, LeftInverseOfIntegral) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 3; ++trial) {
        RandomSmooth g(rng);
        for (double a : {0.3, 0.5, 0.7}) {
            auto rule = rule_on(1024, 2.0);
            auto x = plain(rule, g);
            auto d = rl_derivative(a, rl_integral(a, x, rule), rule);
            EXPECT_LT(max_error_from(d, *rule.mesh, 0.05, g), 1e-4) << a;
        }
    }
}

TEST(RlDerivative, Errors) {
    auto small = rule_on(3, 1.0);
    auto g = WeightedGridFunction::constant(small.mesh, 1.0, 1.0);
    try {
        rl_derivative(0.5, g, small);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientNodes);
    }
    auto rule = rule_on(8, 1.0);
    auto h = WeightedGridFunction::constant(rule.mesh, 1.0, 1.0);
    EXPECT_THROW(rl_derivative(1.0, h, rule), Error);
    EXPECT_THROW(rl_derivative(0.0, h, rule), Error);
    EXPECT_THROW(rl_derivative(0.5, g, rule), Error);
}

TEST(HilferDerivative, BetaZeroIsRiemannLiouville) {
    std::mt19937 rng(9);
    RandomSmooth f(rng);
    auto rule = rule_on(128, 2.0);
    auto g = WeightedGridFunction::sample(rule.mesh, 0.5, f);
    auto h = hilfer_derivative(0.5, 0.0, g, rule);
    auto r = rl_derivative(0.5, g, rule);
    ASSERT_EQ(h.size(), r.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (std::isnan(r[i])) {
            EXPECT_TRUE(std::isnan(h[i]));
        } else {
            EXPECT_EQ(h[i], r[i]);
        }
    }
}

TEST(HilferDerivative, AnnihilatesWeightPower) {
    for (double a : {0.3, 0.6}) {
        for (double b : {0.2, 0.5, 0.9}) {
            const double g = composite_order(a, b);
            auto rule = rule_on(256, 2.0 / g);
            auto d = hilfer_derivative(a, b, WeightedGridFunction::constant(rule.mesh, g, 1.0), rule);
            // Exact up to rounding; the outer integral smooths the differenced rounding noise.
            for (std::size_t i = 1; i < d.size(); ++i) EXPECT_NEAR(d[i], 0.0, 1e-7) << a << " " << b;
        }
    }
}

TEST(HilferDerivative, CaputoLimitKillsConstants) {
    auto rule = rule_on(128, 2.0);
    auto d = hilfer_derivative(0.4, 1.0, plain(rule, [](double) { return 2.0; }), rule);
    for (std::size_t i = 1; i < d.size(); ++i) EXPECT_NEAR(d[i], 0.0, 1e-12);
}

TEST(HilferDerivative, BetaOneMatchesCaputo) {
    auto rule = rule_on(512, 2.0);
    auto g = plain(rule, [](double t) { return std::exp(t) + t * t; });
    auto h = hilfer_derivative(0.6, 1.0, g, rule);
    auto c = caputo_derivative(0.6, g, rule);
    for (std::size_t i = 1; i < h.size(); ++i) {
        if ((*rule.mesh)[i] >= 0.05) {
            EXPECT_NEAR(h[i], c[i], 5e-4);
        }
    }
}

TEST(HilferDerivative, RecoversRhsOfPowerSolution) {
    // y = Gamma(s)/Gamma(a+s) t^(a+s-1) solves D^{a,b} y = t^(s-1).
    const double s = 1.5;
    for (double a : {0.5, 0.8}) {
        for (double b : {0.0, 0.3, 0.7, 1.0}) {
            const double g = composite_order(a, b);
            const double coef = oracle::gamma(s) / oracle::gamma(a + s);
            double prev = 0.0;
            for (std::size_t n : {128, 256, 512}) {
                auto rule = rule_on(n, 2.0 / g);
                auto y = WeightedGridFunction::sample(rule.mesh, g,
                                                      [&](double t) { return coef * std::pow(t, a + s - g); });
                auto d = hilfer_derivative(a < 1.0 ? a : 0.99, b, y, rule);
                const double e = max_error_from(d, *rule.mesh, 0.05, [&](double t) { return std::sqrt(t); });
                if (prev > 1e-10) {  // with gamma = 1 and a + s = 2, y is linear and the rule is exact
                    EXPECT_GT(prev / e, 1.8) << a << " " << b << " n=" << n;
                }
                prev = e;
            }
            EXPECT_LT(prev, 1e-3) << a << " " << b;
        }
    }
}

TEST(HilferDerivative, CompositionIdentity) {
    // For x = t^(gamma-1) w with w smooth, I^(1-gamma) x is smooth, D^gamma x is bounded, and
    //   I^alpha D^{alpha,beta} x = I^gamma D^gamma x = t^(gamma-1) (w - w(0)).
    for (double b : {0.3, 0.7}) {
        const double a = 0.5, g = composite_order(a, b);
        auto w = [](double t) { return 1.0 + t + std::sin(2.0 * t); };
        auto rule = rule_on(512, 2.0 / g);
        const GradedMesh& mesh = *rule.mesh;
        auto x = WeightedGridFunction::sample(rule.mesh, g, w);
        std::vector<double> hd = hilfer_derivative(a, b, x, rule);
        std::vector<double> rd = rl_derivative(g, x, rule);
        hd[0] = 0.0;  // I^{b(1-a)} of a bounded function vanishes at 0
        auto lhs = rl_integral(a, WeightedGridFunction(rule.mesh, 1.0, hd), rule);
        auto rhs = rl_integral(g, WeightedGridFunction(rule.mesh, 1.0, rd), rule);
        for (std::size_t i = 1; i < lhs.size(); ++i) {
            const double t = mesh[i];
            if (t < 0.05) continue;
            const double expect = std::pow(t, g - 1.0) * (w(t) - w(0.0));
            EXPECT_NEAR(lhs[i], rhs[i], 1e-4) << b << " " << t;
            EXPECT_NEAR(rhs[i], expect, 1e-4) << b << " " << t;
        }
    }
}

TEST(CaputoDerivative, Examples) {
    auto rule = rule_on(512, 2.0);
    auto z = caputo_derivative(0.5, plain(rule, [](double) { return 7.0; }), rule);
    for (double v : z) EXPECT_NEAR(v, 0.0, 1e-11);
    auto d1 = caputo_derivative(0.3, plain(rule, [](double t) { return t; }), rule);
    EXPECT_LT(max_error_from(d1, *rule.mesh, 0.0, [](double t) { return std::pow(t, 0.7) / oracle::gamma(1.7); }),
              1e-10);
    auto d2 = caputo_derivative(0.5, plain(rule, [](double t) { return t * t; }), rule);
    EXPECT_LT(max_error_from(d2, *rule.mesh, 0.0, [](double t) { return 2 * std::pow(t, 1.5) / oracle::gamma(2.5); }),
              1e-5);
}

TEST(CaputoDerivative, NeedsBoundedOrigin) {
    auto rule = rule_on(16, 2.0);
    EXPECT_THROW(caputo_derivative(0.5, WeightedGridFunction::constant(rule.mesh, 0.5, 1.0), rule), Error);
}

TEST(QKernel, Examples) {
    EXPECT_EQ(q_kernel(1.0, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(q_kernel(0.0, 0.5), 2.0);
    EXPECT_NEAR(q_kernel(0.5, 0.5), 1.4142136, 1e-7);
    EXPECT_DOUBLE_EQ(q_kernel(0.25, 1.0), 0.75);
}

TEST(QKernel, MatchesDefiningIntegral) {
    for (double a : {0.2, 0.5, 0.9}) {
        for (double tau : {0.0, 0.3, 0.8}) {
            const double ref = oracle::integrate([&](double u) { return std::pow(u, a - 1.0); }, 0.0, 1.0 - tau);
            EXPECT_NEAR(q_kernel(tau, a), ref, 1e-10);
        }
    }
}

TEST(QKernel, DomainErrors) {
    for (auto [tau, a] : std::vector<std::pair<double, double>>{{-0.1, 0.5}, {1.1, 0.5}, {0.5, 0.0}, {0.5, 1.5}}) {
        try {
            q_kernel(tau, a);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::OutOfDomain);
        }
    }
}

TEST(QKernel, BoundedByEOnGrid) {
    for (int i = 1; i <= 100; ++i) {
        const double a = i / 100.0;
        for (int k = 0; k < 100; ++k) EXPECT_LT(q_kernel(k / 99.0, a) / gamma_fn(a), M_E);
    }
}

TEST(BoundaryFunctional, IntegralOfQ) {
    for (double a : {0.3, 0.5, 0.9, 1.0}) {
        const double ref = oracle::integrate([&](double t) { return q_kernel(t, a); }, 0.0, 1.0);
        EXPECT_NEAR(ref, 1.0 / (a * (a + 1.0)), 1e-12);
        // f == 1 in C_{1-gamma} form.
        const double g = 0.7;
        auto mesh = GradedMesh::make(128, 2.0 / g);
        auto w = boundary_functional_weights(mesh, a, g);
        double acc = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * std::pow((*mesh)[k], 1.0 - g);
        EXPECT_NEAR(acc, ref / oracle::gamma(a), 1e-12);
    }
}

TEST(BoundaryFunctional, AgainstDirectQuadrature) {
    const double a = 0.6, g = 0.8;
    auto f = [](double t) { return std::exp(-t) * (1.0 + t * t); };
    const double ref = oracle::integrate([&](double t) { return q_kernel(t, a) * f(t); }, 0.0, 1.0) / oracle::gamma(a);
    auto mesh = GradedMesh::make(512, 2.0 / g);
    auto w = boundary_functional_weights(mesh, a, g);
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * std::pow((*mesh)[k], 1.0 - g) * f((*mesh)[k]);
    EXPECT_NEAR(acc, ref, 1e-7);
}

TEST(CellMoments, SeriesAndClosedFormAgreeAtSwitch) {
    for (double order : {0.1, 0.5, 1.3}) {
        const double d = 1.0;
        auto lo = detail::cell_moments(d, 0.5 - 1e-12, order);
        auto hi = detail::cell_moments(d, 0.5 + 1e-12, order);
        EXPECT_NEAR(lo.a0, hi.a0, 1e-11);
        EXPECT_NEAR(lo.a1, hi.a1, 1e-11);
        const double ref0 = oracle::integrate([&](double s) { return std::pow(d - s, order - 1.0); }, 0.0, 0.3);
        EXPECT_NEAR(detail::cell_moments(d, 0.3, order).a0, ref0, 1e-13);
    }
}

TEST(IncompleteBeta, MatchesQuadrature) {
    for (double p : {0.3, 0.75, 1.0}) {
        for (double q : {0.4, 1.5}) {
            for (double x : {0.1, 0.5, 0.9}) {
                const double ref =
                    oracle::integrate([&](double u) { return std::pow(u, p - 1) * std::pow(1 - u, q - 1); }, 0.0, x);
                EXPECT_NEAR(detail::incomplete_beta(x, p, q), ref, 1e-11) << p << " " << q << " " << x;
            }
        }
    }
}

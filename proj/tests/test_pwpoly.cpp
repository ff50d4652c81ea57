#include <cmath>
#include <random>

#include "doctest.h"
#include "ultra/pwpoly.hpp"

using namespace ultra;
using namespace ultra::pwp;

TEST_CASE("step convolution gives the hat function") {
    // 1_(0,1) * H_1 -> hat on [0,2] with peak 1 at x = 1
    auto f = PwPoly::indicator(0.0, 1.0, 1.0);
    auto hat = f.convolve_step(1.0);
    CHECK(hat.eval(1.0) == doctest::Approx(1.0));
    CHECK(hat.eval(0.5) == doctest::Approx(0.5));
    CHECK(hat.eval(1.5) == doctest::Approx(0.5));
    CHECK(hat.eval(-0.1) == 0.0);
    CHECK(hat.eval(2.1) == 0.0);
    CHECK(hat.support().first == doctest::Approx(0.0));
    CHECK(hat.support().second == doctest::Approx(2.0));
    CHECK(hat.smoothness() == 1);
    // sup norm of the hat is 1 at x=1
    CHECK(hat.sup_norm(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-step convolution: slope (a0 a1)^{-1} on [0, a1]") {
    // H_1 * H_{1/2}: slope 2 on [0, 1/2], constant 1 on [1/2, 1]
    auto f = PwPoly::step(1.0).convolve_step(0.5);
    CHECK(f.eval_deriv(0.25, 1) == doctest::Approx(2.0));
    CHECK(f.eval(0.75) == doctest::Approx(1.0));
    CHECK(f.eval_deriv(0.75, 1) == doctest::Approx(0.0));
    CHECK(f.sup_norm(1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mass preservation under convolve_step") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    auto f = PwPoly::step(1.0);
    for (int i = 0; i < 6; ++i) {
        double a = u(rng);
        f = f.convolve_step(a);
        CHECK(f.integral() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("smoothing: each convolution raises breakpoint continuity order") {
    auto f = PwPoly::step(1.0);
    for (int k = 1; k <= 5; ++k) {
        f = f.convolve_step(1.0 / double(k + 1));
        CHECK(f.smoothness() == k);
        CHECK(f.continuity_defect() < 1e-10);
    }
}

TEST_CASE("derivative and antiderivative are inverse") {
    auto f = PwPoly::step(1.0).convolve_step(0.7).convolve_step(0.3);
    auto F = f.antiderivative();
    auto g = F.derivative();
    for (double x : {0.05, 0.4, 0.9, 1.5, 1.9}) CHECK(g.eval(x) == doctest::Approx(f.eval(x)).epsilon(1e-12));
    // derivative of degree-0 pieces is zero
    auto c = PwPoly::indicator(0.0, 1.0, 3.0).derivative();
    CHECK(c.eval(0.5) == 0.0);
}

TEST_CASE("eval_derivs matches eval_deriv and finite differences") {
    auto f = PwPoly::step(1.0).convolve_step(0.5).convolve_step(0.25).convolve_step(0.125);
    double x = 0.77;
    auto d = f.eval_derivs(x, 3);
    for (int j = 0; j <= 3; ++j) CHECK(d[std::size_t(j)] == doctest::Approx(f.eval_deriv(x, j)));
    double h = 1e-6;
    double fd = (f.eval(x + h) - f.eval(x - h)) / (2 * h);
    CHECK(d[1] == doctest::Approx(fd).epsilon(1e-5));
    double fd2 = (f.eval(x + h) - 2 * f.eval(x) + f.eval(x - h)) / (h * h);
    CHECK(d[2] == doctest::Approx(fd2).epsilon(1e-3));
}

TEST_CASE("multiply and add with union refinement") {
    auto f = PwPoly::step(1.0).convolve_step(0.5);
    auto g = PwPoly::step(0.8).convolve_step(0.4);
    auto p = f.multiply(g);
    auto s = f + g;
    for (double x : {0.1, 0.3, 0.77, 1.2, 1.45}) {
        CHECK(p.eval(x) == doctest::Approx(f.eval(x) * g.eval(x)).epsilon(1e-12));
        CHECK(s.eval(x) == doctest::Approx(f.eval(x) + g.eval(x)).epsilon(1e-12));
    }
    // sup of a product on common support is bounded by the product of sups
    CHECK(p.sup_norm(0) <= f.sup_norm(0) * g.sup_norm(0) * (1 + 1e-12));
}

TEST_CASE("multiply_monomial is exact") {
    auto f = PwPoly::step(1.0).convolve_step(0.5);
    auto g = f.multiply_monomial(3, 0.5);
    for (double x : {0.2, 0.6, 1.1, 1.4})
        CHECK(g.eval(x) == doctest::Approx(0.5 * x * x * x * f.eval(x)).epsilon(1e-12));
    for (double x : {0.2, 0.6, 1.1}) {
        // Leibniz: (x^3 f / 2)' = (3x^2 f + x^3 f')/2
        double want = 0.5 * (3 * x * x * f.eval(x) + x * x * x * f.eval_deriv(x, 1));
        CHECK(g.eval_deriv(x, 1) == doctest::Approx(want).epsilon(1e-11));
    }
}

TEST_CASE("shift reflect compose_affine") {
    auto f = PwPoly::step(1.0).convolve_step(0.5);
    auto sh = f.shift(2.0);
    CHECK(sh.eval(2.3) == doctest::Approx(f.eval(0.3)));
    auto rf = f.reflect();
    for (double x : {0.1, 0.45, 0.9, 1.3}) CHECK(rf.eval(-x) == doctest::Approx(f.eval(x)).epsilon(1e-12));
    auto ca = f.compose_affine(2.0, 0.5);  // g(x) = f(2x + 0.5)
    CHECK(ca.eval(0.2) == doctest::Approx(f.eval(0.9)).epsilon(1e-12));
    CHECK(ca.eval_deriv(0.2, 1) == doctest::Approx(2.0 * f.eval_deriv(0.9, 1)).epsilon(1e-11));
}

TEST_CASE("convolve_indicator matches quadrature oracle") {
    auto f = PwPoly::step(1.0).convolve_step(0.5).convolve_step(0.25);
    auto g = f.convolve_indicator(-0.3, 0.4);
    // oracle: g(x) = int_{x-0.4}^{x+0.3} f(t) dt by Riemann sum
    for (double x : {0.0, 0.5, 1.0, 1.6}) {
        int N = 20000;
        double s = 0.0, lo = x - 0.4, hi = x + 0.3;
        for (int i = 0; i < N; ++i) s += f.eval(lo + (hi - lo) * (i + 0.5) / N);
        s *= (hi - lo) / N;
        CHECK(g.eval(x) == doctest::Approx(s).epsilon(1e-6));
    }
}

TEST_CASE("sup_norm certified against dense sampling") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (int trial = 0; trial < 4; ++trial) {
        auto f = PwPoly::step(u(rng));
        for (int i = 0; i < 5; ++i) f = f.convolve_step(u(rng) * 0.5);
        for (int j = 0; j <= 4; ++j) {
            auto [v, r] = f.sup_norm_certified(j);
            double dense = 0.0;
            auto [lo, hi] = f.support();
            for (int i = 0; i <= 40000; ++i) {
                double x = lo + (hi - lo) * i / 40000.0;
                dense = std::max(dense, std::abs(f.eval_deriv(x, j)));
            }
            CHECK(v + r >= dense * (1 - 1e-9));
            CHECK(v <= dense * (1 + 1e-6) + 1e-12);
            CHECK(r <= 1e-9 * std::max(1.0, v));
        }
    }
}

TEST_CASE("sup_bounded_by is a sound decision") {
    auto f = PwPoly::step(1.0).convolve_step(0.5).convolve_step(0.25);
    double s1 = f.sup_norm(1);
    CHECK(f.sup_bounded_by(1, s1 * 1.0001));
    CHECK_FALSE(f.sup_bounded_by(1, s1 * 0.99));
}

TEST_CASE("rational mode: exact integral and exact derivative bound") {
    std::vector<Rational> a = {Rational(1), Rational(1, 4), Rational(1, 9), Rational(1, 16)};
    PwPolyQ f = PwPolyQ::step(a[0]);
    for (std::size_t i = 1; i < a.size(); ++i) f = f.convolve_step(a[i]);
    CHECK(f.integral() == Rational(1));
    Rational send = a[0] + a[1] + a[2] + a[3];
    CHECK(f.support().second == send);
    // |f'| <= 2/(a0 a1) = 8 exactly
    CHECK(f.sup_bounded_by(1, Rational(8)));
    // and the sup is attained strictly below
    auto [v, r] = f.sup_norm_certified(1);
    CHECK(to_double(Rational(v + r)) < 8.0);
}

TEST_CASE("rational eval matches double eval") {
    std::vector<Rational> a = {Rational(1), Rational(1, 2), Rational(1, 4)};
    PwPolyQ f = PwPolyQ::step(a[0]).convolve_step(a[1]).convolve_step(a[2]);
    PwPoly fd = f.to_double_poly();
    for (double x : {0.1, 0.5, 0.9, 1.5}) {
        CHECK(to_double(f.eval(Rational(x))) == doctest::Approx(fd.eval(x)).epsilon(1e-13));
    }
}

TEST_CASE("tensor function evaluation and derivatives") {
    auto g1 = PwPoly::step(1.0).convolve_step(0.5).convolve_step(0.25);
    auto g2 = PwPoly::step(0.9).convolve_step(0.45);
    Tensor T({g1, g2});
    Point p = make_point(0.6, 0.5);
    CHECK(T.eval(p) == doctest::Approx(g1.eval(0.6) * g2.eval(0.5)));
    CHECK(T.eval_deriv(p, make_mi(1, 1)) ==
          doctest::Approx(g1.eval_deriv(0.6, 1) * g2.eval_deriv(0.5, 1)));
    // mixed partial bound equals the product of axis bounds
    CHECK(T.sup_deriv(make_mi(1, 1)) ==
          doctest::Approx(g1.sup_norm(1) * g2.sup_norm(1)).epsilon(1e-9));
}

TEST_CASE("degree cap is enforced") {
    auto f = PwPoly::indicator(0.0, 1.0, 1.0);
    CHECK_THROWS_AS(f.multiply_monomial(65, 1.0), std::invalid_argument);
}

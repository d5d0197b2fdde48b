#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "superstate/bounds.hpp"
#include "superstate/rng.hpp"

using namespace superstate;
using namespace superstate::bounds;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

TEST_CASE("product-difference inequality: degenerate and hand cases") {
    const std::vector<double> a{0.5, 0.5}, b{0.3, 0.4};
    CHECK(lemma2_rhs(a, b, a, b) == doctest::Approx(0.0));

    const std::vector<double> e0{1.0, 0.0}, e1{0.0, 1.0}, ones{1.0, 1.0};
    CHECK(lemma2_rhs(e0, ones, e1, ones) == doctest::Approx(1.0));
    CHECK(std::abs(dot(e0, ones) - dot(e1, ones)) <= 1.0);
}

TEST_CASE("product-difference inequality: errors") {
    const std::vector<double> a{0.5, 0.5}, b3{1.0, 1.0, 1.0};
    CHECK_THROWS_AS(lemma2_rhs(a, b3, a, a), DimensionMismatch);
    const std::vector<double> bad{0.7, 0.7};
    CHECK_THROWS_AS(lemma2_rhs(bad, a, a, a), NotSimplex);
    const std::vector<double> neg{-0.1, 1.1};
    CHECK_THROWS_AS(lemma2_rhs(neg, a, a, a), NotSimplex);
}

TEST_CASE("product-difference inequality dominates on random quadruples") {
    SplitMix64 rng(1001);
    int checked = 0;
    for (int trial = 0; trial < 20000; ++trial) {
        const int mdim = 2 + static_cast<int>(rng.next_below(15));
        const auto a = dirichlet_uniform(mdim, rng);
        const auto c = dirichlet_uniform(mdim, rng);
        std::vector<double> b(mdim), d(mdim);
        for (int i = 0; i < mdim; ++i) {
            b[i] = rng.next_double();
            d[i] = rng.next_double();
        }
        const double lhs = std::abs(dot(a, b) - dot(c, d));
        const double rhs = lemma2_rhs(a, b, c, d);
        CHECK(lhs <= rhs * (1.0 + 1e-12) + 1e-15);

        // also tighter than the version without the negative term
        double l1 = 0.0, binf = 0.0, dinf = 0.0, bdinf = 0.0;
        for (int i = 0; i < mdim; ++i) {
            l1 += std::abs(a[i] - c[i]);
            binf = std::max(binf, b[i]);
            dinf = std::max(dinf, d[i]);
            bdinf = std::max(bdinf, std::abs(b[i] - d[i]));
        }
        CHECK(rhs <= 0.5 * l1 * std::max(binf, dinf) + bdinf + 1e-15);
        ++checked;
    }
    CHECK(checked == 20000);
}

TEST_CASE("greedy coupling: trivial and crossing cases") {
    const std::vector<double> v{0.25, 0.75};
    const CouplingPlan same = greedy_coupling(v, v);
    CHECK(same.total == doctest::Approx(0.0));
    for (double x : same.alpha) CHECK(x == 0.0);

    const std::vector<double> e0{1.0, 0.0}, e1{0.0, 1.0};
    const CouplingPlan cross = greedy_coupling(e0, e1);
    CHECK(cross.total == doctest::Approx(1.0));
    CHECK(cross.at(0, 1) == doctest::Approx(1.0));

    CHECK_THROWS_AS(greedy_coupling(std::vector<double>{0.4, 0.4}, e0), NotSimplex);
    CHECK_THROWS_AS(greedy_coupling(std::vector<double>{1.0}, e0), DimensionMismatch);
}

TEST_CASE("greedy coupling marginals match surplus and deficit exactly") {
    SplitMix64 rng(2002);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(31));
        const auto v1 = dirichlet_uniform(n, rng);
        const auto v2 = dirichlet_uniform(n, rng);
        const CouplingPlan plan = greedy_coupling(v1, v2);

        double tv = 0.0;
        for (int i = 0; i < n; ++i) tv += std::abs(v1[i] - v2[i]);
        tv *= 0.5;
        CHECK(std::abs(plan.total - tv) <= 1e-12);

        for (int i = 0; i < n; ++i) {
            double row = 0.0, col = 0.0;
            for (int j = 0; j < n; ++j) {
                CHECK(plan.at(i, j) >= 0.0);
                row += plan.at(i, j);
                col += plan.at(j, i);
            }
            CHECK(std::abs(row - std::max(v1[i] - v2[i], 0.0)) <= 1e-12);
            CHECK(std::abs(col - std::max(v2[i] - v1[i], 0.0)) <= 1e-12);
        }
    }
}

TEST_CASE("every surplus-deficit pair processed first receives mass") {
    // the first surplus index always couples with the first deficit index
    const std::vector<double> v1{0.5, 0.1, 0.4}, v2{0.2, 0.5, 0.3};
    const CouplingPlan plan = greedy_coupling(v1, v2);
    CHECK(plan.at(0, 1) > 0.0);
    CHECK(plan.total == doctest::Approx(0.4));
}

TEST_CASE("xi_smdp_pomdp: limits and the frozen spot value") {
    BoundInputs in;
    in.r_bar = 1.0;
    in.gamma = 0.9;
    in.l = 3;
    in.rho = 1.0;
    CHECK(xi_smdp_pomdp(in) == doctest::Approx(0.0));

    in.rho = 0.5;
    in.l = 0;
    CHECK(xi_smdp_pomdp(in) == doctest::Approx(2.0 * (1.0 + 0.9) / 0.1).epsilon(1e-12));

    in.l = 4;
    CHECK(std::abs(xi_smdp_pomdp(in) - 8.45) <= 1e-9);  // 1.25 + 7.2, by hand
}

TEST_CASE("xi_smdp_pomdp decreases in l and in rho") {
    BoundInputs in;
    in.r_bar = 2.0;
    in.gamma = 0.85;
    double prev = 1e100;
    for (int l = 0; l <= 8; ++l) {
        in.l = l;
        in.rho = 0.4;
        const double v = xi_smdp_pomdp(in);
        CHECK(v < prev);
        prev = v;
    }
    in.l = 3;
    double prev_rho = 1e100;
    for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        in.rho = rho;
        const double v = xi_smdp_pomdp(in);
        CHECK(v < prev_rho);
        prev_rho = v;
    }
}

TEST_CASE("count-form bound: limits, domination, and the frozen value") {
    // rho -> 1 sends the bound to zero once N exceeds |Y||A|
    CHECK(corollary1_bound(1.0, 0.9, 1.0 - 1e-12, 32.0, 2, 2) <= 1e-6);

    // at N = (|Y||A|)^(l+1) the count form dominates the l form
    BoundInputs in;
    in.r_bar = 1.0;
    in.gamma = 0.9;
    in.rho = 0.5;
    for (int l = 1; l <= 5; ++l) {
        in.l = l;
        const double n_count = std::pow(4.0, l + 1);
        CHECK(corollary1_bound(1.0, 0.9, 0.5, n_count, 2, 2) >= xi_smdp_pomdp(in) - 1e-12);
    }

    // frozen value for r=1, gamma=0.9, rho=0.5, |Y|=|A|=2, N=32:
    // kappa = 1/2, N^-kappa = 2^-2.5, computed by hand from the display
    const double n_pow = std::pow(32.0, -0.5);
    const double expect = 2.0 * (n_pow / 0.5) / 0.1 + 4.0 * 0.9 * (n_pow / 0.5) / (0.1 * (0.2 + 0.9 * n_pow));
    CHECK(corollary1_bound(1.0, 0.9, 0.5, 32.0, 2, 2) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("TD error bound: decay in tau, monotonicity in R, frozen value") {
    BoundInputs in;
    in.r_bar = 1.0;
    in.gamma = 0.9;
    in.rho = 1.0;  // history terms vanish
    in.rho_prime = 0.5;
    in.l = 4;
    in.radius = 2.0;
    in.xi_fa = 0.0;
    in.tau = 1000000;
    const double v6 = xi_td_error(in);
    in.tau = 100000000;
    const double v8 = xi_td_error(in);
    CHECK(v8 < v6);
    CHECK(v8 <= 10.0 * v6 * (std::log(1e8) / std::sqrt(1e8)) / (std::log(1e6) / std::sqrt(1e6)));

    in.tau = 10000;
    in.rho = 0.5;
    double prev = 0.0;
    for (double radius : {1.0, 2.0, 4.0}) {
        in.radius = radius;
        const double v = xi_td_error(in);
        CHECK(v >= prev);
        prev = v;
    }

    // frozen value assembled term by term (r=1, gamma=0.9, rho=rho'=0.5, l=4,
    // R=2, tau=1e4): A = 1 - 0.2/100, warmup = log(1e4)/(2 log 2)
    in.radius = 2.0;
    const double sqrt_tau = 100.0;
    const double a_fac = std::pow(1.0 - 0.2 / sqrt_tau, 1e4);
    const double lw = std::log(1e4) / (2.0 * std::log(2.0));
    const double mix_poly = 2.0 + 4.0 * (1.0 + 0.5 * 0.9);
    const double c2 = 2.0 + 24.0;
    const double inner = 25.0 / (2.0 * sqrt_tau) + c2 * 5.0 * std::log(1e4) / (sqrt_tau * std::log(2.0)) +
                         std::pow(0.5, lw) * mix_poly + 2.0 * 2.0 * 0.0625 +
                         (2.0 / 0.5) * 0.0625 * mix_poly;
    const double expect = a_fac * 4.0 + (1.0 - a_fac) / 0.1 * inner;
    CHECK(xi_td_error(in) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("TD error bound rejects tau below the hypothesis") {
    BoundInputs in;
    in.gamma = 0.999;  // 4 (1-gamma)^2 tiny, but contraction constraint binds
    in.tau = 0;
    CHECK_THROWS_AS(xi_td_error(in), std::invalid_argument);
}

TEST_CASE("regret terms: means, rho = 1 reduction, frozen value") {
    BoundInputs in;
    in.r_bar = 1.0;
    in.gamma = 0.9;
    in.rho = 0.5;
    in.rho_prime = 0.5;
    in.l = 4;
    in.tau = 10000;
    in.radius = 2.0;
    in.policy_updates = 4;

    const std::vector<double> zeros(4, 0.0);
    const RegretBoundTerms z = regret_bound_terms(in, zeros);
    CHECK(z.xi_fa == doctest::Approx(0.0));

    const std::vector<double> fas{0.1, 0.2, 0.3, 0.4};
    CHECK(regret_bound_terms(in, fas).xi_fa == doctest::Approx(0.5));

    in.rho = 1.0;
    const RegretBoundTerms r1 = regret_bound_terms(in, zeros);
    // with (1-rho)^l = 0 only the closed tail remains
    CHECK(r1.xi_ha == doctest::Approx(2.0 / 0.1 + 2.0 * 0.9 / (0.1 * 0.2)).epsilon(1e-12));

    in.rho = 0.5;
    const RegretBoundTerms full = regret_bound_terms(in, zeros);
    const double decay_l = 0.0625;
    const double a_fac = std::pow(1.0 - 0.2 / 100.0, 1e4);
    const double mix_poly = 2.0 + 4.0 * (1.0 + 0.5 * 0.9);
    const double expect = decay_l * (1.0 - a_fac) / 0.1 * (4.0 * 2.0 + (4.0 / 0.5) * mix_poly) + 2.0 / 0.1 +
                          2.0 * 0.9 / (0.1 * (0.2 + decay_l * 0.9));
    CHECK(full.xi_ha == doctest::Approx(expect).epsilon(1e-12));
    CHECK(full.order_term > 0.0);
}

TEST_CASE("information-state bounds: limits, frozen values, dominance grid") {
    const AisBounds at_zero = ais_bounds(0.2, 0.0, 1.0, 0.9);
    CHECK(at_zero.original == doctest::Approx(2.0));
    CHECK(at_zero.improved == doctest::Approx(2.0));

    const AisBounds frozen = ais_bounds(0.0, 0.1, 1.0, 0.9);
    CHECK(std::abs(frozen.original - 18.0) <= 1e-9);
    CHECK(std::abs(frozen.improved - 6.0) <= 1e-9);

    SplitMix64 rng(31415);
    for (int trial = 0; trial < 1000; ++trial) {
        const double eps = rng.next_double();
        const double delta = rng.next_double();
        const double r = 2.0 * rng.next_double();
        const double g = 0.98 * rng.next_double();
        const AisBounds b = ais_bounds(eps, delta, r, g);
        CHECK(b.improved <= b.original + 1e-12);
    }
}

TEST_CASE("evaluators reject out-of-range inputs") {
    BoundInputs in;
    in.gamma = 1.0;
    CHECK_THROWS_AS(xi_smdp_pomdp(in), std::invalid_argument);
    in.gamma = 0.9;
    in.rho = 0.0;
    CHECK_THROWS_AS(xi_smdp_pomdp(in), std::invalid_argument);
    in.rho = 0.5;
    in.l = -1;
    CHECK_THROWS_AS(xi_smdp_pomdp(in), std::invalid_argument);
    CHECK_THROWS_AS(ais_bounds(-0.1, 0.0, 1.0, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(corollary1_bound(1.0, 0.9, 0.5, 0.5, 2, 2), std::invalid_argument);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "siqr/errors.hpp"
#include "siqr/model.hpp"

#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace siqr;
using siqr::testing::fixture_params;

TEST_CASE("parameter validation") {
    SUBCASE("table fixture is valid with no warnings") {
        const ValidationReport report = validate_params(fixture_params(0.2));
        CHECK(report.warnings.empty());
    }

    SUBCASE("negative rate names the field") {
        ModelParams p = fixture_params(0.2);
        p.mu = -0.1;
        try {
            validate_params(p);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "mu");
        }
    }

    SUBCASE("zero mu and zero alpha are rejected") {
        ModelParams p = fixture_params(0.2);
        p.mu = 0.0;
        CHECK_THROWS_AS(validate_params(p), ValidationError);
        p = fixture_params(0.2);
        p.alpha = 0.0;
        CHECK_THROWS_AS(validate_params(p), ValidationError);
    }

    SUBCASE("non-finite value names the field") {
        ModelParams p = fixture_params(0.2);
        p.delta = std::nan("");
        try {
            validate_params(p);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "delta");
        }
    }

    SUBCASE("eta below epsilon passes with a warning") {
        ModelParams p = fixture_params(0.2);
        p.eta = 0.05;
        p.epsilon = 0.1;
        const ValidationReport report = validate_params(p);
        REQUIRE(report.warnings.size() == 1);
    }
}

TEST_CASE("right-hand side") {
    const ModelParams p = fixture_params(0.2);

    SUBCASE("only recruitment survives at the origin") {
        const StateVec d = rhs(p, StateVec{0, 0, 0, 0});
        CHECK(d.s == doctest::Approx(0.2).epsilon(1e-15));
        CHECK(d.i == 0.0);
        CHECK(d.q == 0.0);
        CHECK(d.r == 0.0);
    }

    SUBCASE("hand evaluation at (9, 1, 0, 0)") {
        const StateVec d = rhs(p, StateVec{9, 1, 0, 0});
        CHECK(d.s == doctest::Approx(-2.23).epsilon(1e-12));
        CHECK(d.i == doctest::Approx(1.48).epsilon(1e-12));
        CHECK(d.q == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(d.r == doctest::Approx(0.1).epsilon(1e-12));
    }

    SUBCASE("the endemic closed form is a root") {
        const StateVec estar = *endemic_equilibrium(p).point;
        const StateVec d = rhs(p, estar);
        CHECK(std::abs(d.s) < 1e-12);
        CHECK(std::abs(d.i) < 1e-12);
        CHECK(std::abs(d.q) < 1e-12);
        CHECK(std::abs(d.r) < 1e-12);
    }

    SUBCASE("v = 0 recovers the vaccination-free system") {
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        for (int trial = 0; trial < 200; ++trial) {
            ModelParams q = testing::random_params(rng);
            q.v = 0.0;
            const StateVec x{u(rng), u(rng), u(rng), u(rng)};
            const StateVec d = rhs(q, x);
            // base system written out independently
            const double ds = q.delta - q.alpha * x.s * x.i - q.mu * x.s;
            const double di = q.alpha * x.s * x.i - (q.gamma + q.mu + q.eta) * x.i;
            const double dq = (q.eta - q.epsilon) * x.i - (q.rho + q.mu) * x.q;
            const double dr = q.gamma * x.i + q.rho * x.q - q.mu * x.r;
            CHECK(d.s == ds);
            CHECK(d.i == di);
            CHECK(d.q == dq);
            CHECK(d.r == dr);
        }
    }
}

TEST_CASE("basic reproduction number") {
    SUBCASE("reported values") {
        CHECK(r0(fixture_params(0.08)) == doctest::Approx(0.7143).epsilon(2e-4));
        CHECK(r0(fixture_params(0.2)) == doctest::Approx(1.7857).epsilon(2e-4));
        ModelParams p = fixture_params(0.2);
        p.v = 0.0;
        p.eta = 0.0;
        CHECK(r0(p) == doctest::Approx(16.6667).epsilon(2e-5));
        p = fixture_params(0.2);
        p.v = 0.0;
        CHECK(r0(p) == doctest::Approx(6.25).epsilon(1e-12));
        p = fixture_params(0.2);
        p.eta = 0.0;
        CHECK(r0(p) == doctest::Approx(4.7619).epsilon(2e-5));
    }

    SUBCASE("zero recruitment means zero spread") {
        ModelParams p = fixture_params(0.2);
        p.delta = 0.0;
        CHECK(r0(p) == 0.0);
    }

    SUBCASE("strictly decreasing in v and eta") {
        std::mt19937 rng(37);
        std::uniform_real_distribution<double> bump(0.01, 0.5);
        for (int trial = 0; trial < 200; ++trial) {
            const ModelParams p = testing::random_params(rng);
            ModelParams more_v = p;
            more_v.v += bump(rng);
            CHECK(r0(more_v) < r0(p));
            ModelParams more_eta = p;
            more_eta.eta += bump(rng);
            CHECK(r0(more_eta) < r0(p));
        }
    }
}

TEST_CASE("equilibria") {
    SUBCASE("disease-free point at the fixture") {
        const EquilibriumReport dfe = disease_free_equilibrium(fixture_params(0.2));
        CHECK(dfe.exists);
        CHECK(dfe.kind == EquilibriumKind::DiseaseFree);
        REQUIRE(dfe.point.has_value());
        CHECK(dfe.point->s == doctest::Approx(2.857142857142857).epsilon(1e-12));
        CHECK(dfe.point->i == 0.0);
        CHECK(dfe.point->q == 0.0);
        CHECK(dfe.point->r == 0.0);
    }

    SUBCASE("disease-free point without vaccination is delta/mu") {
        ModelParams p = fixture_params(0.2);
        p.v = 0.0;
        CHECK(disease_free_equilibrium(p).point->s == doctest::Approx(10.0).epsilon(1e-12));
    }

    SUBCASE("empty population") {
        ModelParams p = fixture_params(0.2);
        p.delta = 0.0;
        const EquilibriumReport dfe = disease_free_equilibrium(p);
        CHECK(dfe.point->s == 0.0);
    }

    SUBCASE("endemic point at alpha = 0.2") {
        const EquilibriumReport endemic = endemic_equilibrium(fixture_params(0.2));
        REQUIRE(endemic.exists);
        REQUIRE(endemic.point.has_value());
        CHECK(endemic.point->s == doctest::Approx(1.6).epsilon(1e-12));
        CHECK(endemic.point->i == doctest::Approx(0.275).epsilon(1e-12));
        CHECK(endemic.point->q == doctest::Approx(0.0859375).epsilon(1e-12));
        CHECK(endemic.point->r == doctest::Approx(2.6640625).epsilon(1e-12));
    }

    SUBCASE("no endemic point below threshold") {
        const EquilibriumReport endemic = endemic_equilibrium(fixture_params(0.08));
        CHECK_FALSE(endemic.exists);
        CHECK_FALSE(endemic.point.has_value());
    }

    SUBCASE("epsilon equal to eta zeroes the quarantine component") {
        ModelParams p = fixture_params(0.2);
        p.epsilon = p.eta;
        const EquilibriumReport endemic = endemic_equilibrium(p);
        REQUIRE(endemic.exists);
        CHECK(endemic.point->i == doctest::Approx(0.275).epsilon(1e-12));
        CHECK(endemic.point->q == 0.0);
    }

    SUBCASE("existence tracks the threshold and closed forms are roots") {
        std::mt19937 rng(41);
        for (int trial = 0; trial < 300; ++trial) {
            const ModelParams p = testing::random_params(rng);
            const EquilibriumReport endemic = endemic_equilibrium(p);
            CHECK(endemic.exists == (r0(p) > 1.0));

            const StateVec d0 = rhs(p, *disease_free_equilibrium(p).point);
            CHECK(std::abs(d0.s) <= 1e-10);
            CHECK(std::abs(d0.i) <= 1e-10);
            CHECK(std::abs(d0.q) <= 1e-10);
            CHECK(std::abs(d0.r) <= 1e-10);
            if (endemic.exists) {
                const StateVec d = rhs(p, *endemic.point);
                CHECK(std::abs(d.s) <= 1e-10);
                CHECK(std::abs(d.i) <= 1e-10);
                CHECK(std::abs(d.q) <= 1e-10);
                CHECK(std::abs(d.r) <= 1e-10);
            }
        }
    }

    SUBCASE("infection balance at the endemic point") {
        const ModelParams p = fixture_params(0.2);
        const StateVec estar = *endemic_equilibrium(p).point;
        const double inflow = p.alpha * estar.s * estar.i;
        const double outflow = p.removal_rate() * estar.i;
        CHECK(inflow == doctest::Approx(0.088).epsilon(1e-12));
        CHECK(inflow == doctest::Approx(outflow).epsilon(1e-14));
    }
}

TEST_CASE("jacobian") {
    const ModelParams p = fixture_params(0.2);

    SUBCASE("disease-free entries") {
        const linalg::Matrix j = jacobian(p, *disease_free_equilibrium(p).point);
        CHECK(j(0, 0) == doctest::Approx(-0.07).epsilon(1e-12));
        CHECK(j(0, 1) == doctest::Approx(-0.5714285714285714).epsilon(1e-12));
        CHECK(j(1, 1) == doctest::Approx(0.2514285714285714).epsilon(1e-12));
        CHECK(j(1, 0) == 0.0);
        CHECK(j(2, 1) == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(j(3, 3) == doctest::Approx(-0.02).epsilon(1e-15));
    }

    SUBCASE("diagonal infection entry vanishes at the endemic point") {
        const linalg::Matrix j = jacobian(p, *endemic_equilibrium(p).point);
        CHECK(std::abs(j(1, 1)) < 1e-15);
    }

    SUBCASE("origin keeps only the linear decay structure") {
        const linalg::Matrix j = jacobian(p, StateVec{0, 0, 0, 0});
        CHECK(j(0, 0) == doctest::Approx(-(p.mu + p.v)).epsilon(1e-15));
        CHECK(j(0, 1) == 0.0);
        CHECK(j(1, 0) == 0.0);
        CHECK(j(1, 1) == doctest::Approx(-p.removal_rate()).epsilon(1e-15));
        CHECK(j(2, 1) == doctest::Approx(p.eta - p.epsilon).epsilon(1e-15));
        CHECK(j(3, 1) == doctest::Approx(p.gamma).epsilon(1e-15));
        CHECK(j(3, 2) == doctest::Approx(p.rho).epsilon(1e-15));
    }

    SUBCASE("matches central finite differences") {
        std::mt19937 rng(43);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        const double h = 1e-6;
        for (int trial = 0; trial < 50; ++trial) {
            const ModelParams q = testing::random_params(rng);
            const StateVec x{u(rng), u(rng), u(rng), u(rng)};
            const linalg::Matrix j = jacobian(q, x);
            for (int col = 0; col < 4; ++col) {
                StateVec plus = x;
                StateVec minus = x;
                double* pp = col == 0 ? &plus.s : col == 1 ? &plus.i : col == 2 ? &plus.q : &plus.r;
                double* pm =
                    col == 0 ? &minus.s : col == 1 ? &minus.i : col == 2 ? &minus.q : &minus.r;
                *pp += h;
                *pm -= h;
                const StateVec fp = rhs(q, plus);
                const StateVec fm = rhs(q, minus);
                const double approx[4] = {
                    (fp.s - fm.s) / (2 * h),
                    (fp.i - fm.i) / (2 * h),
                    (fp.q - fm.q) / (2 * h),
                    (fp.r - fm.r) / (2 * h),
                };
                for (int row = 0; row < 4; ++row) {
                    CHECK(j(row, col) == doctest::Approx(approx[row]).epsilon(1e-5).scale(1.0));
                }
            }
        }
    }
}

TEST_CASE("r0 sensitivities") {
    SUBCASE("fixture magnitudes") {
        const R0Sensitivity s = r0_gradient(fixture_params(0.2));
        CHECK(s.dv == doctest::Approx(25.510204081632653).epsilon(1e-12));
        CHECK(s.deta == doctest::Approx(5.580357142857143).epsilon(1e-12));
    }

    SUBCASE("both vanish with zero recruitment") {
        ModelParams p = fixture_params(0.2);
        p.delta = 0.0;
        const R0Sensitivity s = r0_gradient(p);
        CHECK(s.dv == 0.0);
        CHECK(s.deta == 0.0);
    }

    SUBCASE("vaccination sensitivity decays with v") {
        ModelParams low = fixture_params(0.2);
        ModelParams high = fixture_params(0.2);
        high.v = 1.0;
        CHECK(r0_gradient(high).dv < r0_gradient(low).dv);
    }
}

TEST_CASE("total population") {
    CHECK(total_population(StateVec{9, 1, 0, 0}) == 10.0);
    CHECK(total_population(StateVec{0, 0, 0, 0}) == 0.0);
    const StateVec estar = *endemic_equilibrium(fixture_params(0.2)).point;
    CHECK(total_population(estar) == doctest::Approx(4.625).epsilon(1e-12));
}

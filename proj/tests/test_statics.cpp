#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "beam/statics.hpp"

using namespace beam;
using doctest::Approx;

namespace {

// Independent oracle for beta_c: brute-force minimum over the first 200 modes.
double beta_c_brute(double k) {
    double best = 1e300;
    for (int n = 1; n <= 200; ++n) best = std::min(best, k / (n * n * kPi2) + n * n * kPi2);
    return best;
}

}  // namespace

TEST_CASE("mu_n values") {
    CHECK(mu_n(kLambda1, 1) == Approx(2.0 * kPi2).epsilon(1e-15));
    CHECK(mu_n(kLambda1, 1) == Approx(19.7392088).epsilon(1e-9));
    CHECK(mu_n(0.0, 2) == Approx(4.0 * kPi2).epsilon(1e-15));
    CHECK(mu_n(9.0 * kLambda1, 2) == Approx(6.25 * kPi2).epsilon(1e-15));
    CHECK(mu_n(9.0 * kLambda1, 2) == Approx(61.6850275).epsilon(1e-9));
}

TEST_CASE("critical index and critical load") {
    CHECK(critical_index(0.0) == 1);
    CHECK(critical_index(9.0 * kLambda1) == 2);
    CHECK(critical_index(40.0 * kLambda1) == 3);
    CHECK(beta_c(kLambda1) == Approx(2.0 * kPi2).epsilon(1e-15));
    CHECK(beta_c(9.0 * kLambda1) == Approx(6.25 * kPi2).epsilon(1e-15));
    CHECK(beta_c(30.0 * kLambda1) == Approx(11.5 * kPi2).epsilon(1e-15));
    CHECK(beta_c(30.0 * kLambda1) == Approx(113.5).epsilon(1e-3));

    SUBCASE("bracketing inequality agrees with the brute-force minimum") {
        for (int i = 0; i <= 400; ++i) {
            const double k = i * 0.37 * kLambda1;
            CHECK(beta_c(k) == Approx(beta_c_brute(k)).epsilon(1e-13));
        }
    }
}

TEST_CASE("resonances") {
    const auto r4 = resonance(4.0 * kLambda1);
    REQUIRE(r4.has_value());
    CHECK(r4->i == 1);
    CHECK(r4->j == 2);
    CHECK(r4->mu == Approx(5.0 * kPi2).epsilon(1e-14));

    const auto r9 = resonance(9.0 * kLambda1);
    REQUIRE(r9.has_value());
    CHECK(r9->i == 1);
    CHECK(r9->j == 3);
    CHECK(r9->mu == Approx(10.0 * kPi2).epsilon(1e-14));

    CHECK_FALSE(resonance(kLambda1).has_value());
    CHECK_FALSE(resonance(5.0 * kLambda1).has_value());

    SUBCASE("36 pi^4 carries two pairs, ordered by level") {
        const auto pairs = resonant_pairs(36.0 * kLambda1);
        REQUIRE(pairs.size() == 2);
        CHECK(pairs[0] == Resonance{2, 3, 13.0 * kPi2});
        CHECK(pairs[1].i == 1);
        CHECK(pairs[1].j == 6);
        CHECK(resonance_exact(36)->j == 3);
    }

    SUBCASE("no level is shared by three modes") {
        for (long long q = 1; q <= 400; ++q) {
            const double k = static_cast<double>(q * q) * kLambda1;
            for (const auto& r : resonant_pairs(k)) {
                int count = 0;
                for (int n = 1; n <= 2 * q + 2; ++n) {
                    if (std::abs(mu_n(k, n) - r.mu) <= 1e-9 * r.mu) ++count;
                }
                CHECK(count == 2);
            }
        }
    }
}

TEST_CASE("n_star") {
    CHECK(n_star(-4.0 * kPi2, kLambda1) == 1);
    CHECK(n_star(0.0, 3.0) == 0);
    CHECK(n_star(0.0, 0.0) == 0);
    CHECK(n_star(-8.0 * kPi2, 9.0 * kLambda1) == 1);
}

TEST_CASE("equilibria, non-resonant") {
    const BeamParams p(-4.0 * kPi2, kLambda1, {});
    const auto set = enumerate_equilibria(p);
    CHECK(set.classification == Classification::finite);
    CHECK(set.n_star == 1);
    REQUIRE(set.equilibria.size() == 3);
    CHECK(set.equilibria[0].mode == 0);
    CHECK(set.equilibria[1].amplitude == Approx(2.0).epsilon(1e-14));
    CHECK(set.equilibria[2].amplitude == Approx(-2.0).epsilon(1e-14));
    // Physical amplitude 2 on sin(pi x) is c_1 = 2 / sqrt(2).
    CHECK(set.equilibria[1].modal.c[0] == Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(evaluate_physical(set.equilibria[1].modal, 0.5) == Approx(2.0).epsilon(1e-14));
    for (const auto& eq : set.equilibria) CHECK(static_residual(eq.modal, p) <= 1e-10);

    const auto null = enumerate_equilibria(BeamParams(-kPi2, kLambda1, {}));
    CHECK(null.classification == Classification::null_only);
    CHECK(null.equilibria.size() == 1);

    CHECK_THROWS_AS(enumerate_equilibria(BeamParams(-50.0, kLambda1, {1.0})), std::invalid_argument);
}

TEST_CASE("equilibria, resonant") {
    const BeamParams p(-11.0 * kPi2, 9.0 * kLambda1, {});
    const auto set = enumerate_equilibria(p);
    CHECK(set.classification == Classification::infinite);
    REQUIRE(set.families.size() == 1);
    CHECK(set.families[0].i == 1);
    CHECK(set.families[0].j == 3);
    CHECK(set.families[0].level == Approx(kPi2).epsilon(1e-12));
    // zero plus the +-A_2 pair
    REQUIRE(set.equilibria.size() == 3);
    CHECK(set.equilibria[1].mode == 2);
    CHECK(set.equilibria[1].amplitude == Approx(buckled_amplitude(2, p.beta(), p.k())));

    SUBCASE("every member of the ellipse is a steady state") {
        for (int i = 0; i < 16; ++i) {
            const auto member = set.families[0].member(0.4 * i, 6);
            CHECK(static_residual(member, p) <= 1e-10);
            // Lyapunov value is constant on the family.
            CHECK(static_lyapunov(member, p) ==
                  Approx(set.families[0].mu * set.families[0].level + 0.5 * set.families[0].mu * set.families[0].mu)
                      .epsilon(1e-12));
        }
    }
    SUBCASE("above the shared level the resonant pair is simple-free") {
        const auto above = enumerate_equilibria(BeamParams(-8.0 * kPi2, 9.0 * kLambda1, {}));
        CHECK(above.classification == Classification::finite);
        CHECK(above.equilibria.size() == 3);
    }
}

TEST_CASE("census: 2 n_star + 1 solutions off resonance") {
    for (double kk : {0.0, 0.5, 1.0, 2.5, 7.0, 30.0}) {
        const double k = kk * kLambda1;
        if (resonance(k)) continue;
        for (int i = 0; i <= 60; ++i) {
            const double beta = -400.0 + 6.61 * i;
            const BeamParams p(beta, k, {});
            const auto set = enumerate_equilibria(p);
            CHECK(set.equilibria.size() == static_cast<std::size_t>(2 * n_star(beta, k) + 1));
            for (const auto& eq : set.equilibria) CHECK(static_residual(eq.modal, p) <= 1e-10);
        }
    }
}

TEST_CASE("static residual and Lyapunov value") {
    const BeamParams free(0.0, 0.0, {});
    CHECK(static_residual(ModalState::zero(3), free) == 0.0);
    // lambda_1 c + ||u||_1^2 pi^2 c with c = 1: pi^4 + pi^2 pi^2.
    CHECK(static_residual(ModalState{{1.0}, {0.0}}, free) == Approx(2.0 * kLambda1).epsilon(1e-14));

    CHECK(static_lyapunov(ModalState::zero(2), BeamParams(5.0, 1.0, {})) == Approx(12.5));
    const BeamParams p(-4.0 * kPi2, kLambda1, {});
    const auto eq = enumerate_equilibria(p).equilibria[1];
    const double mu = mu_n(kLambda1, 1);
    CHECK(static_lyapunov(eq.modal, p) == Approx(-p.beta() * mu - 0.5 * mu * mu).epsilon(1e-13));
}

TEST_CASE("bifurcation sweep") {
    SUBCASE("k = pi^4: mode 1 is born at -2 pi^2") {
        const auto table = bifurcation_sweep(kLambda1, -120.0, 0.0, 480);
        double birth = -1e300;
        for (const auto& r : table.rows) {
            if (r.n == 1 && r.a_plus > 0.0) birth = std::max(birth, r.beta);
        }
        CHECK(std::abs(birth - (-2.0 * kPi2)) <= 0.25);
        CHECK(table.families.empty());
    }
    SUBCASE("k = 9 pi^4: mode 2 first, resonance (1,3) at 10 pi^2") {
        const auto table = bifurcation_sweep(9.0 * kLambda1, -120.0, 0.0, 480);
        double birth1 = -1e300, birth2 = -1e300;
        for (const auto& r : table.rows) {
            if (r.n == 2) birth2 = std::max(birth2, r.beta);
            if (r.n == 1) birth1 = std::max(birth1, r.beta);
        }
        CHECK(std::abs(birth2 - (-6.25 * kPi2)) <= 0.25);
        CHECK(birth1 == -1e300);  // mode 1 never simple here
        REQUIRE_FALSE(table.families.empty());
        CHECK(table.families.front().i == 1);
        CHECK(table.families.front().j == 3);
        CHECK(std::all_of(table.families.begin(), table.families.end(),
                          [](const FamilyMarker& f) { return f.beta <= -10.0 * kPi2 + 1e-9; }));
    }
    SUBCASE("branch root has zero amplitude") {
        for (double k : {0.0, kLambda1, 30.0 * kLambda1}) {
            for (int n = 1; n <= 4; ++n) CHECK(buckled_amplitude(n, -mu_n(k, n), k) == 0.0);
        }
    }
    SUBCASE("csv headers") {
        const auto table = bifurcation_sweep(9.0 * kLambda1, -120.0, 0.0, 10);
        std::ostringstream a, b;
        write_branch_csv(a, table);
        write_family_csv(b, table);
        CHECK(a.str().rfind("beta,n,a_plus,a_minus\n", 0) == 0);
        CHECK(b.str().rfind("beta,i,j,level\n", 0) == 0);
    }
    CHECK_THROWS_AS(bifurcation_sweep(1.0, 0.0, -1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(bifurcation_sweep(1.0, -1.0, 0.0, 0), std::invalid_argument);
}

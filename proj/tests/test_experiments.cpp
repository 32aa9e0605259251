#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "chainsde/experiments.hpp"

using namespace chainsde;

TEST_CASE("threshold arithmetic") {
    SUBCASE("pinned values") {
        CHECK(threshold(1.5, 2, 2) == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(threshold(1.5, 2, 3) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(threshold(1.5, 3, 3) == doctest::Approx(0.625).epsilon(1e-12));
        // diffusive limit recovers the kinetic 1/3 exponent
        CHECK(threshold(2.0, 2, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("both algebraic forms agree across a parameter grid") {
        for (double alpha = 1.05; alpha < 2.0; alpha += 0.05)
            for (int i = 2; i <= 6; ++i)
                for (int j = i; j <= 6; ++j) {
                    const auto f = threshold_forms(alpha, i, j);  // asserts internally
                    CHECK(f.direct == doctest::Approx(f.dual).epsilon(1e-13));
                    CHECK(f.direct < 1.0);
                    CHECK(f.direct > 0.0);
                }
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(threshold(1.5, 1, 2), std::invalid_argument);
        CHECK_THROWS_AS(threshold(1.5, 3, 2), std::invalid_argument);
        CHECK_THROWS_AS(threshold(0.9, 2, 2), std::invalid_argument);
    }
}

TEST_CASE("extremal envelope constants") {
    SUBCASE("undelayed case k = 0") {
        const auto env = peano_envelope(0, 0.5);
        CHECK(env.exponent == doctest::Approx(2.0));
        CHECK(env.c_tilde == doctest::Approx(1.0));
        CHECK(env.c0 == doctest::Approx(0.5));
    }
    SUBCASE("one integration layer k = 1") {
        const auto env = peano_envelope(1, 0.5);
        CHECK(env.exponent == doctest::Approx(3.0));
        CHECK(env.c_tilde == doctest::Approx(1.0 / std::sqrt(3.0)));
        CHECK(env.c0 == doctest::Approx(1.0 / 6.0));
    }
    SUBCASE("beta = 0 is outside the domain") {
        CHECK_THROWS_AS(peano_envelope(0, 0.0), std::invalid_argument);
    }
}

TEST_CASE("well-posedness validator") {
    SUBCASE("three-level chain at alpha = 1.5") {
        const auto rep = wellposedness_validator(3, 1.5, {1.0, 0.5, 0.7});
        REQUIRE(rep.level.size() == 2);
        CHECK(rep.required[0] == doctest::Approx(0.4));
        CHECK(rep.required[1] == doctest::Approx(0.625));
        CHECK(rep.pass[0]);
        CHECK(rep.pass[1]);
        CHECK(rep.all_pass);
    }
    SUBCASE("a level below its threshold fails") {
        const auto rep = wellposedness_validator(3, 1.5, {1.0, 0.3, 0.7});
        CHECK_FALSE(rep.pass[0]);
        CHECK(rep.pass[1]);
        CHECK_FALSE(rep.all_pass);
    }
    SUBCASE("declared exponent 1 always passes: thresholds stay below 1") {
        for (double alpha = 1.05; alpha < 2.0; alpha += 0.1) {
            const auto rep = wellposedness_validator(4, alpha, {1.0, 1.0, 1.0, 1.0});
            CHECK(rep.all_pass);
        }
    }
    SUBCASE("non-degenerate single level carries no constraints") {
        const auto rep = wellposedness_validator(1, 1.5, {0.1});
        CHECK(rep.level.empty());
        CHECK(rep.all_pass);
    }
}

TEST_CASE("time-space integrability condition") {
    const ChainShape shape{2, {1, 1}};
    SUBCASE("pinned example n = 2, d = 1, alpha = 1.5, (p,q) = (10,14)") {
        const double general = krylov_condition_value(shape, 1.5, 10.0, 14.0);
        const double homog = krylov_condition_homogeneous(2, 1, 1.5, 10.0, 14.0);
        CHECK(homog == doctest::Approx((7.0 / 3.0) * (2.0 / 14.0) + 2.0 / 10.0).epsilon(1e-12));
        CHECK(homog < 2.0);
        CHECK(general == doctest::Approx(homog / 2.0).epsilon(1e-12));
        CHECK(general < 1.0);
    }
    SUBCASE("equal-block rewrite equals twice the general form") {
        const ChainShape s3{3, {2, 2, 2}};
        for (double alpha : {1.2, 1.5, 1.8})
            for (double q : {8.0, 20.0})
                CHECK(krylov_condition_homogeneous(3, 2, alpha, 5.0, q) ==
                      doctest::Approx(2.0 * krylov_condition_value(s3, alpha, 5.0, q))
                          .epsilon(1e-12));
    }
    SUBCASE("alpha = 2 recovers the diffusive form") {
        const double homog = krylov_condition_homogeneous(2, 1, 2.0, 10.0, 14.0);
        CHECK(homog ==
              doctest::Approx((2.0 + 2.0) / 2.0 * (2.0 / 14.0) + 2.0 / 10.0).epsilon(1e-12));
    }
}

TEST_CASE("non-uniqueness experiment below the threshold") {
    PeanoConfig cfg;
    cfg.levels = 2;
    cfg.i = cfg.j = 2;
    cfg.alpha = 1.5;
    cfg.beta = 0.3;  // threshold is 0.4
    cfg.paths = 3000;
    cfg.horizon = 0.4;
    cfg.dt = 1e-3;
    cfg.starts = {1e-1, 1e-2};
    cfg.rho_grid = {0.01, 0.02, 0.05, 0.1, 0.2};
    cfg.master_seed = 77;
    const auto rep = peano_experiment(cfg);
    CHECK(rep.status != ExperimentStatus::Fail);
    CHECK(rep.scalars.at("below_threshold") == 1.0);
    CHECK(rep.scalars.at("c0") == doctest::Approx(0.5));
    const auto& cert = rep.series.at("certified_rho");
    REQUIRE(cert.size() == 2);
    CHECK(cert[0] > 0.0);
    CHECK(cert[1] > 0.0);
    // survival grows with the start value, so the larger start certifies more
    CHECK(cert[0] >= cert[1]);
    CHECK(rep.scalars.at("uniform_rho") > 0.0);
    CHECK(rep.scalars.at("sign_split_ok") == 1.0);
    // survival is monotone non-increasing in rho
    const auto& surv = rep.series.at("survival_start_0.1");
    for (std::size_t k = 1; k < surv.size(); ++k) CHECK(surv[k] <= surv[k - 1] + 1e-12);
}

TEST_CASE("above-threshold run is contrast evidence only") {
    PeanoConfig cfg;
    cfg.beta = 0.6;  // threshold 0.4, margin 0.05 satisfied
    cfg.paths = 500;
    cfg.horizon = 0.3;
    cfg.dt = 2e-3;
    cfg.starts = {1e-2};
    cfg.rho_grid = {0.01, 0.05, 0.1};
    const auto rep = peano_experiment(cfg);
    CHECK(rep.status == ExperimentStatus::Pass);
    CHECK(rep.scalars.at("below_threshold") == 0.0);
    REQUIRE_FALSE(rep.notes.empty());
}

TEST_CASE("experiment preconditions") {
    PeanoConfig cfg;
    SUBCASE("beta too close to the threshold") {
        cfg.beta = 0.38;
        CHECK_THROWS_AS(peano_experiment(cfg), std::invalid_argument);
    }
    SUBCASE("margin below 0.05 rejected") {
        cfg.margin = 0.01;
        CHECK_THROWS_AS(peano_experiment(cfg), std::invalid_argument);
    }
    SUBCASE("unsorted rho grid rejected") {
        cfg.rho_grid = {0.1, 0.05};
        CHECK_THROWS_AS(peano_experiment(cfg), std::invalid_argument);
    }
}

TEST_CASE("bounded-ratio diagnostic for the density estimate") {
    KrylovConfig cfg;
    cfg.paths = 12000;
    cfg.dt = 1e-3;
    cfg.master_seed = 9;
    SUBCASE("valid exponents: ratios decay, fitted constant is flat") {
        const auto rep = krylov_diagnostic(cfg);
        CHECK(rep.status == ExperimentStatus::Pass);
        CHECK(rep.scalars.at("condition_satisfied") == 1.0);
        const auto& r = rep.series.at("ratios");
        REQUIRE(r.size() == 3);
        CHECK(r[1] < r[0]);
        CHECK(r[2] < r[1]);
        CHECK(rep.scalars.at("fitted_variation_finest") < 2.0);
    }
    SUBCASE("violated exponents: growth is reported, nothing asserted") {
        cfg.p = cfg.q = 2.0;  // condition value 7/6 + 1/2 > 1
        const auto rep = krylov_diagnostic(cfg);
        CHECK(rep.scalars.at("condition_satisfied") == 0.0);
        const auto& r = rep.series.at("ratios");
        CHECK(r.back() > r.front());
        REQUIRE_FALSE(rep.notes.empty());
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "chainsde/proxy_density.hpp"
#include "chainsde/stats.hpp"

using namespace chainsde;

namespace {

LevyNoiseSpec stable_1d(double alpha) {
    LevyNoiseSpec s;
    s.alpha = alpha;
    s.dimension = 1;
    return s;
}

ChainModel flat_model(int levels, double alpha) {
    std::vector<int> dims(levels, 1);
    return ChainModel::noise_only({levels, dims}, stable_1d(alpha));
}

Eigen::VectorXd zero(int n) { return Eigen::VectorXd::Zero(n); }

}  // namespace

TEST_CASE("frozen symbol") {
    SUBCASE("vanishes at the origin and reduces to the base symbol when N = d") {
        const auto ctx = make_frozen_context(flat_model(1, 1.5), 0.0, zero(1), 0.0, 1.0);
        CHECK(frozen_symbol(ctx, zero(1)) == 0.0);
        for (double z : {0.3, 1.0, 4.0}) {
            Eigen::VectorXd v(1);
            v[0] = z;
            CHECK(frozen_symbol(ctx, v) == doctest::Approx(-std::pow(z, 1.5)).epsilon(1e-10));
        }
    }
    SUBCASE("kinetic chain has the explicit v-averaged closed form") {
        const double alpha = 1.5, gap = 0.4;
        const auto ctx = make_frozen_context(flat_model(2, alpha), 0.0, zero(2), 0.0, gap);
        // along the second axis the argument is (1-v) z2, so the symbol is
        // -|z2|^alpha / (1 + alpha)
        Eigen::VectorXd v(2);
        v << 0.0, 2.0;
        CHECK(frozen_symbol(ctx, v) ==
              doctest::Approx(-std::pow(2.0, alpha) / (1.0 + alpha)).epsilon(1e-9));
    }
    SUBCASE("coercivity shape: Phi(z) <= C (1 - |z|^alpha) with a frozen fitted C") {
        const double alpha = 1.5;
        const auto ctx = make_frozen_context(flat_model(2, alpha), 0.0, zero(2), 0.0, 0.3);
        // Phi <= C (1 - |z|^alpha) for |z| > 1 means C <= -Phi / (|z|^alpha - 1)
        auto min_ratio = [&](int grid) {
            double c_avail = 1e300;
            for (int a = -grid; a <= grid; ++a)
                for (int b = -grid; b <= grid; ++b) {
                    Eigen::VectorXd z(2);
                    z << 6.0 * a / grid, 6.0 * b / grid;
                    const double nz = z.norm();
                    if (nz <= 1.2) continue;
                    const double phi = frozen_symbol(ctx, z);
                    CHECK(phi <= 0.0);
                    c_avail = std::min(c_avail, -phi / (std::pow(nz, alpha) - 1.0));
                }
            return c_avail;
        };
        const double C = 0.95 * min_ratio(6);
        CHECK(C > 0.0);
        CHECK(min_ratio(13) >= C);
    }
}

TEST_CASE("one-dimensional inversions against closed forms") {
    SUBCASE("alpha = 1 reproduces the Cauchy density") {
        // inversion-only check; the simulation stack never runs at alpha = 1
        const auto ctx = make_frozen_context(flat_model(1, 1.0), 0.0, zero(1), 0.0, 1.0);
        const ProxyDensity dens(ctx, 2001);
        Eigen::VectorXd y(1);
        y[0] = 0.0;
        CHECK(dens(zero(1), y) == doctest::Approx(1.0 / M_PI).epsilon(1e-4));
        y[0] = 1.5;
        CHECK(dens(zero(1), y) ==
              doctest::Approx(1.0 / (M_PI * (1.0 + 1.5 * 1.5))).epsilon(1e-4));
    }
    SUBCASE("alpha = 1.5 normalizes and is symmetric") {
        const auto ctx = make_frozen_context(flat_model(1, 1.5), 0.0, zero(1), 0.0, 1.0);
        const ProxyDensity dens(ctx, 4097);
        CHECK(dens.mass(zero(1), 280.0, 8001) == doctest::Approx(1.0).epsilon(1e-4));
        for (double d : {0.4, 1.3, 3.7}) {
            Eigen::VectorXd yp(1), ym(1);
            yp[0] = d;
            ym[0] = -d;
            CHECK(dens(zero(1), yp) == doctest::Approx(dens(zero(1), ym)).epsilon(1e-6));
        }
        CHECK(dens.clipped_mass() == 0.0);
    }
    SUBCASE("Chapman-Kolmogorov composition through an intermediate time") {
        const auto full = make_frozen_context(flat_model(1, 1.5), 0.0, zero(1), 0.0, 1.0);
        const auto first = make_frozen_context(flat_model(1, 1.5), 0.0, zero(1), 0.0, 0.5);
        const auto second = make_frozen_context(flat_model(1, 1.5), 0.0, zero(1), 0.5, 1.0);
        const ProxyDensity pf(full, 1025), p1(first, 1025), p2(second, 1025);
        const int W = 1600;
        const double half = 80.0, h = 2.0 * half / W;
        for (double yv : {0.0, 0.8, 2.5}) {
            Eigen::VectorXd y(1);
            y[0] = yv;
            double conv = 0.0;
            for (int k = 0; k <= W; ++k) {
                Eigen::VectorXd w(1);
                w[0] = -half + h * k;
                const double sw = (k == 0 || k == W) ? 0.5 : 1.0;
                conv += sw * h * p1(zero(1), w) * p2(w, y);
            }
            CHECK(conv == doctest::Approx(pf(zero(1), y)).epsilon(2e-3));
        }
    }
}

TEST_CASE("kinetic-chain marginal matches a one-dimensional inversion") {
    const double alpha = 1.5, gap = 1.0;
    const auto ctx2 = make_frozen_context(flat_model(2, alpha), 0.0, zero(2), 0.0, gap);
    const auto ctx1 = make_frozen_context(flat_model(1, alpha), 0.0, zero(1), 0.0, gap);
    const ProxyDensity d1(ctx1, 1025);
    // marginal of the first coordinate by direct 1-D inversion of the
    // two-dimensional frozen symbol restricted to the z1-axis
    const double Z = 12.0;
    const int P = 2000;
    auto marginal = [&](double y1) {
        double acc = 0.0;
        for (int k = 0; k <= P; ++k) {
            Eigen::VectorXd z(2);
            z << -Z + 2.0 * Z * k / P, 0.0;
            const double sw = (k == 0 || k == P) ? 0.5 : 1.0;
            acc += sw * std::cos(y1 * z[0]) * std::exp(gap * frozen_symbol(ctx2, z));
        }
        return acc * (2.0 * Z / P) / (2.0 * M_PI);
    };
    for (double y1 : {0.0, 0.7, 2.0}) {
        Eigen::VectorXd y(1);
        y[0] = y1;
        CHECK(marginal(y1) == doctest::Approx(d1(zero(1), y)).epsilon(1e-3));
    }
}

TEST_CASE("scaling collapse under the multi-scale matrices") {
    std::vector<Eigen::VectorXd> u1;
    for (double u = -2.0; u <= 2.0; u += 0.5) {
        Eigen::VectorXd v(1);
        v[0] = u;
        u1.push_back(v);
    }
    SUBCASE("one-dimensional stable profile is exactly self-similar") {
        const auto rep = verify_scaling(flat_model(1, 1.5), 0.0, zero(1), 0.0,
                                        {1.0, 0.3, 0.1}, u1, 1025);
        CHECK(rep.max_deviation < 1e-4);
    }
    SUBCASE("kinetic chain collapses across the gap sweep") {
        std::vector<Eigen::VectorXd> u2;
        for (double a : {-1.5, 0.0, 1.5})
            for (double b : {-1.5, 0.0, 1.5}) {
                Eigen::VectorXd v(2);
                v << a, b;
                u2.push_back(v);
            }
        const auto rep = verify_scaling(flat_model(2, 1.5), 0.0, zero(2), 0.0,
                                        {1.0, 0.3, 0.1}, u2, 257);
        CHECK(rep.max_deviation < 1e-2);
    }
    SUBCASE("tempering breaks the collapse in the tails") {
        auto model = flat_model(1, 1.5);
        model.noise.q_family = QFamily::Tempered;
        model.noise.tempering_rate = 1.0;
        std::vector<Eigen::VectorXd> tail;
        for (double u : {3.0, 4.0, 5.0}) {
            Eigen::VectorXd v(1);
            v[0] = u;
            tail.push_back(v);
        }
        const auto center_rep =
            verify_scaling(model, 0.0, zero(1), 0.0, {1.0, 0.1}, {u1[4]}, 1025);  // u = 0
        const auto tail_rep = verify_scaling(model, 0.0, zero(1), 0.0, {1.0, 0.1}, tail, 1025);
        // relative tail divergence dwarfs the central one
        CHECK(tail_rep.max_deviation / (tail_rep.profiles[0][0] + 1e-300) >
              10.0 * center_rep.max_deviation / center_rep.profiles[0][0]);
    }
}

TEST_CASE("derivative bounds carry the multi-scale exponents") {
    const double alpha = 1.5;
    const auto model = flat_model(2, alpha);
    const std::vector<double> gaps = {0.6, 0.3, 0.15, 0.075};
    SUBCASE("k = 0 slope vanishes after the T-normalization") {
        const auto rep = derivative_bound_check(model, 0.0, zero(2), 0.0, gaps, 0, 0, 257);
        CHECK(std::abs(rep.slope) < 0.05);
    }
    SUBCASE("first derivative, first coordinate: slope -1/alpha") {
        const auto rep = derivative_bound_check(model, 0.0, zero(2), 0.0, gaps, 0, 1, 257);
        CHECK(rep.slope == doctest::Approx(-1.0 / alpha).epsilon(0.05));
    }
    SUBCASE("first derivative, second coordinate: slope -(1+alpha)/alpha") {
        const auto rep = derivative_bound_check(model, 0.0, zero(2), 0.0, gaps, 1, 1, 257);
        CHECK(rep.slope == doctest::Approx(-(1.0 + alpha) / alpha).epsilon(0.05));
    }
}

TEST_CASE("Monte Carlo terminal histogram agrees with the inverted density") {
    const double alpha = 1.5;
    SimulationPlan plan;
    plan.model = flat_model(2, alpha);
    plan.model.noise.small_jump_policy = SmallJumpPolicy::GaussianMatch;
    plan.x0 = zero(2);
    plan.horizon = 1.0;
    plan.dt = 5e-3;
    plan.cutoff = 0.03;
    plan.paths = 20000;
    plan.master_seed = 404;
    const auto ens = simulate_chain(plan);

    const auto ctx = make_frozen_context(plan.model, 0.0, zero(2), 0.0, 1.0);
    const ProxyDensity dens(ctx, 257);
    // 2-D bins over a central box plus one catch-all outside bin; edges are
    // non-uniform so every bin keeps a healthy expected count
    const std::vector<double> ex = {-3.0, -0.8, 0.0, 0.8, 3.0};
    const std::vector<double> ey = {-2.0, -0.6, 0.0, 0.6, 2.0};
    std::vector<double> probs;
    std::vector<int> counts;
    auto bin_prob = [&](double x0, double x1, double y0, double y1) {
        const int Q = 16;
        double acc = 0.0;
        for (int a = 0; a <= Q; ++a)
            for (int b = 0; b <= Q; ++b) {
                Eigen::VectorXd y(2);
                y << x0 + (x1 - x0) * a / Q, y0 + (y1 - y0) * b / Q;
                const double wa = (a == 0 || a == Q) ? 0.5 : 1.0;
                const double wb = (b == 0 || b == Q) ? 0.5 : 1.0;
                acc += wa * wb * dens(zero(2), y);
            }
        return acc * (x1 - x0) * (y1 - y0) / (Q * Q);
    };
    double inside = 0.0;
    for (std::size_t i = 0; i + 1 < ex.size(); ++i)
        for (std::size_t j = 0; j + 1 < ey.size(); ++j) {
            const double x0 = ex[i], x1 = ex[i + 1];
            const double y0 = ey[j], y1 = ey[j + 1];
            probs.push_back(bin_prob(x0, x1, y0, y1));
            inside += probs.back();
            int c = 0;
            for (int p = 0; p < plan.paths; ++p) {
                const auto& v = ens.states[p].back();
                if (v[0] >= x0 && v[0] < x1 && v[1] >= y0 && v[1] < y1) ++c;
            }
            counts.push_back(c);
        }
    probs.push_back(1.0 - inside);
    int outside = plan.paths;
    for (int c : counts) outside -= c;
    counts.push_back(outside);
    double chi2 = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        const double e = probs[k] * plan.paths;
        REQUIRE(e > 5.0);
        chi2 += (counts[k] - e) * (counts[k] - e) / e;
    }
    const double pval = 1.0 - stats::gamma_p(0.5 * (probs.size() - 1), 0.5 * chi2);
    CHECK(pval > 0.01);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "chainsde/scale_geometry.hpp"

using namespace chainsde;

namespace {

ChainShape shape3() { return {3, {1, 1, 1}}; }
ChainShape shape2() { return {2, {1, 1}}; }

// exp(tA) for the canonical nilpotent chain: (tA)^k/k! below the diagonal
Eigen::MatrixXd nilpotent_exp(const ChainShape& sh, double t) {
    const int N = sh.total();
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(N, N);
    double fact = 1.0;
    for (int k = 1; k < sh.n; ++k) {
        fact *= k;
        for (int i = k; i < sh.n; ++i) R(i, i - k) = std::pow(t, k) / fact;
    }
    return R;
}

}  // namespace

TEST_CASE("shape validation") {
    CHECK_NOTHROW(shape3().validate());
    ChainShape bad{2, {1, 2}};  // increasing block size
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    ChainShape bad2{2, {1}};
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
    ChainShape ok{3, {2, 2, 1}};
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.total() == 5);
    CHECK(ok.offset(2) == 4);
}

TEST_CASE("scale matrices closed forms") {
    SUBCASE("diagonal powers at t = 0.5") {
        const auto sm = scale_matrix(shape3(), 1.5, 0.5);
        CHECK(sm.m_diag[0] == 1.0);
        CHECK(sm.m_diag[1] == 0.5);
        CHECK(sm.m_diag[2] == 0.25);
    }
    SUBCASE("unit time gives unit determinant") {
        const auto sm = scale_matrix(shape2(), 1.37, 1.0);
        CHECK(sm.det_t_closed == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("kinetic chain at alpha = 2, t = 0.25") {
        // exponent (1/2) + (3/2) = 2
        const auto sm = scale_matrix(shape2(), 2.0, 0.25);
        CHECK(sm.det_t_closed == doctest::Approx(0.0625).epsilon(1e-13));
    }
    SUBCASE("closed form equals product of diagonal entries") {
        for (double t : {0.01, 0.3, 2.0})
            for (double alpha : {1.2, 1.5, 1.9}) {
                const auto sm = scale_matrix({3, {2, 2, 1}}, alpha, t);
                CHECK(sm.det_t_closed ==
                      doctest::Approx(sm.det_t_product()).epsilon(1e-12));
            }
    }
    SUBCASE("semigroup of the diagonal powers") {
        const auto a = scale_matrix(shape3(), 1.5, 0.3);
        const auto b = scale_matrix(shape3(), 1.5, 0.7);
        const auto c = scale_matrix(shape3(), 1.5, 0.21);
        for (int i = 0; i < 3; ++i)
            CHECK(a.m_diag[i] * b.m_diag[i] == doctest::Approx(c.m_diag[i]).epsilon(1e-13));
    }
}

TEST_CASE("chain matrix validation polices structure") {
    auto cm = ChainMatrix::canonical(shape3());
    CHECK_NOTHROW(cm.validate());

    // noise block leaking two levels down
    auto bad = cm;
    Eigen::MatrixXd A = cm(0.0);
    A(2, 0) = 0.5;
    bad.eval = [A](double) { return A; };
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    // rank-deficient subdiagonal
    auto bad2 = cm;
    Eigen::MatrixXd A2 = cm(0.0);
    A2(1, 0) = 0.0;
    bad2.eval = [A2](double) { return A2; };
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);

    // declared bound violated
    auto bad3 = cm;
    bad3.bound = 0.5;
    CHECK_THROWS_AS(bad3.validate(), std::invalid_argument);

    CHECK(cm.embedding().rows() == 3);
    CHECK(cm.embedding().cols() == 1);
    CHECK(cm.embedding()(0, 0) == 1.0);
}

TEST_CASE("resolvent identity and closed form") {
    const auto cm = ChainMatrix::canonical(shape3());
    SUBCASE("s = t gives the identity") {
        CHECK((resolvent(cm, 0.4, 0.4) - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
    }
    SUBCASE("constant nilpotent matrix exponential") {
        for (double gap : {0.1, 0.5, 1.0}) {
            const Eigen::MatrixXd R = resolvent(cm, 0.2, 0.2 + gap);
            CHECK((R - nilpotent_exp(shape3(), gap)).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
    SUBCASE("backward solve inverts the forward one") {
        const Eigen::MatrixXd F = resolvent(cm, 0.1, 0.9);
        const Eigen::MatrixXd Bw = resolvent(cm, 0.9, 0.1);
        CHECK((F * Bw - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("resolvent composition for a time-dependent bounded matrix") {
    ChainMatrix cm;
    cm.shape = shape3();
    cm.bound = 2.0;
    cm.horizon = 1.0;
    cm.eval = [](double t) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
        A(1, 0) = 1.0 + 0.5 * std::sin(3.0 * t);
        A(2, 1) = 1.0 + 0.3 * std::cos(2.0 * t);
        A(0, 0) = 0.4 * std::cos(t);
        A(1, 2) = 0.2 * std::sin(t);
        return A;
    };
    cm.validate();
    const double tol = 1e-10;
    const Eigen::MatrixXd R_su = resolvent(cm, 0.5, 0.9, tol);
    const Eigen::MatrixXd R_ut = resolvent(cm, 0.1, 0.5, tol);
    const Eigen::MatrixXd R_st = resolvent(cm, 0.1, 0.9, tol);
    CHECK((R_su * R_ut - R_st).cwiseAbs().maxCoeff() < 10.0 * 1e-8);

    SUBCASE("block bound: subdiagonal entries scale like (s-t)^{i-j}") {
        // fit C at gap 1, then require the bound to keep holding as the gap shrinks
        double C = 0.0;
        for (double gap : {1.0, 0.3, 0.1, 0.03}) {
            const Eigen::MatrixXd R = resolvent(cm, 0.0, gap, tol);
            double worst = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double envelope = j >= i ? 1.0 : std::pow(gap, i - j);
                    worst = std::max(worst, std::abs(R(i, j)) / envelope);
                }
            if (C == 0.0) C = 1.05 * worst;  // frozen from the coarsest gap
            CHECK(worst <= C);
        }
    }
}

TEST_CASE("resolvent scaling factor") {
    const auto cm = ChainMatrix::canonical(shape2());
    SUBCASE("v = 1 collapses to the identity") {
        const Eigen::MatrixXd R = resolvent_scaling_factor(cm, 1.5, 0.2, 0.7, 1.0);
        CHECK((R - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("closed form for the kinetic chain: subdiagonal entry v - 1") {
        for (double gap : {1.0, 0.1, 0.01})
            for (double v : {0.0, 0.25, 0.8}) {
                const Eigen::MatrixXd R = resolvent_scaling_factor(cm, 1.5, 0.0, gap, v);
                CHECK(R(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
                CHECK(R(1, 1) == doctest::Approx(1.0).epsilon(1e-8));
                CHECK(R(0, 1) == doctest::Approx(0.0).epsilon(1e-8));
                CHECK(R(1, 0) == doctest::Approx(v - 1.0).epsilon(1e-7));
            }
    }
    SUBCASE("entries stay in a fixed box as the gap shrinks") {
        double box = 0.0;
        for (double gap : {1.0, 0.1, 0.01}) {
            double m = 0.0;
            for (double v : {0.0, 0.2, 0.5, 0.9})
                m = std::max(m,
                             resolvent_scaling_factor(cm, 1.5, 0.0, gap, v).cwiseAbs().maxCoeff());
            if (box == 0.0) box = 1.05 * m;
            CHECK(m <= box);
        }
    }
}

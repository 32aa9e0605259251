#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace chainsde {

using OdeRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

// One classical RK4 step.
inline Eigen::VectorXd rk4_step(const OdeRhs& f, double t, const Eigen::VectorXd& y, double h) {
    const Eigen::VectorXd k1 = f(t, y);
    const Eigen::VectorXd k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = f(t + h, y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Fixed-step RK4 from t0 to t1 (either direction) with n steps.
inline Eigen::VectorXd rk4_integrate(const OdeRhs& f, double t0, double t1,
                                     const Eigen::VectorXd& y0, int n_steps) {
    const double h = (t1 - t0) / n_steps;
    Eigen::VectorXd y = y0;
    for (int i = 0; i < n_steps; ++i) y = rk4_step(f, t0 + i * h, y, h);
    return y;
}

// Adaptive Dormand-Prince 4(5) from t0 to t1 (either direction), absolute
// error control per unit step. Throws on step-size underflow.
inline Eigen::VectorXd adaptive_rk45(const OdeRhs& f, double t0, double t1,
                                     const Eigen::VectorXd& y0, double tol,
                                     const std::function<void(double, const Eigen::VectorXd&)>&
                                         observer = nullptr) {
    static const double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double b5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                                 -2187.0 / 6784, 11.0 / 84, 0.0};
    static const double b4[7] = {5179.0 / 57600,  0.0,     7571.0 / 16695, 393.0 / 640,
                                 -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    if (t1 == t0) return y0;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    double t = t0;
    Eigen::VectorXd y = y0;
    double h = dir * span / 16.0;
    if (observer) observer(t, y);
    Eigen::VectorXd k[7];
    while (dir * (t1 - t) > 1e-14 * span) {
        if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
        if (std::abs(h) < 1e-15 * span)
            throw std::runtime_error("adaptive_rk45: step-size underflow");
        k[0] = f(t, y);
        for (int i = 1; i < 7; ++i) {
            Eigen::VectorXd yi = y;
            for (int j = 0; j < i; ++j) yi += h * a[i][j] * k[j];
            k[i] = f(t + c[i] * h, yi);
        }
        Eigen::VectorXd y5 = y, err = Eigen::VectorXd::Zero(y.size());
        for (int i = 0; i < 7; ++i) {
            y5 += h * b5[i] * k[i];
            err += h * (b5[i] - b4[i]) * k[i];
        }
        const double e = err.norm() / std::max(1e-300, std::abs(h) / span);
        if (e <= tol || std::abs(h) <= 1e-13 * span) {
            t += h;
            y = y5;
            if (observer) observer(t, y);
        }
        const double fac = e > 0.0 ? 0.9 * std::pow(tol / e, 0.2) : 4.0;
        h *= std::clamp(fac, 0.2, 4.0);
    }
    return y;
}

}  // namespace chainsde

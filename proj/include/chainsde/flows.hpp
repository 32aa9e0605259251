#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "chainsde/scale_geometry.hpp"

namespace chainsde {

// Nonlinear drift F = (F_1..F_n); component i maps (t, full state) to R^{d_i}
// and may depend only on levels i..n (subset declared in `depends`).
struct DriftSpec {
    ChainShape shape;
    std::vector<std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>> components;
    std::vector<std::vector<int>> depends;  // 0-based levels each component reads
    std::vector<double> holder;             // beta^j per level j (size n)
    double bound_at_zero = 1.0;             // K with |F_i(t,0)| <= K

    Eigen::VectorXd eval(double t, const Eigen::VectorXd& x) const;
    // finite-difference probes in forbidden variables + basic shape checks
    void validate(int probes = 8, double noise_floor = 1e-9) const;
    // well-posedness thresholds beta^j > (1 + alpha(j-2)) / (1 + alpha(j-1)), j >= 2
    bool satisfies_thresholds(double alpha) const;

    static DriftSpec zero(ChainShape shape);
};

enum class FlowIntegrator { FixedRk4, Adaptive };

// One deterministic solution of the transport ODE
// d theta = [A_t theta + F(t, theta)] dt started from theta(tau) = xi.
// The fixed-step RK4 integrator (fixed evaluation order) is the measurable
// selection used throughout; the adaptive integrator provides an independent
// second selection for the approximate-Lipschitz diagnostic.
struct FlowSolution {
    std::vector<double> times;  // monotone from tau to t_end (either direction)
    std::vector<Eigen::VectorXd> states;

    const Eigen::VectorXd& endpoint() const { return states.back(); }
    Eigen::VectorXd value_at(double u) const;  // linear interpolation
    double start_time() const { return times.front(); }
    double end_time() const { return times.back(); }
};

FlowSolution solve_flow(const DriftSpec& drift, const ChainMatrix& matrix, double tau,
                        const Eigen::VectorXd& xi, double t_end, int grid_steps = 2000,
                        FlowIntegrator integrator = FlowIntegrator::FixedRk4,
                        double adaptive_tol = 1e-10, double state_bound = 1e8);

// Frozen shift m~^{tau,xi}_{s,t}(x) = R_{s,t} x + int_t^s R_{s,u} F(u, theta_{u,tau}(xi)) du,
// computed from a flow solution that covers [t, s].
Eigen::VectorXd frozen_shift(const DriftSpec& drift, const ChainMatrix& matrix,
                             const FlowSolution& frozen_flow, double t, double s,
                             const Eigen::VectorXd& x, int grid_steps = 2000);

// convenience: solves the backward flow from (tau, xi) far enough to cover [t, s]
Eigen::VectorXd frozen_shift(const DriftSpec& drift, const ChainMatrix& matrix, double tau,
                             const Eigen::VectorXd& xi, double t, double s,
                             const Eigen::VectorXd& x, int grid_steps = 2000);

enum class MollifySchedule { FlowLemma, DeterminantLemma };

// Multi-scale Gaussian smoothing of the drift: component i is smoothed in
// variable level j at radius delta_{ij}. Radii follow the selected schedule:
//   flow lemma:        delta_ij = (s-t)^{(1 + alpha(i-2)) / (alpha beta^j)},  2 <= i <= j
//   determinant lemma: delta_ij = Cbar (s-t)^{(1 + alpha(j-2)) / (alpha beta^j)},
//                      with level-1 radii at the macro constant C1
// Level 1 is left unsmoothed under the flow-lemma schedule.
struct MollifiedDrift {
    DriftSpec base;
    Eigen::MatrixXd radii;  // (n x n), entry (i,j) is delta_{i+1,j+1}; 0 = no smoothing
    MollifySchedule schedule = MollifySchedule::FlowLemma;
    int quad_points = 11;  // Gauss-Hermite nodes per smoothed variable

    Eigen::VectorXd eval(double t, const Eigen::VectorXd& x) const;
    // derivative of the smoothed drift, via the Gaussian score identity
    Eigen::MatrixXd jacobian(double t, const Eigen::VectorXd& x) const;
};

MollifiedDrift mollify_drift(const DriftSpec& drift, double alpha, double s_minus_t,
                             MollifySchedule schedule, double cbar = 10.0, double c1 = 100.0);

// Backward mollified flow theta^delta_{t,s}(y) together with det J^delta_{t,s}(y),
// the Jacobian determinant of y -> theta^delta_{t,s}(y), via the variational ODE
// dJ/du = -(A_u + DF^delta) J integrated from J(s) = Id down to t.
struct JacobianResult {
    Eigen::VectorXd flow_endpoint;
    double det = 0.0;
};

JacobianResult flow_jacobian_det(const MollifiedDrift& mdrift, const ChainMatrix& matrix,
                                 double t, double s, const Eigen::VectorXd& y,
                                 int grid_steps = 2000);

// Approximate-Lipschitz diagnostic: lhs = |T^{-1}_{s-t}(x - theta_{t,s}(y))|
// against rhs = |T^{-1}_{s-t}(theta-check_{s,t}(x) - y)| where theta-check is
// the independently selected (adaptive) flow.
struct BilipReport {
    double lhs = 0.0;
    double rhs = 0.0;
};

BilipReport approximate_lipschitz_diagnostic(const DriftSpec& drift, const ChainMatrix& matrix,
                                             double alpha, double t, double s,
                                             const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                             int grid_steps = 2000);

}  // namespace chainsde

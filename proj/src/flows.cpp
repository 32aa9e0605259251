#include "chainsde/flows.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chainsde/ode.hpp"
#include "chainsde/rng.hpp"

namespace chainsde {

namespace {

// Gauss-Hermite rule for the standard Gaussian weight (Golub-Welsch on the
// probabilists' Hermite recurrence); weights sum to 1.
void gauss_hermite(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        J(k, k + 1) = std::sqrt(k + 1.0);
        J(k + 1, k) = J(k, k + 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes = es.eigenvalues();
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        const double v0 = es.eigenvectors()(0, k);
        weights[k] = v0 * v0;
    }
}

std::vector<int> default_depends(int i, int n) {
    std::vector<int> d;
    for (int j = i; j < n; ++j) d.push_back(j);
    return d;
}

}  // namespace

Eigen::VectorXd DriftSpec::eval(double t, const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(shape.total());
    for (int i = 0; i < shape.n; ++i)
        out.segment(shape.offset(i), shape.dims[i]) = components[i](t, x);
    return out;
}

void DriftSpec::validate(int probes, double noise_floor) const {
    shape.validate();
    if (static_cast<int>(components.size()) != shape.n)
        throw std::invalid_argument("drift needs one component per chain level");
    if (static_cast<int>(holder.size()) != shape.n)
        throw std::invalid_argument("drift needs one Holder exponent per level");
    for (double b : holder)
        if (!(b > 0.0 && b <= 1.0))
            throw std::invalid_argument("Holder exponents must lie in (0,1]");
    if (!depends.empty() && static_cast<int>(depends.size()) != shape.n)
        throw std::invalid_argument("dependency list size must equal the level count");
    for (int i = 0; i < shape.n; ++i) {
        const auto deps = depends.empty() ? default_depends(i, shape.n) : depends[i];
        for (int j : deps)
            if (j < i || j >= shape.n)
                throw std::invalid_argument("component may only depend on its own and later levels");
    }

    const int N = shape.total();
    RngStream rng(0xF10D5u, 0);
    for (int p = 0; p < probes; ++p) {
        Eigen::VectorXd x(N);
        for (int c = 0; c < N; ++c) x[c] = 3.0 * (2.0 * rng.uniform() - 1.0);
        const double t = rng.uniform();
        for (int i = 0; i < shape.n; ++i) {
            const auto deps = depends.empty() ? default_depends(i, shape.n) : depends[i];
            const Eigen::VectorXd base = components[i](t, x);
            for (int j = 0; j < shape.n; ++j) {
                if (std::find(deps.begin(), deps.end(), j) != deps.end()) continue;
                Eigen::VectorXd xp = x;
                for (int c = 0; c < shape.dims[j]; ++c)
                    xp[shape.offset(j) + c] += 0.5 + 0.3 * rng.uniform();
                const double resp = (components[i](t, xp) - base).cwiseAbs().maxCoeff();
                if (resp > noise_floor) {
                    std::ostringstream os;
                    os << "drift component " << i + 1 << " responds to undeclared level " << j + 1
                       << " (|change| = " << resp << ")";
                    throw std::invalid_argument(os.str());
                }
            }
        }
    }
}

bool DriftSpec::satisfies_thresholds(double alpha) const {
    for (int i = 0; i < shape.n; ++i) {
        const auto deps = depends.empty() ? default_depends(i, shape.n) : depends[i];
        for (int j : deps) {
            if (j < 1) continue;  // variable level 1 carries no constraint
            const double thr = (1.0 + alpha * (i - 1)) / (1.0 + alpha * j);
            if (!(holder[j] > thr)) return false;
        }
    }
    return true;
}

DriftSpec DriftSpec::zero(ChainShape shape) {
    DriftSpec d;
    d.shape = shape;
    for (int i = 0; i < shape.n; ++i) {
        const int di = shape.dims[i];
        d.components.push_back(
            [di](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(di).eval(); });
        d.depends.push_back({});
        d.holder.push_back(1.0);
    }
    d.bound_at_zero = 0.0;
    return d;
}

Eigen::VectorXd FlowSolution::value_at(double u) const {
    const bool increasing = times.back() >= times.front();
    const double lo = increasing ? times.front() : times.back();
    const double hi = increasing ? times.back() : times.front();
    const double span = std::max(1e-300, hi - lo);
    if (u < lo - 1e-9 * span || u > hi + 1e-9 * span)
        throw std::invalid_argument("flow solution does not cover the requested time");
    u = std::clamp(u, lo, hi);
    // locate the grid segment containing u
    size_t k;
    if (increasing) {
        k = std::upper_bound(times.begin(), times.end(), u) - times.begin();
    } else {
        k = std::upper_bound(times.begin(), times.end(), u, std::greater<double>()) - times.begin();
    }
    if (k == 0) return states.front();
    if (k >= times.size()) return states.back();
    const double t0 = times[k - 1], t1 = times[k];
    const double w = t1 == t0 ? 0.0 : (u - t0) / (t1 - t0);
    return (1.0 - w) * states[k - 1] + w * states[k];
}

FlowSolution solve_flow(const DriftSpec& drift, const ChainMatrix& matrix, double tau,
                        const Eigen::VectorXd& xi, double t_end, int grid_steps,
                        FlowIntegrator integrator, double adaptive_tol, double state_bound) {
    auto rhs = [&](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd {
        return matrix(t) * y + drift.eval(t, y);
    };
    FlowSolution sol;
    if (t_end == tau) {
        sol.times = {tau, tau};
        sol.states = {xi, xi};
        return sol;
    }
    if (integrator == FlowIntegrator::FixedRk4) {
        const double h = (t_end - tau) / grid_steps;
        sol.times.reserve(grid_steps + 1);
        sol.states.reserve(grid_steps + 1);
        sol.times.push_back(tau);
        sol.states.push_back(xi);
        Eigen::VectorXd y = xi;
        for (int k = 0; k < grid_steps; ++k) {
            y = rk4_step(rhs, tau + k * h, y, h);
            if (!(y.norm() < state_bound))
                throw std::runtime_error("flow solution left the admissible state bound");
            sol.times.push_back(tau + (k + 1) * h);
            sol.states.push_back(y);
        }
        sol.times.back() = t_end;  // kill rounding drift at the endpoint
    } else {
        adaptive_rk45(rhs, tau, t_end, xi, adaptive_tol,
                      [&](double t, const Eigen::VectorXd& y) {
                          if (!(y.norm() < state_bound))
                              throw std::runtime_error(
                                  "flow solution left the admissible state bound");
                          sol.times.push_back(t);
                          sol.states.push_back(y);
                      });
        sol.times.back() = t_end;
    }
    return sol;
}

Eigen::VectorXd frozen_shift(const DriftSpec& drift, const ChainMatrix& matrix,
                             const FlowSolution& frozen_flow, double t, double s,
                             const Eigen::VectorXd& x, int grid_steps) {
    const double lo = std::min(t, s), hi = std::max(t, s);
    const double flo = std::min(frozen_flow.start_time(), frozen_flow.end_time());
    const double fhi = std::max(frozen_flow.start_time(), frozen_flow.end_time());
    const double pad = 1e-9 * std::max(1.0, fhi - flo);
    if (lo < flo - pad || hi > fhi + pad)
        throw std::invalid_argument("frozen flow does not cover [t, s]");
    // d m / du = A_u m + F(u, theta_{u,tau}(xi)), m(t) = x, integrated to u = s
    auto rhs = [&](double u, const Eigen::VectorXd& m) -> Eigen::VectorXd {
        return matrix(u) * m + drift.eval(u, frozen_flow.value_at(u));
    };
    return rk4_integrate(rhs, t, s, x, grid_steps);
}

Eigen::VectorXd frozen_shift(const DriftSpec& drift, const ChainMatrix& matrix, double tau,
                             const Eigen::VectorXd& xi, double t, double s,
                             const Eigen::VectorXd& x, int grid_steps) {
    const double lo = std::min({t, s, tau}), hi = std::max({t, s, tau});
    FlowSolution cover;
    if (tau > lo) {
        FlowSolution down = solve_flow(drift, matrix, tau, xi, lo, grid_steps);
        std::reverse(down.times.begin(), down.times.end());
        std::reverse(down.states.begin(), down.states.end());
        cover = std::move(down);
    } else {
        cover.times = {tau};
        cover.states = {xi};
    }
    if (tau < hi) {
        const FlowSolution up = solve_flow(drift, matrix, tau, xi, hi, grid_steps);
        cover.times.insert(cover.times.end(), up.times.begin() + 1, up.times.end());
        cover.states.insert(cover.states.end(), up.states.begin() + 1, up.states.end());
    }
    return frozen_shift(drift, matrix, cover, t, s, x, grid_steps);
}

namespace {

// coordinates of one drift component smoothed by the schedule, with their radii
struct SmoothPlan {
    std::vector<int> coords;
    std::vector<double> radius;
};

SmoothPlan smoothing_plan(const MollifiedDrift& md, int component) {
    SmoothPlan plan;
    const ChainShape& sh = md.base.shape;
    const auto deps = md.base.depends.empty() ? default_depends(component, sh.n)
                                              : md.base.depends[component];
    for (int j : deps) {
        const double delta = md.radii(component, j);
        if (delta <= 0.0) continue;
        for (int c = 0; c < sh.dims[j]; ++c) {
            plan.coords.push_back(sh.offset(j) + c);
            plan.radius.push_back(delta);
        }
    }
    return plan;
}

}  // namespace

Eigen::VectorXd MollifiedDrift::eval(double t, const Eigen::VectorXd& x) const {
    Eigen::VectorXd nodes, weights;
    gauss_hermite(quad_points, nodes, weights);
    Eigen::VectorXd out(base.shape.total());
    for (int i = 0; i < base.shape.n; ++i) {
        const SmoothPlan plan = smoothing_plan(*this, i);
        const int D = static_cast<int>(plan.coords.size());
        if (D == 0) {
            out.segment(base.shape.offset(i), base.shape.dims[i]) = base.components[i](t, x);
            continue;
        }
        if (std::pow(static_cast<double>(quad_points), D) > 2e6)
            throw std::invalid_argument("mollification tensor quadrature too large");
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(base.shape.dims[i]);
        std::vector<int> idx(D, 0);
        Eigen::VectorXd xs = x;
        while (true) {
            double w = 1.0;
            for (int d = 0; d < D; ++d) {
                xs[plan.coords[d]] = x[plan.coords[d]] - plan.radius[d] * nodes[idx[d]];
                w *= weights[idx[d]];
            }
            acc += w * base.components[i](t, xs);
            int d = 0;
            while (d < D && ++idx[d] == quad_points) idx[d++] = 0;
            if (d == D) break;
        }
        out.segment(base.shape.offset(i), base.shape.dims[i]) = acc;
    }
    return out;
}

Eigen::MatrixXd MollifiedDrift::jacobian(double t, const Eigen::VectorXd& x) const {
    Eigen::VectorXd nodes, weights;
    gauss_hermite(quad_points, nodes, weights);
    const int N = base.shape.total();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < base.shape.n; ++i) {
        const int row0 = base.shape.offset(i);
        const int di = base.shape.dims[i];
        const SmoothPlan plan = smoothing_plan(*this, i);
        const int D = static_cast<int>(plan.coords.size());
        const auto deps = base.depends.empty() ? default_depends(i, base.shape.n)
                                               : base.depends[i];
        if (D > 0) {
            // one tensor sweep gives all smoothed columns by the score identity
            // D_c F^delta(x) = -E[F(x - delta u) u_c] / delta_c
            std::vector<int> idx(D, 0);
            Eigen::VectorXd xs = x;
            while (true) {
                double w = 1.0;
                for (int d = 0; d < D; ++d) {
                    xs[plan.coords[d]] = x[plan.coords[d]] - plan.radius[d] * nodes[idx[d]];
                    w *= weights[idx[d]];
                }
                const Eigen::VectorXd f = base.components[i](t, xs);
                for (int d = 0; d < D; ++d)
                    J.block(row0, plan.coords[d], di, 1) +=
                        (-w * nodes[idx[d]] / plan.radius[d]) * f;
                int d = 0;
                while (d < D && ++idx[d] == quad_points) idx[d++] = 0;
                if (d == D) break;
            }
        }
        // unsmoothed dependent variables: central differences of the smoothed map
        for (int j : deps) {
            if (radii(i, j) > 0.0) continue;
            for (int c = 0; c < base.shape.dims[j]; ++c) {
                const int col = base.shape.offset(j) + c;
                const double h = 1e-6 * (1.0 + std::abs(x[col]));
                Eigen::VectorXd xp = x, xm = x;
                xp[col] += h;
                xm[col] -= h;
                J.block(row0, col, di, 1) =
                    (eval(t, xp).segment(row0, di) - eval(t, xm).segment(row0, di)) / (2.0 * h);
            }
        }
    }
    return J;
}

MollifiedDrift mollify_drift(const DriftSpec& drift, double alpha, double s_minus_t,
                             MollifySchedule schedule, double cbar, double c1) {
    if (!(s_minus_t > 0.0)) throw std::invalid_argument("mollify_drift: need s - t > 0");
    const int n = drift.shape.n;
    MollifiedDrift md;
    md.base = drift;
    md.schedule = schedule;
    md.radii = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double delta = 0.0;
            if (schedule == MollifySchedule::FlowLemma) {
                if (i >= 1)  // level 1 stays unsmoothed
                    delta = std::pow(s_minus_t, (1.0 + alpha * (i - 1)) / (alpha * drift.holder[j]));
            } else {
                delta = i == 0 ? c1
                               : cbar * std::pow(s_minus_t,
                                                 (1.0 + alpha * (j - 1)) / (alpha * drift.holder[j]));
            }
            if (delta > 0.0 && !(delta > 1e-300))
                throw std::invalid_argument("mollification radius underflow");
            md.radii(i, j) = delta;
        }
    return md;
}

JacobianResult flow_jacobian_det(const MollifiedDrift& mdrift, const ChainMatrix& matrix,
                                 double t, double s, const Eigen::VectorXd& y, int grid_steps) {
    const int N = matrix.shape.total();
    // state = (theta, vec J); backward from u = s where theta = y, J = Id
    auto rhs = [&](double u, const Eigen::VectorXd& z) -> Eigen::VectorXd {
        const Eigen::VectorXd theta = z.head(N);
        const Eigen::Map<const Eigen::MatrixXd> J(z.data() + N, N, N);
        const Eigen::MatrixXd A = matrix(u);
        Eigen::VectorXd dz(N + N * N);
        dz.head(N) = A * theta + mdrift.eval(u, theta);
        const Eigen::MatrixXd dJ = (A + mdrift.jacobian(u, theta)) * J;
        dz.tail(N * N) = Eigen::Map<const Eigen::VectorXd>(dJ.data(), N * N);
        return dz;
    };
    Eigen::VectorXd z0(N + N * N);
    z0.head(N) = y;
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N, N);
    z0.tail(N * N) = Eigen::Map<const Eigen::VectorXd>(id.data(), N * N);
    const Eigen::VectorXd z = rk4_integrate(rhs, s, t, z0, grid_steps);
    JacobianResult res;
    res.flow_endpoint = z.head(N);
    res.det = Eigen::Map<const Eigen::MatrixXd>(z.data() + N, N, N).determinant();
    return res;
}

BilipReport approximate_lipschitz_diagnostic(const DriftSpec& drift, const ChainMatrix& matrix,
                                             double alpha, double t, double s,
                                             const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                             int grid_steps) {
    if (!(s > t)) throw std::invalid_argument("approximate_lipschitz_diagnostic: need t < s");
    const ScaleMatrices sm = scale_matrix(matrix.shape, alpha, s - t);
    const Eigen::VectorXd back = solve_flow(drift, matrix, s, y, t, grid_steps).endpoint();
    const Eigen::VectorXd fwd =
        solve_flow(drift, matrix, t, x, s, grid_steps, FlowIntegrator::Adaptive).endpoint();
    BilipReport rep;
    rep.lhs = (sm.t_inv_diag().asDiagonal() * (x - back)).norm();
    rep.rhs = (sm.t_inv_diag().asDiagonal() * (fwd - y)).norm();
    return rep;
}

}  // namespace chainsde

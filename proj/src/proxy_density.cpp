#include "chainsde/proxy_density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chainsde/flows.hpp"

namespace chainsde {

namespace {

// Gauss-Legendre on [0,1] by Golub-Welsch
void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k - 1, k) = b;
        J(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = 0.5 * (es.eigenvalues()[k] + 1.0);
        const double v0 = es.eigenvectors()(0, k);
        weights[k] = v0 * v0;  // total weight 1 on [0,1]
    }
}

double base_symbol(const FrozenSymbolContext& ctx, const Eigen::VectorXd& arg) {
    const LevyNoiseSpec& noise = ctx.model.noise;
    if (noise.q_family == QFamily::Stable)
        return stable_symbol_closed(noise.spectral, noise.alpha, arg);
    if (noise.dimension == 1 && ctx.radial_table) {
        const double r = std::abs(arg[0]);
        if (r == 0.0) return 0.0;
        const auto& [logr, vals] = *ctx.radial_table;
        const double lr = std::log(r);
        if (lr <= logr.front()) {
            // quadratic small-frequency regime: Phi ~ -c r^2 is dominated by
            // the finite-variance part; scale from the first table entry
            return vals.front() * std::exp(2.0 * (lr - logr.front()));
        }
        if (lr >= logr.back()) {
            // extrapolate with the local power estimated at the table end
            const std::size_t m = logr.size();
            const double p = (std::log(-vals[m - 1]) - std::log(-vals[m - 2])) /
                             (logr[m - 1] - logr[m - 2]);
            return vals.back() * std::exp(p * (lr - logr.back()));
        }
        const std::size_t k =
            std::upper_bound(logr.begin(), logr.end(), lr) - logr.begin();
        const double w = (lr - logr[k - 1]) / (logr[k] - logr[k - 1]);
        return (1.0 - w) * vals[k - 1] + w * vals[k];
    }
    return levy_symbol(noise, arg);
}

}  // namespace

double stable_symbol_closed(const SpectralMeasure& spectral, double alpha,
                            const Eigen::VectorXd& xi) {
    switch (spectral.kind) {
        case SpectralMeasure::Kind::Isotropic:
            return -std::pow(xi.norm(), alpha);
        case SpectralMeasure::Kind::Cylindrical: {
            double s = 0.0;
            for (int i = 0; i < xi.size(); ++i) s += std::pow(std::abs(xi[i]), alpha);
            return -s;
        }
        case SpectralMeasure::Kind::DiscreteAtoms: {
            double s = 0.0;
            for (const auto& [a, w] : spectral.atoms)
                s += w * std::pow(std::abs(xi.dot(a) / a.norm()), alpha);
            return -s;
        }
    }
    return 0.0;
}

FrozenSymbolContext make_frozen_context(const ChainModel& model, double tau,
                                        const Eigen::VectorXd& xi, double t, double s,
                                        int v_points, double eta_cap) {
    if (!(s > t)) throw std::invalid_argument("frozen context needs s > t");
    FrozenSymbolContext ctx;
    ctx.model = model;
    ctx.tau = tau;
    ctx.xi = xi;
    ctx.t = t;
    ctx.s = s;
    ctx.scales = scale_matrix(model.shape, model.noise.alpha, s - t);
    ctx.r_st = resolvent(model.matrix, t, s);

    // one flow solve covering [min(t,tau), max(s,tau)]
    const double lo = std::min(t, tau), hi = std::max(s, tau);
    const int grid = 2000;
    FlowSolution cover;
    if (tau > lo) {
        FlowSolution down = solve_flow(model.drift, model.matrix, tau, xi, lo, grid);
        std::reverse(down.times.begin(), down.times.end());
        std::reverse(down.states.begin(), down.states.end());
        cover = std::move(down);
    } else {
        cover.times = {tau};
        cover.states = {xi};
    }
    if (tau < hi) {
        const FlowSolution up = solve_flow(model.drift, model.matrix, tau, xi, hi, grid);
        cover.times.insert(cover.times.end(), up.times.begin() + 1, up.times.end());
        cover.states.insert(cover.states.end(), up.states.begin() + 1, up.states.end());
    }
    ctx.shift_bias = frozen_shift(model.drift, model.matrix, cover, t, s,
                                  Eigen::VectorXd::Zero(model.shape.total()), grid) -
                     ctx.r_st * Eigen::VectorXd::Zero(model.shape.total());

    // ellipticity of sym(sigma) along the frozen trajectory
    double lo_eig = 1e300, hi_eig = 0.0;
    for (int g = 0; g <= 20; ++g) {
        const double u = t + (s - t) * g / 20.0;
        const Eigen::MatrixXd sg = model.sigma(u, cover.value_at(u));
        const Eigen::MatrixXd sym = 0.5 * (sg + sg.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
        lo_eig = std::min(lo_eig, es.eigenvalues().minCoeff());
        hi_eig = std::max(hi_eig, es.eigenvalues().maxCoeff());
    }
    if (!(lo_eig > 0.0))
        throw std::invalid_argument("diffusion loses ellipticity along the frozen flow");
    ctx.eta = std::max(hi_eig, 1.0 / lo_eig);
    if (ctx.eta > eta_cap)
        throw std::invalid_argument("diffusion ellipticity ratio exceeds the declared cap");

    std::vector<double> vn;
    gauss_legendre01(v_points, vn, ctx.v_weights);
    const Eigen::MatrixXd B = model.matrix.embedding();
    const Eigen::VectorXd m_inv = ctx.scales.m_inv_diag();
    for (int k = 0; k < v_points; ++k) {
        const double u = t + vn[k] * (s - t);
        const Eigen::MatrixXd R_su = resolvent(model.matrix, u, s);
        const Eigen::MatrixXd sg = model.sigma(u, cover.value_at(u));
        // z -> (M^{-1} R_{s,u} B sigma)^T z
        ctx.arg_maps.push_back((m_inv.asDiagonal() * (R_su * (B * sg))).transpose());
    }

    if (model.noise.q_family != QFamily::Stable && model.noise.dimension == 1) {
        const int n_tab = 600;
        auto tab = std::make_shared<std::pair<std::vector<double>, std::vector<double>>>();
        tab->first.resize(n_tab);
        tab->second.resize(n_tab);
        const double lr0 = std::log(1e-3), lr1 = std::log(1e6);
        Eigen::VectorXd a(1);
        for (int k = 0; k < n_tab; ++k) {
            tab->first[k] = lr0 + (lr1 - lr0) * k / (n_tab - 1);
            a[0] = std::exp(tab->first[k]);
            tab->second[k] = levy_symbol(model.noise, a);
        }
        ctx.radial_table = std::move(tab);
    }
    return ctx;
}

double frozen_symbol(const FrozenSymbolContext& ctx, const Eigen::VectorXd& z) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ctx.arg_maps.size(); ++k)
        acc += ctx.v_weights[k] * base_symbol(ctx, ctx.arg_maps[k] * z);
    return acc;
}

ProxyDensity::ProxyDensity(FrozenSymbolContext ctx, int points_per_dim, double log_tail)
    : ctx_(std::move(ctx)) {
    const int N = ctx_.model.shape.total();
    if (N > 3) throw std::invalid_argument("tensor inversion is restricted to N <= 3");
    points_ = points_per_dim | 1;  // odd so the origin is a node
    extent_.resize(N);
    const double gap = ctx_.s - ctx_.t;
    for (int axis = 0; axis < N; ++axis) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
        e[axis] = 1.0;
        double hi = 1.0;
        while (gap * frozen_symbol(ctx_, hi * e) > log_tail) {
            hi *= 2.0;
            if (hi > 1e8)
                throw std::runtime_error("frozen symbol does not reach the cutoff decay");
        }
        double lo = hi * 0.5;
        for (int it = 0; it < 30; ++it) {
            const double mid = 0.5 * (lo + hi);
            (gap * frozen_symbol(ctx_, mid * e) > log_tail ? lo : hi) = mid;
        }
        extent_[axis] = hi;
    }
    // cache exp((s-t) Phi) on the tensor grid
    std::size_t total = 1;
    for (int axis = 0; axis < N; ++axis) total *= points_;
    if (total > std::size_t(20'000'000))
        throw std::invalid_argument("inversion grid too large; reduce points_per_dim");
    symbol_cache_.resize(total);
    cell_volume_ = 1.0;
    for (int axis = 0; axis < N; ++axis) cell_volume_ *= 2.0 * extent_[axis] / (points_ - 1);
    Eigen::VectorXd z(N);
    std::vector<int> idx(N, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (int axis = 0; axis < N; ++axis)
            z[axis] = -extent_[axis] + 2.0 * extent_[axis] * idx[axis] / (points_ - 1);
        symbol_cache_[flat] = std::exp(gap * frozen_symbol(ctx_, z));
        int a = 0;
        while (a < N && ++idx[a] == points_) idx[a++] = 0;
    }
}

double ProxyDensity::spectral_sum(const Eigen::VectorXd& y_hat, int coord, int order) const {
    const int N = ctx_.model.shape.total();
    const double m_inv_c = coord >= 0 ? ctx_.scales.m_inv_diag()[coord] : 0.0;
    double acc = 0.0;
    Eigen::VectorXd z(N);
    std::vector<int> idx(N, 0);
    for (std::size_t flat = 0; flat < symbol_cache_.size(); ++flat) {
        double phase = 0.0;
        for (int axis = 0; axis < N; ++axis) {
            z[axis] = -extent_[axis] + 2.0 * extent_[axis] * idx[axis] / (points_ - 1);
            phase += y_hat[axis] * z[axis];
        }
        double factor;
        if (order == 0) {
            factor = std::cos(phase);
        } else {
            const double zc = z[coord] * m_inv_c;
            factor = order == 1 ? -zc * std::sin(phase) : -zc * zc * std::cos(phase);
        }
        acc += factor * symbol_cache_[flat];
        int a = 0;
        while (a < N && ++idx[a] == points_) idx[a++] = 0;
    }
    double det_m_inv = 1.0;
    for (int axis = 0; axis < N; ++axis) det_m_inv *= ctx_.scales.m_inv_diag()[axis];
    return acc * cell_volume_ * det_m_inv / std::pow(2.0 * M_PI, N);
}

double ProxyDensity::operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const Eigen::VectorXd y_hat =
        ctx_.scales.m_inv_diag().asDiagonal() * (y - ctx_.proxy_shift(x));
    double val = spectral_sum(y_hat, -1, 0);
    ++evals_;
    if (val < 0.0) {
        clipped_ += -val;
        val = 0.0;
    }
    return val;
}

double ProxyDensity::derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int coord,
                                int order) const {
    if (order < 0 || order > 2)
        throw std::invalid_argument("derivative order must lie in {0,1,2}");
    const Eigen::VectorXd y_hat =
        ctx_.scales.m_inv_diag().asDiagonal() * (y - ctx_.proxy_shift(x));
    return spectral_sum(y_hat, coord, order);
}

double ProxyDensity::mass(const Eigen::VectorXd& x, double half_width, int points_per_dim) const {
    const int N = ctx_.model.shape.total();
    const int P = points_per_dim | 1;
    // Simpson weights per axis over the M-rescaled window
    std::vector<double> w1(P);
    const double h = 2.0 * half_width / (P - 1);
    for (int i = 0; i < P; ++i)
        w1[i] = (i == 0 || i == P - 1) ? h / 3.0 : (i % 2 ? 4.0 : 2.0) * h / 3.0;
    std::size_t total = 1;
    for (int axis = 0; axis < N; ++axis) total *= P;
    const Eigen::VectorXd m_diag = ctx_.scales.m_diag;
    const Eigen::VectorXd base = ctx_.proxy_shift(x);
    double acc = 0.0;
    std::vector<int> idx(N, 0);
    Eigen::VectorXd y(N);
    double det_m = 1.0;
    for (int axis = 0; axis < N; ++axis) det_m *= m_diag[axis];
    for (std::size_t flat = 0; flat < total; ++flat) {
        double w = 1.0;
        for (int axis = 0; axis < N; ++axis) {
            const double u = -half_width + h * idx[axis];
            y[axis] = base[axis] + m_diag[axis] * u;
            w *= w1[idx[axis]];
        }
        acc += w * (*this)(x, y);
        int a = 0;
        while (a < N && ++idx[a] == P) idx[a++] = 0;
    }
    return acc * det_m;
}

ScalingReport verify_scaling(const ChainModel& model, double tau, const Eigen::VectorXd& xi,
                             double t, const std::vector<double>& gaps,
                             const std::vector<Eigen::VectorXd>& u_points, int points_per_dim) {
    ScalingReport rep;
    for (double gap : gaps) {
        const auto ctx = make_frozen_context(model, tau, xi, t, t + gap);
        const ProxyDensity dens(ctx, points_per_dim);
        const auto sm = scale_matrix(model.shape, model.noise.alpha, gap);
        const Eigen::VectorXd base = ctx.proxy_shift(xi);
        std::vector<double> profile;
        for (const auto& u : u_points) {
            const Eigen::VectorXd y = base + sm.t_diag.asDiagonal() * u;
            profile.push_back(sm.det_t_closed * dens(xi, y));
        }
        rep.profiles.push_back(std::move(profile));
    }
    for (std::size_t g = 1; g < rep.profiles.size(); ++g)
        for (std::size_t k = 0; k < u_points.size(); ++k)
            rep.max_deviation = std::max(
                rep.max_deviation, std::abs(rep.profiles[g][k] - rep.profiles[0][k]));
    return rep;
}

SlopeReport derivative_bound_check(const ChainModel& model, double tau,
                                   const Eigen::VectorXd& xi, double t,
                                   const std::vector<double>& gaps, int coord, int order,
                                   int points_per_dim) {
    SlopeReport rep;
    for (double gap : gaps) {
        const auto ctx = make_frozen_context(model, tau, xi, t, t + gap);
        const ProxyDensity dens(ctx, points_per_dim);
        const auto sm = scale_matrix(model.shape, model.noise.alpha, gap);
        const Eigen::VectorXd base = ctx.proxy_shift(xi);
        double peak = 0.0;
        // scan the O(1) rescaled neighborhood where the profile peaks
        for (double u = -3.0; u <= 3.0; u += 0.25) {
            Eigen::VectorXd y = base;
            y[coord] += sm.t_diag[coord] * u;
            peak = std::max(peak, std::abs(dens.derivative(xi, y, coord, order)));
        }
        rep.log_gap.push_back(std::log(gap));
        rep.log_value.push_back(std::log(peak * sm.det_t_closed));
    }
    // least-squares slope
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rep.log_gap.size());
    for (std::size_t k = 0; k < rep.log_gap.size(); ++k) {
        sx += rep.log_gap[k];
        sy += rep.log_value[k];
        sxx += rep.log_gap[k] * rep.log_gap[k];
        sxy += rep.log_gap[k] * rep.log_value[k];
    }
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return rep;
}

}  // namespace chainsde

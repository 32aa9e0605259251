#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "chainsde/sde_engine.hpp"

namespace chainsde {

// Closed form of the normalized stable symbol (family Q = 1) for any spectral
// kind; agrees with levy_symbol by construction of the normalization.
double stable_symbol_closed(const SpectralMeasure& spectral, double alpha,
                            const Eigen::VectorXd& xi);

// Everything needed to evaluate the frozen proxy's multi-scale Levy symbol:
// the proxy X~_s = m~ + int_t^s R_{s,u} B sigma~_u dZ_u has characteristic
// function exp((s-t) Phi(z)) in the variable z dual to M^{-1}_{s-t}(y - m~),
// with Phi(z) = int_0^1 Phi_noise((M^{-1} R_{s,u(v)} B sigma~_{u(v)})^T z) dv.
struct FrozenSymbolContext {
    ChainModel model;
    double tau = 0.0;
    Eigen::VectorXd xi;
    double t = 0.0, s = 1.0;
    double eta = 0.0;  // measured ellipticity bound of sym(sigma) along the flow

    Eigen::MatrixXd r_st;        // R_{s,t}
    Eigen::VectorXd shift_bias;  // m~(x) = R_{s,t} x + shift_bias
    ScaleMatrices scales;        // at s - t

    std::vector<double> v_weights;
    std::vector<Eigen::MatrixXd> arg_maps;  // d x N: z -> symbol argument per v-node

    // radial symbol table for non-stable families at d = 1 (log-spaced radii)
    std::shared_ptr<const std::pair<std::vector<double>, std::vector<double>>> radial_table;

    Eigen::VectorXd proxy_shift(const Eigen::VectorXd& x) const {
        return r_st * x + shift_bias;
    }
};

FrozenSymbolContext make_frozen_context(const ChainModel& model, double tau,
                                        const Eigen::VectorXd& xi, double t, double s,
                                        int v_points = 64, double eta_cap = 1e6);

double frozen_symbol(const FrozenSymbolContext& ctx, const Eigen::VectorXd& z);

// Fourier inversion of the frozen proxy density on a cached tensor z-grid.
// p~(t,s,x,y) = det M^{-1} (2 pi)^{-N} int cos(<M^{-1}(y - m~(x)), z>)
//               exp((s-t) Phi(z)) dz, restricted to N <= 3.
class ProxyDensity {
public:
    explicit ProxyDensity(FrozenSymbolContext ctx, int points_per_dim = 257,
                          double log_tail = -27.631);  // log(1e-12)

    // density value; negative quadrature artifacts are clipped at zero and
    // tallied (see clipped_mass / evaluations)
    double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

    // D^k_{y_coord} p~ for k in {0,1,2}, by the polynomial spectral factor
    double derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int coord,
                      int order) const;

    // integral of the density over the M-rescaled window [-half_width, half_width]^N
    double mass(const Eigen::VectorXd& x, double half_width, int points_per_dim) const;

    double clipped_mass() const { return clipped_; }
    std::int64_t evaluations() const { return evals_; }
    const FrozenSymbolContext& context() const { return ctx_; }
    double axis_extent(int axis) const { return extent_[axis]; }

private:
    double spectral_sum(const Eigen::VectorXd& y_hat, int coord, int order) const;

    FrozenSymbolContext ctx_;
    int points_ = 0;
    Eigen::VectorXd extent_;            // per-axis z cutoff
    std::vector<double> symbol_cache_;  // exp((s-t) Phi) on the tensor grid
    double cell_volume_ = 0.0;
    mutable double clipped_ = 0.0;
    mutable std::int64_t evals_ = 0;
};

// T-collapse check: det T_{s-t} p~(t, t+gap, x, m~ + T_{s-t} u) should trace a
// single profile in u across the gap sweep when the coefficients are constant.
struct ScalingReport {
    std::vector<std::vector<double>> profiles;  // [gap index][u index]
    double max_deviation = 0.0;
};

ScalingReport verify_scaling(const ChainModel& model, double tau, const Eigen::VectorXd& xi,
                             double t, const std::vector<double>& gaps,
                             const std::vector<Eigen::VectorXd>& u_points,
                             int points_per_dim = 257);

// Fitted log-log slope of max_y |D^k_{y_coord} p~| * det T_{s-t} over the gap
// sweep; the multi-scale bound predicts -k (1 + alpha * level) / alpha for a
// coordinate in block `level` (0-based).
struct SlopeReport {
    std::vector<double> log_gap;
    std::vector<double> log_value;
    double slope = 0.0;
};

SlopeReport derivative_bound_check(const ChainModel& model, double tau,
                                   const Eigen::VectorXd& xi, double t,
                                   const std::vector<double>& gaps, int coord, int order,
                                   int points_per_dim = 257);

}  // namespace chainsde

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "chainsde/flows.hpp"
#include "chainsde/levy_noise.hpp"
#include "chainsde/scale_geometry.hpp"

namespace chainsde {

// Full model: dX = [A_t X + F(t,X)] dt + B sigma(t, X_{t-}) dZ_t, with the
// d x d diffusion acting on the first block through the embedding B.
struct ChainModel {
    ChainShape shape;
    ChainMatrix matrix;
    DriftSpec drift;
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> sigma;
    LevyNoiseSpec noise;

    void validate() const;
    static ChainModel noise_only(ChainShape shape, LevyNoiseSpec noise, double horizon = 1.0);
};

struct SimulationPlan {
    ChainModel model;
    double t0 = 0.0;
    Eigen::VectorXd x0;
    double horizon = 1.0;  // T, absolute end time
    double dt = 1e-3;      // base drift step between jump times
    double cutoff = 0.05;  // small-jump cutoff handed to the noise sampler
    int paths = 1000;
    std::uint64_t master_seed = 0;
    double state_bound = 1e9;

    void validate() const;
};

struct PathEnsemble {
    std::vector<double> times;                       // shared base grid
    std::vector<std::vector<Eigen::VectorXd>> states;  // [path][grid index]
    std::uint64_t master_seed = 0;
};

// Consumes one finished path; may be invoked concurrently from worker threads
// (each call carries a distinct path_id; synchronize any shared accumulation).
using PathConsumer =
    std::function<void(int path_id, const std::vector<double>& times,
                       const std::vector<Eigen::VectorXd>& states)>;

// Jump-adapted Euler: proposal jumps arrive at exponential times and become
// mandatory grid points; drift steps between them use the base dt; sigma is
// evaluated at the pre-jump state. Path i is a pure function of
// (plan, master_seed, i), so results are independent of worker count.
void simulate_chain_stream(const SimulationPlan& plan, const PathConsumer& consume,
                           int workers = 1);
PathEnsemble simulate_chain(const SimulationPlan& plan, int workers = 1);

// Time-inhomogeneous linear proxy: coefficients frozen along the flow
// theta_{., tau}(xi): dX = [A_u X + F(u, theta_{u,tau}(xi))] du
//                          + B sigma(u, theta_{u,tau}(xi)) dZ_u.
void simulate_frozen_proxy_stream(const SimulationPlan& plan, double tau,
                                  const Eigen::VectorXd& xi, const PathConsumer& consume,
                                  int workers = 1);
PathEnsemble simulate_frozen_proxy(const SimulationPlan& plan, double tau,
                                   const Eigen::VectorXd& xi, int workers = 1);

// k-fold iterated integral of a scalar path by left-endpoint quadrature,
// returned on the same grid; k = 0 is the identity.
std::vector<double> iterated_integral(const std::vector<double>& times,
                                      const std::vector<double>& values, int k);

}  // namespace chainsde

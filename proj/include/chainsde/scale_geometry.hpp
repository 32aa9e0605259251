#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace chainsde {

// Chain level structure: N = sum d_i coordinates split into n blocks with
// non-increasing block sizes; noise enters block 1 only.
struct ChainShape {
    int n = 1;
    std::vector<int> dims;  // d_1 .. d_n

    int total() const;
    int offset(int level) const;  // first coordinate index of block `level` (0-based)
    void validate() const;
};

// Time-dependent system matrix with the chain ("upper diagonal") structure:
// block (i,j) vanishes for j < i-1 and the subdiagonal blocks have full rank.
struct ChainMatrix {
    ChainShape shape;
    std::function<Eigen::MatrixXd(double)> eval;
    double bound = 1.0;    // declared sup-norm bound on [0, horizon]
    double horizon = 1.0;  // T
    double kappa = 1e-6;   // uniform floor for subdiagonal singular values

    Eigen::MatrixXd operator()(double t) const { return eval(t); }

    // Verifies the declaration on a time grid: structural zeros, subdiagonal
    // rank, and the sup-norm bound. Throws std::invalid_argument on violation.
    void validate(int time_grid_points = 21) const;

    // Embedding of the d-dimensional noise into the first block: N x d.
    Eigen::MatrixXd embedding() const;

    static ChainMatrix constant(ChainShape shape, const Eigen::MatrixXd& A, double horizon = 1.0);
    // the canonical constant chain: identity subdiagonal blocks, zero elsewhere
    static ChainMatrix canonical(ChainShape shape, double horizon = 1.0);
};

// Diagonal multi-scale matrices at a fixed time: M_t has t^{i-1} per block i,
// T_t = t^{1/alpha} M_t.
struct ScaleMatrices {
    Eigen::VectorXd m_diag;
    Eigen::VectorXd t_diag;
    double det_t_closed = 0.0;  // t^{sum_i d_i (1 + alpha (i-1)) / alpha}

    Eigen::VectorXd m_inv_diag() const { return m_diag.cwiseInverse(); }
    Eigen::VectorXd t_inv_diag() const { return t_diag.cwiseInverse(); }
    double det_t_product() const { return t_diag.prod(); }
};

ScaleMatrices scale_matrix(const ChainShape& shape, double alpha, double t);

// Time-ordered resolvent R_{s,t}: solution at u = s of dR/du = A_u R,
// R(t) = Id, integrated adaptively (s may lie on either side of t).
Eigen::MatrixXd resolvent(const ChainMatrix& matrix, double t, double s, double tol = 1e-10);

// Scaling factor R-hat_v = T^{-1}_{s-t} R_{t+v(s-t), s} T_{s-t}; the tested
// property is that its entries stay bounded uniformly in v and s-t.
Eigen::MatrixXd resolvent_scaling_factor(const ChainMatrix& matrix, double alpha, double t,
                                         double s, double v, double tol = 1e-10);

}  // namespace chainsde

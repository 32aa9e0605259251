#include "chainsde/scale_geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chainsde/ode.hpp"

namespace chainsde {

int ChainShape::total() const {
    int s = 0;
    for (int d : dims) s += d;
    return s;
}

int ChainShape::offset(int level) const {
    int s = 0;
    for (int i = 0; i < level; ++i) s += dims[i];
    return s;
}

void ChainShape::validate() const {
    if (n < 1) throw std::invalid_argument("chain needs at least one level");
    if (static_cast<int>(dims.size()) != n)
        throw std::invalid_argument("dims size must equal the level count");
    for (int i = 0; i < n; ++i) {
        if (dims[i] < 1) throw std::invalid_argument("block dimensions must be positive");
        if (i > 0 && dims[i] > dims[i - 1])
            throw std::invalid_argument("block dimensions must be non-increasing");
    }
}

void ChainMatrix::validate(int time_grid_points) const {
    shape.validate();
    if (!eval) throw std::invalid_argument("chain matrix evaluator is empty");
    const int N = shape.total();
    for (int g = 0; g < time_grid_points; ++g) {
        const double t = horizon * g / std::max(1, time_grid_points - 1);
        const Eigen::MatrixXd A = eval(t);
        if (A.rows() != N || A.cols() != N) {
            std::ostringstream os;
            os << "chain matrix must be " << N << "x" << N;
            throw std::invalid_argument(os.str());
        }
        if (A.cwiseAbs().maxCoeff() > bound * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "chain matrix exceeds its declared bound at t = " << t;
            throw std::invalid_argument(os.str());
        }
        for (int i = 0; i < shape.n; ++i)
            for (int j = 0; j + 1 < i; ++j) {
                const auto blk = A.block(shape.offset(i), shape.offset(j), shape.dims[i],
                                         shape.dims[j]);
                if (blk.cwiseAbs().maxCoeff() > 0.0) {
                    std::ostringstream os;
                    os << "chain structure violated: block (" << i + 1 << "," << j + 1
                       << ") nonzero at t = " << t;
                    throw std::invalid_argument(os.str());
                }
            }
        for (int i = 1; i < shape.n; ++i) {
            const auto blk = A.block(shape.offset(i), shape.offset(i - 1), shape.dims[i],
                                     shape.dims[i - 1]);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(blk);
            if (svd.singularValues().minCoeff() < kappa) {
                std::ostringstream os;
                os << "subdiagonal block " << i + 1 << " loses rank at t = " << t;
                throw std::invalid_argument(os.str());
            }
        }
    }
}

Eigen::MatrixXd ChainMatrix::embedding() const {
    const int N = shape.total();
    const int d = shape.dims[0];
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, d);
    B.topLeftCorner(d, d).setIdentity();
    return B;
}

ChainMatrix ChainMatrix::constant(ChainShape shape, const Eigen::MatrixXd& A, double horizon) {
    ChainMatrix m;
    m.shape = std::move(shape);
    m.bound = std::max(1e-12, A.cwiseAbs().maxCoeff());
    m.horizon = horizon;
    m.eval = [A](double) { return A; };
    return m;
}

ChainMatrix ChainMatrix::canonical(ChainShape shape, double horizon) {
    shape.validate();
    const int N = shape.total();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    for (int i = 1; i < shape.n; ++i)
        A.block(shape.offset(i), shape.offset(i - 1), shape.dims[i], shape.dims[i - 1]) =
            Eigen::MatrixXd::Identity(shape.dims[i], shape.dims[i - 1]);
    return constant(std::move(shape), A, horizon);
}

ScaleMatrices scale_matrix(const ChainShape& shape, double alpha, double t) {
    shape.validate();
    if (t < 0.0) throw std::invalid_argument("scale_matrix: t must be nonnegative");
    const int N = shape.total();
    ScaleMatrices sm;
    sm.m_diag.resize(N);
    double exponent = 0.0;
    int pos = 0;
    for (int i = 0; i < shape.n; ++i) {
        const double p = std::pow(t, static_cast<double>(i));
        for (int k = 0; k < shape.dims[i]; ++k) sm.m_diag[pos++] = p;
        exponent += shape.dims[i] * (1.0 + alpha * i) / alpha;
    }
    sm.t_diag = std::pow(t, 1.0 / alpha) * sm.m_diag;
    sm.det_t_closed = std::pow(t, exponent);
    return sm;
}

Eigen::MatrixXd resolvent(const ChainMatrix& matrix, double t, double s, double tol) {
    const int N = matrix.shape.total();
    if (s == t) return Eigen::MatrixXd::Identity(N, N);
    auto rhs = [&](double u, const Eigen::VectorXd& y) -> Eigen::VectorXd {
        const Eigen::Map<const Eigen::MatrixXd> R(y.data(), N, N);
        const Eigen::MatrixXd dR = matrix(u) * R;
        return Eigen::Map<const Eigen::VectorXd>(dR.data(), N * N);
    };
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N, N);
    const Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(id.data(), N * N);
    const Eigen::VectorXd y = adaptive_rk45(rhs, t, s, y0, tol);
    return Eigen::Map<const Eigen::MatrixXd>(y.data(), N, N);
}

Eigen::MatrixXd resolvent_scaling_factor(const ChainMatrix& matrix, double alpha, double t,
                                         double s, double v, double tol) {
    if (!(s > t)) throw std::invalid_argument("resolvent_scaling_factor: need s > t");
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("v must lie in [0,1]");
    const ScaleMatrices sm = scale_matrix(matrix.shape, alpha, s - t);
    const Eigen::MatrixXd R = resolvent(matrix, s, t + v * (s - t), tol);
    return sm.t_inv_diag().asDiagonal() * R * sm.t_diag.asDiagonal();
}

}  // namespace chainsde

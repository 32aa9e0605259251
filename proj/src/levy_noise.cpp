#include "chainsde/levy_noise.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace chainsde {

namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson on a uniform grid (n intervals, forced even).
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Simpson in log coordinates for integrands smooth on [a,b], 0 < a < b.
double log_simpson(const std::function<double(double)>& f, double a, double b, int n) {
    return simpson([&](double x) { const double r = std::exp(x); return f(r) * r; },
                   std::log(a), std::log(b), n);
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

// Spherical factor of the jump measure discretized as weighted directions,
// normalized so that the pure stable symbol is -sum_m w_m |xi . s_m|^alpha.
struct AngularRule {
    std::vector<Eigen::VectorXd> dirs;
    std::vector<double> weights;
    double total_mass = 0.0;
};

// mass making the isotropic symbol exactly -|xi|^alpha: 1 / E|s_1|^alpha over
// the uniform sphere
double isotropic_mass(int d, double alpha) {
    const double log_mean = std::lgamma(0.5 * d) + std::lgamma(0.5 * (alpha + 1.0)) -
                            std::lgamma(0.5) - std::lgamma(0.5 * (d + alpha));
    return std::exp(-log_mean);
}

AngularRule angular_rule(const SpectralMeasure& sp, int d, double alpha, int n_angles) {
    AngularRule rule;
    switch (sp.kind) {
        case SpectralMeasure::Kind::Isotropic: {
            const double mass = isotropic_mass(d, alpha);
            if (d == 1) {
                rule.dirs = {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -1.0)};
                rule.weights = {0.5 * mass, 0.5 * mass};
            } else if (d == 2) {
                // periodic trapezoid: spectrally accurate on the circle
                for (int k = 0; k < n_angles; ++k) {
                    const double th = 2.0 * kPi * k / n_angles;
                    Eigen::VectorXd s(2);
                    s << std::cos(th), std::sin(th);
                    rule.dirs.push_back(s);
                    rule.weights.push_back(mass / n_angles);
                }
            } else if (d == 3) {
                std::vector<double> u, w;
                gauss_legendre(n_angles, u, w);
                for (int k = 0; k < n_angles; ++k) {
                    Eigen::VectorXd s(3);
                    s << std::sqrt(std::max(0.0, 1.0 - u[k] * u[k])), 0.0, u[k];
                    rule.dirs.push_back(s);
                    rule.weights.push_back(mass * 0.5 * w[k]);
                }
            } else {
                throw std::invalid_argument(
                    "isotropic spectral quadrature supports dimension <= 3");
            }
            rule.total_mass = mass;
            break;
        }
        case SpectralMeasure::Kind::Cylindrical: {
            for (int i = 0; i < d; ++i) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
                e[i] = 1.0;
                rule.dirs.push_back(e);
                rule.dirs.push_back(-e);
                rule.weights.push_back(0.5);
                rule.weights.push_back(0.5);
            }
            rule.total_mass = d;
            break;
        }
        case SpectralMeasure::Kind::DiscreteAtoms: {
            if (sp.atoms.empty())
                throw std::invalid_argument("discrete spectral measure has no atoms");
            for (const auto& [s, w] : sp.atoms) {
                if (s.size() != d) throw std::invalid_argument("atom dimension mismatch");
                const double nrm = s.norm();
                if (nrm <= 0.0) throw std::invalid_argument("zero atom direction");
                if (w <= 0.0) throw std::invalid_argument("nonpositive atom weight");
                rule.dirs.push_back(s / nrm);
                rule.dirs.push_back(-s / nrm);
                rule.weights.push_back(0.5 * w);
                rule.weights.push_back(0.5 * w);
                rule.total_mass += w;
            }
            break;
        }
    }
    return rule;
}

// int_{r_lo}^{r_hi} cos(a r) g(r) dr for g smooth on the interval with
// r^{-1-alpha}-type decay: direct Simpson with pts_per_period points per
// oscillation out to ~40 periods, then the two-term integration-by-parts
// asymptotic F(r) = sin(ar)/a g + cos(ar)/a^2 g' (one-sided derivatives so
// kinks at the interval ends do not leak in).
double oscillatory_integral(double a, const std::function<double(double)>& g, double r_lo,
                            double r_hi, int pts_per_period) {
    a = std::abs(a);
    const double r_stop = std::min(r_hi, r_lo + 260.0 / a);
    const int n =
        std::max(8, static_cast<int>((r_stop - r_lo) * a / (2.0 * kPi) * pts_per_period));
    double total = simpson([&](double r) { return std::cos(a * r) * g(r); }, r_lo, r_stop, n);
    if (r_stop < r_hi) {
        auto F = [&](double r, double side) {
            const double h = 1e-4 * r;
            const double gp = side > 0 ? (g(r + h) - g(r)) / h : (g(r) - g(r - h)) / h;
            return std::sin(a * r) / a * g(r) + std::cos(a * r) / (a * a) * gp;
        };
        total += F(r_hi, -1.0) - F(r_stop, +1.0);
    }
    return total;
}

double lamperti_f(const LevyNoiseSpec& spec, const Eigen::VectorXd& z) {
    const auto& tab = spec.lamperti_table;
    if (tab.empty()) throw std::invalid_argument("lamperti family requires a tabulated f");
    if (spec.dimension == 1) return tab.front();
    if (spec.dimension != 2)
        throw std::invalid_argument("lamperti tabulation supports dimension <= 2");
    const std::size_t m = tab.size();
    auto interp = [&](double pos) {
        pos = std::fmod(pos, static_cast<double>(m));
        if (pos < 0.0) pos += static_cast<double>(m);
        const std::size_t i0 = static_cast<std::size_t>(pos) % m;
        const double frac = pos - std::floor(pos);
        return tab[i0] * (1.0 - frac) + tab[(i0 + 1) % m] * frac;
    };
    double th = std::atan2(z[1], z[0]);
    if (th < 0.0) th += 2.0 * kPi;
    const double pos = th / (2.0 * kPi) * static_cast<double>(m);
    // f must be even on the sphere; symmetrize the lookup
    return 0.5 * (interp(pos) + interp(pos + 0.5 * static_cast<double>(m)));
}

}  // namespace

double stable_radial_constant(double alpha) {
    if (alpha <= 0.0 || alpha >= 2.0) throw std::invalid_argument("stable_radial_constant: alpha");
    const double u_lo = 1e-8, u_mid = 1.0, u_hi = 200.0;
    auto f = [alpha](double u) {
        // 2 sin^2(u/2) == 1 - cos(u), without cancellation near 0
        const double s = std::sin(0.5 * u);
        return 2.0 * s * s * std::pow(u, -1.0 - alpha);
    };
    double c = log_simpson(f, u_lo, u_mid, 4000);
    c += simpson(f, u_mid, u_hi, 40000);
    // series below u_lo and two-term oscillatory asymptotic above u_hi
    c += std::pow(u_lo, 2.0 - alpha) / (2.0 * (2.0 - alpha));
    c += std::pow(u_hi, -alpha) / alpha + std::sin(u_hi) * std::pow(u_hi, -1.0 - alpha) -
         (1.0 + alpha) * std::cos(u_hi) * std::pow(u_hi, -2.0 - alpha);
    return c;
}

double q_density(const LevyNoiseSpec& spec, const Eigen::VectorXd& z) {
    const double r = z.norm();
    if (r <= 0.0) throw std::invalid_argument("q_density: z must be nonzero");
    switch (spec.q_family) {
        case QFamily::Stable:
            return 1.0;
        case QFamily::Truncated:
            if (spec.r0 <= 0.0) throw std::invalid_argument("truncated family requires r0 > 0");
            return r <= spec.r0 ? 1.0 : 0.0;
        case QFamily::Layered:
            if (spec.r0 <= 0.0) throw std::invalid_argument("layered family requires r0 > 0");
            if (spec.layered_beta <= spec.alpha)
                throw std::invalid_argument("layered family requires beta > alpha");
            return r <= spec.r0 ? 1.0 : std::pow(r, spec.alpha - spec.layered_beta);
        case QFamily::Tempered:
            if (spec.tempering_rate <= 0.0)
                throw std::invalid_argument("tempered family requires a positive rate");
            return std::exp(-spec.tempering_rate * r);
        case QFamily::Relativistic:
            return std::pow(1.0 + r, 0.5 * (spec.dimension + spec.alpha - 1.0)) * std::exp(-r);
        case QFamily::Lamperti: {
            const double f = lamperti_f(spec, z);
            if (f >= 1.0 + spec.alpha)
                throw std::invalid_argument("lamperti family requires sup f < 1 + alpha");
            if (r < 1e-8) return std::exp(r * f) * std::pow(1.0 - 0.5 * r, 1.0 + spec.alpha);
            // evaluate in log space: large r would overflow e^r - 1 first
            const double logq =
                r * f + (1.0 + spec.alpha) * (std::log(r) - r - std::log1p(-std::exp(-r)));
            return std::exp(logq);
        }
    }
    throw std::logic_error("unreachable q_family");
}

void LevyNoiseSpec::validate() const {
    if (!(alpha > 1.0) || !(alpha < 2.0))
        throw std::invalid_argument("alpha must lie strictly in (1,2)");
    if (dimension < 1) throw std::invalid_argument("dimension must be positive");
    if (q_sup <= 0.0) throw std::invalid_argument("q_sup must be positive");
    if ((q_family == QFamily::Truncated || q_family == QFamily::Layered) && r0 <= 0.0)
        throw std::invalid_argument("r0 must be positive");
    if (q_family == QFamily::Layered && layered_beta <= alpha)
        throw std::invalid_argument("layered beta must exceed alpha");
    if (q_family == QFamily::Tempered && tempering_rate <= 0.0)
        throw std::invalid_argument("tempering rate must be positive");
    if (q_family == QFamily::Lamperti) {
        if (lamperti_table.empty()) throw std::invalid_argument("lamperti table is empty");
        for (double f : lamperti_table)
            if (f >= 1.0 + alpha)
                throw std::invalid_argument("lamperti table violates sup f < 1 + alpha");
    }

    // non-degeneracy of the spectral measure on a direction grid
    const AngularRule rule = angular_rule(spectral, dimension, alpha, 64);
    double min_form = std::numeric_limits<double>::infinity();
    const int n_dirs = dimension == 1 ? 1 : 128;
    for (int k = 0; k < n_dirs; ++k) {
        Eigen::VectorXd xi(dimension);
        if (dimension == 1) {
            xi[0] = 1.0;
        } else if (dimension == 2) {
            const double th = kPi * k / n_dirs;
            xi << std::cos(th), std::sin(th);
        } else {
            // low-discrepancy spiral over the sphere
            const double u = -1.0 + 2.0 * (k + 0.5) / n_dirs;
            const double th = 2.39996322972865332 * k;
            const double rr = std::sqrt(std::max(0.0, 1.0 - u * u));
            xi.setZero();
            xi[0] = rr * std::cos(th);
            xi[1] = rr * std::sin(th);
            xi[2] = u;
        }
        double form = 0.0;
        for (std::size_t m = 0; m < rule.dirs.size(); ++m)
            form += rule.weights[m] * std::pow(std::abs(xi.dot(rule.dirs[m])), alpha);
        min_form = std::min(min_form, form);
    }
    if (min_form < 1e-8) {
        std::ostringstream os;
        os << "degenerate spectral measure: min directional form " << min_form;
        throw std::invalid_argument(os.str());
    }

    // Q within [c, q_sup] on a radial x angular grid near the origin
    const double r_ref =
        (q_family == QFamily::Truncated || q_family == QFamily::Layered) ? r0 : 1.0;
    for (int ir = 1; ir <= 16; ++ir) {
        const double r = r_ref * ir / 16.0;
        for (const auto& s : rule.dirs) {
            const double q = q_density(*this, r * s);
            if (q < 1e-12)
                throw std::invalid_argument("Q is not bounded below near the origin");
            if (q > q_sup * (1.0 + 1e-9))
                throw std::invalid_argument("Q exceeds the declared q_sup");
        }
    }
}

Eigen::VectorXd sample_stable_increment(double alpha, double dt, const SpectralMeasure& spectral,
                                        int dimension, RngStream& rng) {
    if (!(alpha > 1.0) || !(alpha < 2.0)) throw std::invalid_argument("alpha must lie in (1,2)");
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    const double scale = std::pow(dt, 1.0 / alpha);

    // Chambers-Mallows-Stuck, symmetric case: char. function exp(-|xi|^alpha)
    auto cms = [alpha](RngStream& g) {
        const double u = g.uniform(-0.5 * kPi, 0.5 * kPi);
        const double w = g.exponential();
        return std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
               std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
    };

    Eigen::VectorXd z = Eigen::VectorXd::Zero(dimension);
    switch (spectral.kind) {
        case SpectralMeasure::Kind::Isotropic: {
            if (dimension == 1) {
                z[0] = cms(rng);
            } else {
                // subordinated Gaussian: sqrt(2A) G with A positive (alpha/2)-stable
                // normalized to Laplace transform exp(-u^{alpha/2})
                const double ap = 0.5 * alpha;
                const double u = rng.uniform(-0.5 * kPi, 0.5 * kPi);
                const double w = rng.exponential();
                const double A = std::sin(ap * (u + 0.5 * kPi)) /
                                 std::pow(std::cos(u), 1.0 / ap) *
                                 std::pow(std::cos(u - ap * (u + 0.5 * kPi)) / w, (1.0 - ap) / ap);
                const double fac = std::sqrt(2.0 * A);
                for (int i = 0; i < dimension; ++i) z[i] = fac * rng.normal();
            }
            break;
        }
        case SpectralMeasure::Kind::Cylindrical:
            for (int i = 0; i < dimension; ++i) z[i] = cms(rng);
            break;
        case SpectralMeasure::Kind::DiscreteAtoms: {
            if (spectral.atoms.empty()) throw std::invalid_argument("no spectral atoms");
            for (const auto& [s, wgt] : spectral.atoms) {
                if (s.size() != dimension) throw std::invalid_argument("atom dimension mismatch");
                z += std::pow(wgt, 1.0 / alpha) * cms(rng) * (s / s.norm());
            }
            break;
        }
    }
    return scale * z;
}

double levy_symbol(const LevyNoiseSpec& spec, const Eigen::VectorXd& xi,
                   const SymbolQuadrature& quad) {
    spec.validate();
    if (xi.size() != spec.dimension) throw std::invalid_argument("levy_symbol: xi dimension");
    const double alpha = spec.alpha;
    const double c_norm = stable_radial_constant(alpha);
    const AngularRule rule =
        angular_rule(spec.spectral, spec.dimension, alpha, quad.angular_points);
    const bool kinked = spec.q_family == QFamily::Truncated || spec.q_family == QFamily::Layered;
    std::vector<double> gl_n, gl_w;
    gauss_legendre(32, gl_n, gl_w);

    // refine: scales both the radial grids and the oscillation sampling
    auto evaluate = [&](int refine) {
        const int radial_n = quad.radial_points * refine;
        const int ppp = 16 * refine;
        double phi = 0.0;
        for (std::size_t m = 0; m < rule.dirs.size(); ++m) {
            const Eigen::VectorXd& s = rule.dirs[m];
            const double a = std::abs(xi.dot(s));
            auto qr = [&](double r) { return q_density(spec, r * s); };
            auto grad = [&](double r) { return qr(r) * std::pow(r, -1.0 - alpha); };

            // truncated Q vanishes beyond r0 entirely
            const double r_top =
                spec.q_family == QFamily::Truncated ? std::min(quad.r_max, spec.r0) : quad.r_max;
            double contrib =
                -a * a * qr(quad.r_min) * std::pow(quad.r_min, 2.0 - alpha) /
                (2.0 * (2.0 - alpha));  // series below r_min
            if (a > 0.0 && r_top > quad.r_min) {
                const double r1 = std::clamp(1.0 / a, quad.r_min, r_top);
                // breakpoints: switch from combined to split integrand at r1,
                // honor the Q kink at r0
                std::vector<double> brk = {quad.r_min, r_top};
                if (r1 > quad.r_min && r1 < r_top) brk.push_back(r1);
                if (kinked && spec.r0 > quad.r_min && spec.r0 < r_top) brk.push_back(spec.r0);
                std::sort(brk.begin(), brk.end());
                for (std::size_t p = 0; p + 1 < brk.size(); ++p) {
                    const double lo = brk[p], hi = brk[p + 1];
                    if (hi <= lo * (1.0 + 1e-14)) continue;
                    if (hi <= r1 * (1.0 + 1e-14)) {
                        // a r <= 1: cos(ar)-1 is smooth and non-oscillatory;
                        // -2 sin^2(ar/2) avoids cancellation against r^{-1-alpha}
                        contrib += log_simpson(
                            [&](double r) {
                                const double sn = std::sin(0.5 * a * r);
                                return -2.0 * sn * sn * grad(r);
                            },
                            lo, hi, radial_n);
                    } else {
                        contrib -= log_simpson(grad, lo, hi, radial_n);
                        contrib += oscillatory_integral(a, grad, lo, hi, ppp);
                    }
                }
                // mass tail above r_max via r = r_top / w  (power-decay Q)
                if (spec.q_family != QFamily::Truncated && r_top >= quad.r_max) {
                    double tail = 0.0;
                    for (int k = 0; k < 32; ++k) {
                        const double wv = 0.5 * (gl_n[k] + 1.0);
                        if (wv <= 1e-12) continue;
                        tail += 0.5 * gl_w[k] * qr(r_top / wv) * std::pow(wv, alpha - 1.0);
                    }
                    contrib -= tail * std::pow(r_top, -alpha);
                }
            }
            phi += rule.weights[m] * contrib;
        }
        return phi / c_norm;
    };

    double prev = evaluate(1);
    for (int refine = 2; refine <= 64; refine *= 2) {
        const double cur = evaluate(refine);
        if (std::abs(cur - prev) < quad.tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    std::ostringstream os;
    os << "levy_symbol quadrature did not converge at |xi| = " << xi.norm();
    throw std::runtime_error(os.str());
}

QModulatedSampler::QModulatedSampler(LevyNoiseSpec spec, double small_jump_cutoff)
    : spec_(std::move(spec)), cutoff_(small_jump_cutoff) {
    spec_.validate();
    if (cutoff_ <= 0.0) throw std::invalid_argument("small-jump cutoff must be positive");
    const double alpha = spec_.alpha;
    const double c_norm = stable_radial_constant(alpha);
    const AngularRule rule = angular_rule(spec_.spectral, spec_.dimension, alpha, 64);

    // envelope jump rate above the cutoff: q_sup * mass * eps^-alpha / (alpha C)
    proposal_intensity_ =
        spec_.q_sup * rule.total_mass * std::pow(cutoff_, -alpha) / (alpha * c_norm);

    if (spec_.spectral.kind != SpectralMeasure::Kind::Isotropic) {
        double acc = 0.0;
        for (std::size_t k = 0; k < rule.dirs.size(); ++k) {
            acc += rule.weights[k];
            atom_dirs_.push_back(rule.dirs[k]);
            atom_cdf_.push_back(acc / rule.total_mass);
        }
    }

    small_cov_ = Eigen::MatrixXd::Zero(spec_.dimension, spec_.dimension);
    small_cov_chol_ = small_cov_;
    if (spec_.small_jump_policy == SmallJumpPolicy::GaussianMatch) {
        // per unit time: int_{|z| < eps} z z^T Q(z) nu_alpha(dz)
        auto second_moment = [&](double r) {
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(spec_.dimension, spec_.dimension);
            for (std::size_t k = 0; k < rule.dirs.size(); ++k)
                m += rule.weights[k] * q_density(spec_, r * rule.dirs[k]) * rule.dirs[k] *
                     rule.dirs[k].transpose();
            return m;
        };
        const double r_lo = cutoff_ * 1e-8;
        const int n = 800;
        const double h = std::log(cutoff_ / r_lo) / n;
        for (int i = 0; i <= n; ++i) {
            const double r = r_lo * std::exp(i * h);
            const double sw = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            small_cov_ += sw * h / 3.0 * std::pow(r, 2.0 - alpha) * second_moment(r);
        }
        small_cov_ += second_moment(r_lo) * std::pow(r_lo, 2.0 - alpha) / (2.0 - alpha);
        small_cov_ /= c_norm;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small_cov_);
        small_cov_chol_ = es.eigenvectors() *
                          es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                          es.eigenvectors().transpose();
    }
}

Eigen::VectorXd QModulatedSampler::sample_direction(RngStream& rng) const {
    const int d = spec_.dimension;
    if (spec_.spectral.kind == SpectralMeasure::Kind::Isotropic) {
        if (d == 1) {
            Eigen::VectorXd s(1);
            s[0] = rng.uniform() < 0.5 ? 1.0 : -1.0;
            return s;
        }
        Eigen::VectorXd g(d);
        double nrm2 = 0.0;
        do {
            for (int i = 0; i < d; ++i) g[i] = rng.normal();
            nrm2 = g.squaredNorm();
        } while (nrm2 <= 0.0);
        return g / std::sqrt(nrm2);
    }
    const double u = rng.uniform();
    const std::size_t idx =
        std::lower_bound(atom_cdf_.begin(), atom_cdf_.end(), u) - atom_cdf_.begin();
    return atom_dirs_[std::min(idx, atom_dirs_.size() - 1)];
}

Eigen::VectorXd QModulatedSampler::sample_proposal(RngStream& rng) const {
    const Eigen::VectorXd s = sample_direction(rng);
    const double r = cutoff_ * std::pow(rng.uniform(), -1.0 / spec_.alpha);
    const Eigen::VectorXd jump = r * s;
    const double q = q_density(spec_, jump);
    if (q > spec_.q_sup * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "Q(z) = " << q << " exceeds q_sup = " << spec_.q_sup
           << "; rejection sampling is invalid";
        throw std::runtime_error(os.str());
    }
    if (rng.uniform() * spec_.q_sup < q) return jump;
    return Eigen::VectorXd::Zero(spec_.dimension);
}

Eigen::VectorXd QModulatedSampler::small_jump_increment(double dt, RngStream& rng) const {
    if (spec_.small_jump_policy != SmallJumpPolicy::GaussianMatch)
        return Eigen::VectorXd::Zero(spec_.dimension);
    Eigen::VectorXd g(spec_.dimension);
    for (int i = 0; i < spec_.dimension; ++i) g[i] = rng.normal();
    return std::sqrt(dt) * (small_cov_chol_ * g);
}

Eigen::VectorXd QModulatedSampler::sample(double dt, RngStream& rng) const {
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    Eigen::VectorXd z = Eigen::VectorXd::Zero(spec_.dimension);
    const std::uint64_t n_jumps = rng.poisson(dt * proposal_intensity_);
    for (std::uint64_t k = 0; k < n_jumps; ++k) z += sample_proposal(rng);
    return z + small_jump_increment(dt, rng);
}

Eigen::VectorXd sample_q_modulated_increment(const LevyNoiseSpec& spec, double dt,
                                             double small_jump_cutoff, RngStream& rng) {
    return QModulatedSampler(spec, small_jump_cutoff).sample(dt, rng);
}

}  // namespace chainsde

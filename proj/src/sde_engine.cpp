#include "chainsde/sde_engine.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace chainsde {

void ChainModel::validate() const {
    shape.validate();
    matrix.validate();
    drift.validate();
    noise.validate();
    if (noise.dimension != shape.dims[0])
        throw std::invalid_argument("noise dimension must match the first chain block");
    if (!sigma) throw std::invalid_argument("diffusion callback is empty");
    const Eigen::MatrixXd s0 = sigma(0.0, Eigen::VectorXd::Zero(shape.total()));
    if (s0.rows() != noise.dimension || s0.cols() != noise.dimension)
        throw std::invalid_argument("diffusion must be d x d in the noise dimension");
}

ChainModel ChainModel::noise_only(ChainShape shape, LevyNoiseSpec noise, double horizon) {
    ChainModel m;
    m.shape = shape;
    m.matrix = ChainMatrix::canonical(shape, horizon);
    m.drift = DriftSpec::zero(shape);
    const int d = noise.dimension;
    m.sigma = [d](double, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(d, d).eval();
    };
    m.noise = std::move(noise);
    return m;
}

void SimulationPlan::validate() const {
    model.validate();
    if (!(horizon > t0)) throw std::invalid_argument("horizon must exceed the start time");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(cutoff > 0.0)) throw std::invalid_argument("small-jump cutoff must be positive");
    if (paths < 1) throw std::invalid_argument("need at least one path");
    if (x0.size() != model.shape.total())
        throw std::invalid_argument("initial condition dimension mismatch");
}

namespace {

// coefficient view: either the state-dependent model or the frozen-proxy one
struct Coefficients {
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> drift;  // A x + F
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> sigma;
};

void run_paths(const SimulationPlan& plan, const Coefficients& coef, const PathConsumer& consume,
               int workers) {
    plan.validate();
    const QModulatedSampler sampler(plan.model.noise, plan.cutoff);
    const Eigen::MatrixXd B = plan.model.matrix.embedding();
    const double lambda = sampler.jump_intensity();
    const double T = plan.horizon;
    const int n_base = std::max(1, static_cast<int>(std::ceil((T - plan.t0) / plan.dt - 1e-9)));
    std::vector<double> base(n_base + 1);
    for (int k = 0; k <= n_base; ++k) base[k] = plan.t0 + (T - plan.t0) * k / n_base;

    auto one_path = [&](int pid) {
        RngStream rng(plan.master_seed, static_cast<std::uint64_t>(pid));
        Eigen::VectorXd x = plan.x0;
        std::vector<Eigen::VectorXd> states;
        states.reserve(base.size());
        states.push_back(x);
        double t = plan.t0;
        double next_jump =
            lambda > 0.0 ? t + rng.exponential() / lambda : std::numeric_limits<double>::infinity();
        for (int k = 1; k <= n_base; ++k) {
            const double t_target = base[k];
            while (t < t_target) {
                const double step_end = std::min(t_target, next_jump);
                const double h = step_end - t;
                if (h > 0.0) {
                    const Eigen::VectorXd small = sampler.small_jump_increment(h, rng);
                    x += h * coef.drift(t, x) + B * (coef.sigma(t, x) * small);
                    t = step_end;
                }
                if (t == next_jump && t <= T) {
                    const Eigen::VectorXd jump = sampler.sample_proposal(rng);
                    x += B * (coef.sigma(t, x) * jump);  // sigma at the pre-jump state
                    next_jump = t + rng.exponential() / lambda;
                }
                if (!(x.norm() < plan.state_bound)) {
                    std::ostringstream os;
                    os << "path " << pid << " diverged at t = " << t;
                    throw std::runtime_error(os.str());
                }
            }
            states.push_back(x);
        }
        consume(pid, base, states);
    };

    workers = std::max(1, workers);
    if (workers == 1 || plan.paths == 1) {
        for (int pid = 0; pid < plan.paths; ++pid) one_path(pid);
        return;
    }
    std::atomic<int> next(0);
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int pid = next.fetch_add(1);
                if (pid >= plan.paths) return;
                try {
                    one_path(pid);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

PathEnsemble collect(const SimulationPlan& plan,
                     const std::function<void(const PathConsumer&, int)>& runner, int workers) {
    PathEnsemble ens;
    ens.master_seed = plan.master_seed;
    ens.states.resize(plan.paths);
    std::mutex grid_mutex;
    runner(
        [&](int pid, const std::vector<double>& times, const std::vector<Eigen::VectorXd>& st) {
            ens.states[pid] = st;  // slot per path id: merge order is irrelevant
            std::lock_guard<std::mutex> lock(grid_mutex);
            if (ens.times.empty()) ens.times = times;
        },
        workers);
    return ens;
}

}  // namespace

void simulate_chain_stream(const SimulationPlan& plan, const PathConsumer& consume, int workers) {
    Coefficients coef;
    coef.drift = [&plan](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return plan.model.matrix(t) * x + plan.model.drift.eval(t, x);
    };
    coef.sigma = plan.model.sigma;
    run_paths(plan, coef, consume, workers);
}

PathEnsemble simulate_chain(const SimulationPlan& plan, int workers) {
    return collect(
        plan, [&](const PathConsumer& c, int w) { simulate_chain_stream(plan, c, w); }, workers);
}

void simulate_frozen_proxy_stream(const SimulationPlan& plan, double tau,
                                  const Eigen::VectorXd& xi, const PathConsumer& consume,
                                  int workers) {
    // frozen coefficients ride the deterministic flow theta_{., tau}(xi)
    const int grid = std::max(500, static_cast<int>(std::ceil((plan.horizon - plan.t0) / plan.dt)));
    const double lo = std::min(plan.t0, tau), hi = std::max(plan.horizon, tau);
    FlowSolution cover;
    if (tau > lo) {
        FlowSolution down = solve_flow(plan.model.drift, plan.model.matrix, tau, xi, lo, grid);
        std::reverse(down.times.begin(), down.times.end());
        std::reverse(down.states.begin(), down.states.end());
        cover = std::move(down);
    } else {
        cover.times = {tau};
        cover.states = {xi};
    }
    if (tau < hi) {
        const FlowSolution up = solve_flow(plan.model.drift, plan.model.matrix, tau, xi, hi, grid);
        cover.times.insert(cover.times.end(), up.times.begin() + 1, up.times.end());
        cover.states.insert(cover.states.end(), up.states.begin() + 1, up.states.end());
    }
    Coefficients coef;
    coef.drift = [&plan, cover](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return plan.model.matrix(t) * x + plan.model.drift.eval(t, cover.value_at(t));
    };
    coef.sigma = [&plan, cover](double t, const Eigen::VectorXd&) {
        return plan.model.sigma(t, cover.value_at(t));
    };
    run_paths(plan, coef, consume, workers);
}

PathEnsemble simulate_frozen_proxy(const SimulationPlan& plan, double tau,
                                   const Eigen::VectorXd& xi, int workers) {
    return collect(
        plan,
        [&](const PathConsumer& c, int w) { simulate_frozen_proxy_stream(plan, tau, xi, c, w); },
        workers);
}

std::vector<double> iterated_integral(const std::vector<double>& times,
                                      const std::vector<double>& values, int k) {
    if (k < 0) throw std::invalid_argument("iterated integral order must be nonnegative");
    if (times.size() != values.size())
        throw std::invalid_argument("times and values must have matching lengths");
    std::vector<double> cur = values;
    for (int pass = 0; pass < k; ++pass) {
        std::vector<double> next(cur.size(), 0.0);
        double acc = 0.0;
        for (std::size_t m = 1; m < cur.size(); ++m) {
            acc += cur[m - 1] * (times[m] - times[m - 1]);  // left endpoint, cadlag convention
            next[m] = acc;
        }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace chainsde

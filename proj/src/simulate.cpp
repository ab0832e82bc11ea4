#include "lumpkit/simulate.hpp"

#include "lumpkit/diagnostics.hpp"
#include "lumpkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lumpkit {

VectorField original_drift(const OdeSystem &sys) {
    return [&sys](const Eigen::VectorXd &x) { return evaluate_drift(sys, x); };
}

VectorField build_reduced_drift(const OdeSystem &sys, const Eigen::MatrixXd &l, const Eigen::MatrixXd &lbar) {
    if (static_cast<std::size_t>(l.cols()) != sys.dimension() || lbar.rows() != l.cols() || lbar.cols() != l.rows())
        throw NumericError("lumping matrix dimensions do not match the model");
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(l.rows(), l.rows());
    if ((l * lbar - identity).cwiseAbs().maxCoeff() > 1e-8)
        throw NumericError("Lbar is not a right inverse of L (|L*Lbar - I| > 1e-8)");
    return [&sys, l, lbar](const Eigen::VectorXd &y) { return Eigen::VectorXd(l * evaluate_drift(sys, lbar * y)); };
}

VectorField build_reduced_drift(const OdeSystem &sys, const LumpingMatrix &l) {
    return build_reduced_drift(sys, l.rows, l.rows.transpose());
}

double error_bound_constant(double lipschitz, double norm_l, double norm_lbar, double horizon) {
    if (lipschitz < 0.0 || !(norm_l > 0.0) || !(norm_lbar > 0.0) || !(horizon > 0.0))
        throw NumericError("error bound constant needs C >= 0 and positive norms and horizon");
    const double beta = lipschitz * norm_l * norm_lbar;
    const double bt = beta * horizon;
    if (bt < 1e-8)
        return horizon * (1.0 + 0.5 * bt);
    if (bt > 700.0) {
        warn("error bound constant overflows (C*|L|*|Lbar|*T = " + std::to_string(bt) + "); bound is +inf");
        return std::numeric_limits<double>::infinity();
    }
    return std::expm1(bt) / beta;
}

double spectral_norm(const Eigen::MatrixXd &a) {
    if (a.size() == 0)
        return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()[0];
}

double estimate_lipschitz(const OdeSystem &sys, const SamplingDomain &dom, std::size_t n_samples) {
    const std::size_t m = sys.dimension();
    dom.validate(m);
    if (n_samples == 0)
        throw DomainError("need at least one Lipschitz sample");
    UniformSampler rng(dom.seed);
    Eigen::VectorXd start(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < start.size(); ++i)
        start[i] = 0.5 + rng.unit();
    start.normalize();

    double best = 0.0;
    std::size_t evaluated = 0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const Eigen::VectorXd x = rng.in_box(dom.lower, dom.upper);
        Eigen::MatrixXd j;
        try {
            j = evaluate_drift_dual(sys, x).second;
        } catch (const EvaluationError &) {
            continue;
        }
        if (!j.allFinite())
            continue;
        ++evaluated;
        const Eigen::MatrixXd jtj = j.transpose() * j;
        Eigen::VectorXd v = start;
        double lambda = 0.0;
        for (int it = 0; it < 50; ++it) {
            const Eigen::VectorXd w = jtj * v;
            const double norm = w.norm();
            if (norm == 0.0) {
                lambda = 0.0;
                break;
            }
            lambda = v.dot(w);
            v = w / norm;
        }
        best = std::max(best, std::sqrt(std::max(lambda, 0.0)));
    }
    if (evaluated == 0)
        throw DomainError("every Lipschitz sample hit a singular denominator");
    return 1.1 * best;
}

ReductionReport reduction_report(const OdeSystem &sys, const LumpingMatrix &l, const Eigen::VectorXd &x0,
                                 double horizon, const SolverConfig &cfg, const ReportOptions &opts) {
    if (l.dimension() != sys.dimension())
        throw NumericError("lumping matrix has " + std::to_string(l.dimension()) + " columns, model has " +
                           std::to_string(sys.dimension()) + " variables");
    if (opts.grid_points < 2)
        throw NumericError("report grid needs at least two points");

    const Trajectory full = integrate(original_drift(sys), x0, horizon, cfg);
    const Eigen::VectorXd y0 = l.rows * x0;
    const Trajectory lumped = integrate(build_reduced_drift(sys, l), y0, horizon, cfg);

    ReductionReport rep;
    rep.times = uniform_grid(horizon, opts.grid_points);
    rep.original = full.sample(rep.times);
    rep.reduced = lumped.sample(rep.times);
    // Both trajectories start from the same point by construction.
    rep.original.front() = x0;
    rep.reduced.front() = y0;

    const Eigen::MatrixXd projector = l.projector();
    Eigen::VectorXd lo = x0;
    Eigen::VectorXd hi = x0;
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        const Eigen::VectorXd &x = rep.original[k];
        rep.error.push_back(k == 0 ? 0.0 : (rep.reduced[k] - l.rows * x).norm());
        rep.deviation.push_back(deviation(sys, l, x));
        const Eigen::VectorXd px = projector * x;
        lo = lo.cwiseMin(x).cwiseMin(px);
        hi = hi.cwiseMax(x).cwiseMax(px);
    }
    rep.e_at_T = rep.error.back();
    rep.e_max = *std::max_element(rep.error.begin(), rep.error.end());
    rep.eta = *std::max_element(rep.deviation.begin(), rep.deviation.end());

    const double observable = (sys.observables() * rep.original.back()).norm();
    if (observable >= 1e-12)
        rep.e_rel_at_T = rep.e_at_T / observable;

    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) {
            const double pad = 1e-6 * std::max(1.0, std::abs(lo[i]));
            lo[i] -= pad;
            hi[i] += pad;
        }
    }
    SamplingDomain box;
    box.lower = lo;
    box.upper = hi;
    box.seed = opts.seed;
    rep.lipschitz_box_lower = lo;
    rep.lipschitz_box_upper = hi;
    rep.lipschitz_C = estimate_lipschitz(sys, box, opts.lipschitz_samples);
    rep.norm_l = spectral_norm(l.rows);
    rep.norm_lbar = spectral_norm(l.rows.transpose());
    rep.bound_constant = error_bound_constant(rep.lipschitz_C, rep.norm_l, rep.norm_lbar, horizon);
    rep.bound = rep.eta * rep.bound_constant;
    // Neither trajectory is exact; an error below the integration floor is not
    // evidence against the bound.
    for (std::size_t k = 0; k < rep.error.size(); ++k) {
        const double floor = 10.0 * (cfg.rel_tol * (l.rows * rep.original[k]).norm() + cfg.abs_tol);
        if (rep.error[k] > rep.bound + floor)
            ++rep.bound_violations;
    }
    if (rep.bound_violations > 0)
        warn("measured error exceeds eta*K at " + std::to_string(rep.bound_violations) +
             " grid points; the Lipschitz constant is probably underestimated");
    return rep;
}

} // namespace lumpkit

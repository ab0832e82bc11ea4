#include "lumpkit/lumping.hpp"

#include <algorithm>
#include <cmath>

namespace lumpkit {

namespace {

/// v minus its projection on the row space of the orthonormal `l`, computed
/// twice so that tiny residuals keep their orthogonality.
Eigen::RowVectorXd orthogonal_part(const Eigen::RowVectorXd &v, const Eigen::MatrixXd &l) {
    Eigen::RowVectorXd res = v - (v * l.transpose()) * l;
    res -= (res * l.transpose()) * l;
    return res;
}

} // namespace

Eigen::MatrixXd orthonormalize_rows(const Eigen::MatrixXd &m) {
    if (m.rows() == 0)
        throw NumericError("observable matrix has no rows");
    Eigen::MatrixXd q(m.rows(), m.cols());
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        Eigen::RowVectorXd v = m.row(k);
        const double scale = v.norm();
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index j = 0; j < k; ++j)
                v -= v.dot(q.row(j)) * q.row(j);
        const double r = v.norm();
        if (!(r > 1e-10 * scale))
            throw NumericError("observable matrix is rank deficient (row " + std::to_string(k) + ")");
        q.row(k) = v / r;
    }
    return q;
}

double orthogonal_distance(const Eigen::RowVectorXd &v, const Eigen::MatrixXd &l) {
    return orthogonal_part(v, l).norm();
}

LumpingMatrix approximate_lump(const JacobianBasis &basis, const Eigen::MatrixXd &observables, double epsilon,
                               std::vector<LumpCheck> *trace) {
    if (!(epsilon >= 0.0))
        throw NumericError("lumping tolerance must be non-negative");
    const Eigen::Index m = observables.cols();
    if (!basis.empty() && static_cast<std::size_t>(m) != basis.dimension())
        throw NumericError("observable matrix and Jacobian basis disagree on dimension");

    Eigen::MatrixXd l = orthonormalize_rows(observables);
    const auto &js = basis.matrices();
    for (std::size_t pass = 0;; ++pass) {
        bool appended = false;
        for (Eigen::Index k = 0; k < l.rows(); ++k) {
            for (std::size_t i = 0; i < js.size(); ++i) {
                const Eigen::RowVectorXd rj = l.row(k) * js[i];
                const Eigen::RowVectorXd res = orthogonal_part(rj, l);
                const double d = res.norm();
                const bool add = d > std::max(epsilon, kExactSlack * rj.norm()) && l.rows() < m;
                if (trace)
                    trace->push_back(LumpCheck{pass, static_cast<std::size_t>(k), i, d, add});
                if (add) {
                    l.conservativeResize(l.rows() + 1, Eigen::NoChange);
                    l.row(l.rows() - 1) = res / d;
                    appended = true;
                }
            }
        }
        if (!appended)
            break;
    }
    return LumpingMatrix{std::move(l), epsilon, static_cast<std::size_t>(observables.rows())};
}

double epsilon_max(const JacobianBasis &basis, const Eigen::MatrixXd &observables) {
    const Eigen::MatrixXd q = orthonormalize_rows(observables);
    if (q.rows() >= q.cols())
        return 0.0;
    double best = 0.0;
    for (Eigen::Index k = 0; k < q.rows(); ++k)
        for (const auto &j : basis.matrices())
            best = std::max(best, orthogonal_distance(q.row(k) * j, q));
    return best;
}

double deviation(const OdeSystem &sys, const Eigen::MatrixXd &l, const Eigen::MatrixXd &lbar,
                 const Eigen::VectorXd &x) {
    const Eigen::VectorXd projected = lbar * (l * x);
    return (l * evaluate_drift(sys, projected) - l * evaluate_drift(sys, x)).norm();
}

double deviation(const OdeSystem &sys, const LumpingMatrix &l, const Eigen::VectorXd &x) {
    return deviation(sys, l.rows, l.rows.transpose(), x);
}

EpsilonSearch find_epsilon(const JacobianBasis &basis, const Eigen::MatrixXd &observables,
                           const EpsilonSearchConfig &cfg) {
    if (cfg.cutoff_size < 1)
        throw NumericError("cutoff size must be at least 1");
    if (!(cfg.d_min > 0.0))
        throw NumericError("d_min must be positive");

    EpsilonSearch out;
    out.epsilon_max = epsilon_max(basis, observables);
    out.iterations = 1;

    LumpingMatrix coarse = approximate_lump(basis, observables, out.epsilon_max);
    if (cfg.cutoff_size < coarse.size()) {
        out.epsilon = out.epsilon_max;
        out.lumping = std::move(coarse);
        out.outcome = SearchOutcome::BelowObservables;
        return out;
    }
    LumpingMatrix exact = approximate_lump(basis, observables, 0.0);
    if (cfg.cutoff_size >= exact.size()) {
        out.epsilon = 0.0;
        out.lumping = std::move(exact);
        out.outcome = SearchOutcome::ExactFits;
        return out;
    }

    double lo = 0.0;
    double hi = out.epsilon_max;
    LumpingMatrix best = std::move(coarse);
    while (hi - lo >= cfg.d_min) {
        if (out.iterations > cfg.max_iterations)
            throw NumericError("epsilon search exceeded " + std::to_string(cfg.max_iterations) + " iterations");
        const double mid = 0.5 * (lo + hi);
        LumpingMatrix l = approximate_lump(basis, observables, mid);
        out.history.push_back(SearchStep{lo, hi, mid, l.size()});
        ++out.iterations;
        if (l.size() <= cfg.cutoff_size) {
            hi = mid;
            best = std::move(l);
        } else {
            lo = mid;
        }
    }
    out.epsilon = hi;
    out.lumping = std::move(best);
    return out;
}

std::vector<StairStep> staircase(const JacobianBasis &basis, const Eigen::MatrixXd &observables,
                                 const std::vector<double> &grid) {
    std::vector<StairStep> steps;
    steps.reserve(grid.size());
    for (double eps : grid)
        steps.push_back(StairStep{eps, approximate_lump(basis, observables, eps).size()});
    return steps;
}

std::optional<std::pair<std::size_t, std::size_t>> monotonicity_violation(const std::vector<StairStep> &steps) {
    for (std::size_t k = 1; k < steps.size(); ++k)
        if (steps[k].epsilon >= steps[k - 1].epsilon && steps[k].size > steps[k - 1].size)
            return std::make_pair(k - 1, k);
    return std::nullopt;
}

} // namespace lumpkit

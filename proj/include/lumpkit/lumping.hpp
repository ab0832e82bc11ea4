#pragma once

#include "lumpkit/jacobian.hpp"
#include "lumpkit/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace lumpkit {

/// Orthonormal-row lumping matrix L (l x m). Its pseudoinverse is L^T.
struct LumpingMatrix {
    Eigen::MatrixXd rows;
    double epsilon = 0.0;
    std::size_t observable_rank = 0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(rows.rows()); }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(rows.cols()); }
    /// Orthogonal projector L^T L onto the row space.
    Eigen::MatrixXd projector() const { return rows.transpose() * rows; }
};

/// One span check of the lumping loop: row `row` of L against J_`matrix`.
struct LumpCheck {
    std::size_t pass = 0;
    std::size_t row = 0;
    std::size_t matrix = 0;
    double distance = 0.0;
    bool appended = false;
};

/// Relative slack that stands in for epsilon = 0 when comparing residuals.
inline constexpr double kExactSlack = 1e-12;

/// Gram-Schmidt with reorthogonalization; rows of the result are orthonormal
/// and span the row space of `m`. Throws NumericError if `m` is rank deficient.
Eigen::MatrixXd orthonormalize_rows(const Eigen::MatrixXd &m);

/// Approximate constrained lumping with lumping tolerance `epsilon`.
///
/// Starting from the orthonormalized observables, every row r of L is checked
/// against every J_i (rows oldest first, matrices in index order). Whenever the
/// component of r J_i orthogonal to the current row space has norm above
/// epsilon, its normalization is appended to L. Passes repeat until one full
/// pass appends nothing. If `trace` is non-null every check is recorded.
LumpingMatrix approximate_lump(const JacobianBasis &basis, const Eigen::MatrixXd &observables, double epsilon,
                               std::vector<LumpCheck> *trace = nullptr);

/// Norm of the part of `v` orthogonal to the row space of the orthonormal `l`.
double orthogonal_distance(const Eigen::RowVectorXd &v, const Eigen::MatrixXd &l);

/// Largest residual ||r_j J_i - r_j J_i P_M|| over the orthonormalized rows of
/// the observable matrix; any epsilon at or above it leaves L = orth(M).
double epsilon_max(const JacobianBasis &basis, const Eigen::MatrixXd &observables);

/// dev_L(f, x) = ||L f(L^+ L x) - L f(x)|| for a general L with right inverse `lbar`.
double deviation(const OdeSystem &sys, const Eigen::MatrixXd &l, const Eigen::MatrixXd &lbar, const Eigen::VectorXd &x);
double deviation(const OdeSystem &sys, const LumpingMatrix &l, const Eigen::VectorXd &x);

struct EpsilonSearchConfig {
    std::size_t cutoff_size = 1;
    double d_min = 1e-6;
    std::size_t max_iterations = 200;
};

struct SearchStep {
    double lower = 0.0;
    double upper = 0.0;
    double epsilon = 0.0;
    std::size_t size = 0;
};

enum class SearchOutcome {
    Bisected,
    ExactFits,         // cutoff >= size at epsilon = 0
    BelowObservables,  // cutoff < size at epsilon_max
};

struct EpsilonSearch {
    double epsilon = 0.0;
    LumpingMatrix lumping;
    double epsilon_max = 0.0;
    /// Lumping runs counted as in the size-ratio tables: 1 for a boundary
    /// answer, 1 + bisection steps otherwise.
    std::size_t iterations = 0;
    SearchOutcome outcome = SearchOutcome::Bisected;
    std::vector<SearchStep> history;
};

/// Bisection on [0, epsilon_max] for the smallest lumping tolerance whose
/// reduction has at most `cfg.cutoff_size` rows. Returns the upper end of the
/// final bracket (width < d_min) and its lumping.
EpsilonSearch find_epsilon(const JacobianBasis &basis, const Eigen::MatrixXd &observables,
                           const EpsilonSearchConfig &cfg);

struct StairStep {
    double epsilon = 0.0;
    std::size_t size = 0;
};

std::vector<StairStep> staircase(const JacobianBasis &basis, const Eigen::MatrixXd &observables,
                                 const std::vector<double> &grid);

/// First adjacent pair (by index) whose size increases with epsilon, if any.
std::optional<std::pair<std::size_t, std::size_t>> monotonicity_violation(const std::vector<StairStep> &steps);

} // namespace lumpkit

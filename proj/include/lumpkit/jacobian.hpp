#pragma once

#include "lumpkit/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace lumpkit {

/// Axis-aligned sampling box plus the knobs of the randomized span search.
struct SamplingDomain {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::uint64_t seed = 0;
    /// Consecutive singular samples tolerated before giving up; 0 selects 100*m.
    std::size_t max_resamples = 0;
    /// Consecutive in-span samples required to stop (1 reproduces the original
    /// stopping rule of a single dependent sample).
    std::size_t confirmations = 3;

    /// Box [0, max(1, 2*max_i |x0_i|)]^m.
    static SamplingDomain around(const Eigen::VectorXd &x0, std::uint64_t seed);

    void validate(std::size_t dim) const;
};

/// Relative residual threshold of the span test.
inline constexpr double kRankTolerance = 1e-9;

/// Jacobian samples {J_1..J_N} spanning the Jacobian space of a system, with
/// an orthonormal basis of their row-major flattenings kept for span tests.
class JacobianBasis {
  public:
    JacobianBasis() = default;
    explicit JacobianBasis(std::size_t dim)
      : dim_(dim) {}

    std::size_t dimension() const noexcept { return dim_; }
    std::size_t size() const noexcept { return matrices_.size(); }
    bool empty() const noexcept { return matrices_.empty(); }
    const std::vector<Eigen::MatrixXd> &matrices() const noexcept { return matrices_; }
    const std::vector<Eigen::VectorXd> &sample_points() const noexcept { return points_; }
    const std::vector<Eigen::VectorXd> &ortho_flat() const noexcept { return ortho_; }

    /// ||vec(J) - proj(vec(J))||_2 against the current span.
    double residual(const Eigen::MatrixXd &j) const;

    /// Adds J if its residual exceeds kRankTolerance * ||vec(J)||. Returns
    /// whether it was added.
    bool try_add(const Eigen::MatrixXd &j, const Eigen::VectorXd &point);

    /// Adds J unconditionally (used to rebuild a basis from stored matrices).
    void add(const Eigen::MatrixXd &j, const Eigen::VectorXd &point);

  private:
    std::size_t dim_ = 0;
    std::vector<Eigen::MatrixXd> matrices_;
    std::vector<Eigen::VectorXd> points_;
    std::vector<Eigen::VectorXd> ortho_;

    Eigen::VectorXd orthogonal_part(const Eigen::MatrixXd &j) const;
};

/// Randomized construction: draws points uniformly from the box until
/// `confirmations` consecutive Jacobians fall in the current span.
JacobianBasis sample_jacobian_basis(const OdeSystem &sys, const SamplingDomain &dom);

/// Deterministic variant over an explicit list of points; keeps every
/// Jacobian that is independent of the previously kept ones.
JacobianBasis jacobian_basis_from_points(const OdeSystem &sys, const std::vector<Eigen::VectorXd> &points);

double membership_residual(const JacobianBasis &basis, const Eigen::MatrixXd &j);

} // namespace lumpkit

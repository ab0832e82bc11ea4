#pragma once

#include "lumpkit/integrator.hpp"
#include "lumpkit/jacobian.hpp"
#include "lumpkit/lumping.hpp"
#include "lumpkit/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace lumpkit {

/// y -> L f(Lbar y). Requires L * Lbar = I within 1e-8; throws NumericError otherwise.
VectorField build_reduced_drift(const OdeSystem &sys, const Eigen::MatrixXd &l, const Eigen::MatrixXd &lbar);
VectorField build_reduced_drift(const OdeSystem &sys, const LumpingMatrix &l);

VectorField original_drift(const OdeSystem &sys);

/// (e^{bT} - 1) / b with b = C * |L| * |Lbar|. Uses T(1 + bT/2) when bT < 1e-8
/// and saturates to +inf (with a warning) when bT > 700.
double error_bound_constant(double lipschitz, double norm_l, double norm_lbar, double horizon);

/// 1.1 times the largest spectral norm of J(x) over `n_samples` uniform points
/// of the box, each norm from 50 power iterations on J^T J.
double estimate_lipschitz(const OdeSystem &sys, const SamplingDomain &dom, std::size_t n_samples);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd &a);

struct ReportOptions {
    std::size_t grid_points = 200;
    std::size_t lipschitz_samples = 1000;
    std::uint64_t seed = 0;
};

struct ReductionReport {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> original;  // x(t)
    std::vector<Eigen::VectorXd> reduced;   // y(t)
    std::vector<double> error;              // |y(t) - L x(t)|
    std::vector<double> deviation;          // dev_L(f, x(t))
    double e_at_T = 0.0;
    double e_max = 0.0;
    /// e(T) / |M x(T)|; absent when the observable at T is below 1e-12.
    std::optional<double> e_rel_at_T;
    double eta = 0.0;
    double lipschitz_C = 0.0;
    double norm_l = 0.0;
    double norm_lbar = 0.0;
    double bound_constant = 0.0;
    double bound = 0.0;
    /// Grid points where |e(t)| exceeds eta * K; nonzero means C was underestimated.
    std::size_t bound_violations = 0;
    Eigen::VectorXd lipschitz_box_lower;
    Eigen::VectorXd lipschitz_box_upper;
};

/// Integrates x' = f(x) from x0 and y' = L f(L^T y) from L x0 on [0, T],
/// and evaluates error, deviation and the Gronwall-type bound on a shared grid.
/// The Lipschitz constant is estimated over the bounding box of x(t) and
/// L^T L x(t) along the grid.
ReductionReport reduction_report(const OdeSystem &sys, const LumpingMatrix &l, const Eigen::VectorXd &x0, double horizon,
                                 const SolverConfig &cfg, const ReportOptions &opts = {});

} // namespace lumpkit

#include "lumpkit/jacobian.hpp"

#include "lumpkit/rng.hpp"

#include <algorithm>
#include <cmath>

namespace lumpkit {

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd &j) {
    // Row-major flattening so vec(J) lines up with the JSON dump.
    Eigen::VectorXd v(j.size());
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < j.rows(); ++r)
        for (Eigen::Index c = 0; c < j.cols(); ++c)
            v[k++] = j(r, c);
    return v;
}

} // namespace

SamplingDomain SamplingDomain::around(const Eigen::VectorXd &x0, std::uint64_t seed) {
    const double span = std::max(1.0, 2.0 * (x0.size() == 0 ? 0.0 : x0.cwiseAbs().maxCoeff()));
    SamplingDomain dom;
    dom.lower = Eigen::VectorXd::Zero(x0.size());
    dom.upper = Eigen::VectorXd::Constant(x0.size(), span);
    dom.seed = seed;
    return dom;
}

void SamplingDomain::validate(std::size_t dim) const {
    if (static_cast<std::size_t>(lower.size()) != dim || static_cast<std::size_t>(upper.size()) != dim)
        throw DomainError("sampling box has wrong dimension");
    if (!lower.allFinite() || !upper.allFinite())
        throw DomainError("sampling box must be bounded");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i]))
            throw DomainError("sampling box has empty extent in coordinate " + std::to_string(i));
    if (confirmations == 0)
        throw DomainError("confirmations must be positive");
}

Eigen::VectorXd JacobianBasis::orthogonal_part(const Eigen::MatrixXd &j) const {
    Eigen::VectorXd v = flatten(j);
    // Modified Gram-Schmidt, then one reorthogonalization pass.
    for (int pass = 0; pass < 2; ++pass)
        for (const auto &q : ortho_)
            v -= q.dot(v) * q;
    return v;
}

double JacobianBasis::residual(const Eigen::MatrixXd &j) const {
    if (static_cast<std::size_t>(j.rows()) != dim_ || static_cast<std::size_t>(j.cols()) != dim_)
        throw NumericError("Jacobian has wrong shape for this basis");
    return orthogonal_part(j).norm();
}

bool JacobianBasis::try_add(const Eigen::MatrixXd &j, const Eigen::VectorXd &point) {
    Eigen::VectorXd v = orthogonal_part(j);
    const double r = v.norm();
    if (!(r > kRankTolerance * j.norm()))
        return false;
    if (ortho_.size() >= dim_ * dim_)
        throw NumericError("Jacobian basis exceeds m^2 elements; rank test is unsound");
    ortho_.push_back(v / r);
    matrices_.push_back(j);
    points_.push_back(point);
    return true;
}

void JacobianBasis::add(const Eigen::MatrixXd &j, const Eigen::VectorXd &point) {
    Eigen::VectorXd v = orthogonal_part(j);
    const double r = v.norm();
    if (r > 0.0)
        ortho_.push_back(v / r);
    matrices_.push_back(j);
    points_.push_back(point);
}

double membership_residual(const JacobianBasis &basis, const Eigen::MatrixXd &j) { return basis.residual(j); }

JacobianBasis sample_jacobian_basis(const OdeSystem &sys, const SamplingDomain &dom) {
    const std::size_t m = sys.dimension();
    dom.validate(m);
    const std::size_t max_resamples = dom.max_resamples == 0 ? 100 * m : dom.max_resamples;

    UniformSampler rng(dom.seed);
    JacobianBasis basis(m);
    std::size_t dependent = 0;
    std::size_t failures = 0;
    while (dependent < dom.confirmations) {
        const Eigen::VectorXd x = rng.in_box(dom.lower, dom.upper);
        Eigen::MatrixXd j;
        try {
            j = evaluate_drift_dual(sys, x).second;
        } catch (const EvaluationError &e) {
            if (++failures > max_resamples)
                throw DomainError(std::string("too many singular samples (") + e.what() +
                                  "); choose a sampling box away from vanishing denominators");
            continue;
        }
        if (!j.allFinite()) {
            if (++failures > max_resamples)
                throw DomainError("Jacobian not finite on the sampling box");
            continue;
        }
        failures = 0;
        if (basis.try_add(j, x))
            dependent = 0;
        else
            ++dependent;
    }
    return basis;
}

JacobianBasis jacobian_basis_from_points(const OdeSystem &sys, const std::vector<Eigen::VectorXd> &points) {
    JacobianBasis basis(sys.dimension());
    for (const auto &x : points)
        basis.try_add(evaluate_drift_dual(sys, x).second, x);
    return basis;
}

} // namespace lumpkit

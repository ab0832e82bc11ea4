#include "lumpkit/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace lumpkit {

Eigen::Index numeric_rank(const Eigen::MatrixXd &a, double rel_tol) {
    if (a.size() == 0)
        return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const Eigen::VectorXd &s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0)
        return 0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > rel_tol * s[0])
            ++rank;
    return rank;
}

OdeSystem::OdeSystem(std::string name, std::vector<std::string> var_names, std::vector<Expression> drift,
                     std::vector<Eigen::VectorXd> initial_conditions, double time_horizon,
                     Eigen::MatrixXd observables)
  : name_(std::move(name))
  , var_names_(std::move(var_names))
  , drift_(std::move(drift))
  , initial_conditions_(std::move(initial_conditions))
  , time_horizon_(time_horizon)
  , observables_(std::move(observables)) {
    const std::size_t m = var_names_.size();
    if (m == 0)
        throw ModelError("model declares no variables");
    if (drift_.size() != m)
        throw ModelError("expected " + std::to_string(m) + " drift equations, got " + std::to_string(drift_.size()));
    for (std::size_t i = 0; i < m; ++i)
        if (drift_[i].variable_bound() > m)
            throw ModelError("equation for '" + var_names_[i] + "' references an undeclared variable");
    if (initial_conditions_.empty())
        throw ModelError("model has no initial condition");
    for (const auto &x0 : initial_conditions_) {
        if (static_cast<std::size_t>(x0.size()) != m)
            throw ModelError("initial condition has length " + std::to_string(x0.size()) + ", expected " +
                             std::to_string(m));
        if (!x0.allFinite())
            throw ModelError("initial condition is not finite");
    }
    if (!(time_horizon_ > 0.0) || !std::isfinite(time_horizon_))
        throw ModelError("time horizon must be positive and finite");
    const auto p = observables_.rows();
    if (p < 1)
        throw ModelError("model has no observables");
    if (static_cast<std::size_t>(observables_.cols()) != m)
        throw ModelError("observable matrix has wrong column count");
    if (static_cast<std::size_t>(p) >= m)
        throw ModelError("need fewer observables than variables (p=" + std::to_string(p) +
                         ", m=" + std::to_string(m) + ")");
    if (numeric_rank(observables_) != p)
        throw ModelError("observable matrix is rank deficient");
}

OdeSystem OdeSystem::with_horizon(double horizon) const {
    return {name_, var_names_, drift_, initial_conditions_, horizon, observables_};
}

OdeSystem OdeSystem::with_initial_conditions(std::vector<Eigen::VectorXd> initial_conditions) const {
    return {name_, var_names_, drift_, std::move(initial_conditions), time_horizon_, observables_};
}

Eigen::VectorXd evaluate_drift(const OdeSystem &sys, const Eigen::VectorXd &x) {
    const std::size_t m = sys.dimension();
    if (static_cast<std::size_t>(x.size()) != m)
        throw ModelError("state has wrong dimension");
    const std::span<const double> point(x.data(), m);
    Eigen::VectorXd out(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        try {
            out[static_cast<Eigen::Index>(i)] = sys.drift()[i].evaluate(point);
        } catch (const ZeroDenominator &) {
            throw EvaluationError("zero denominator in equation for '" + sys.var_names()[i] + "'", i);
        }
    }
    return out;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> evaluate_drift_dual(const OdeSystem &sys, const Eigen::VectorXd &x) {
    const std::size_t m = sys.dimension();
    if (static_cast<std::size_t>(x.size()) != m)
        throw ModelError("state has wrong dimension");
    std::vector<DualVector> point;
    point.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        point.push_back(DualVector::seed(x[static_cast<Eigen::Index>(i)], i, m));

    const auto dim = static_cast<Eigen::Index>(m);
    Eigen::VectorXd value(dim);
    Eigen::MatrixXd jacobian(dim, dim);
    for (std::size_t i = 0; i < m; ++i) {
        try {
            const DualVector d = sys.drift()[i].evaluate(std::span<const DualVector>(point));
            value[static_cast<Eigen::Index>(i)] = d.value;
            jacobian.row(static_cast<Eigen::Index>(i)) = d.partials.transpose();
        } catch (const ZeroDenominator &) {
            throw EvaluationError("zero denominator in equation for '" + sys.var_names()[i] + "'", i);
        }
    }
    return {value, jacobian};
}

OdeSystem load_model(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

} // namespace lumpkit

#pragma once

#include "lumpkit/expression.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lumpkit {

/// Polynomial or rational ODE system x' = f(x) together with its observables
/// x_obs = M x, initial condition(s) and time horizon. Immutable once built.
class OdeSystem {
  public:
    /// Validates every invariant and throws ModelError on violation.
    OdeSystem(std::string name, std::vector<std::string> var_names, std::vector<Expression> drift,
              std::vector<Eigen::VectorXd> initial_conditions, double time_horizon, Eigen::MatrixXd observables);

    const std::string &name() const noexcept { return name_; }
    std::size_t dimension() const noexcept { return var_names_.size(); }
    const std::vector<std::string> &var_names() const noexcept { return var_names_; }
    const std::vector<Expression> &drift() const noexcept { return drift_; }
    const std::vector<Eigen::VectorXd> &initial_conditions() const noexcept { return initial_conditions_; }
    const Eigen::VectorXd &initial_condition() const { return initial_conditions_.front(); }
    double time_horizon() const noexcept { return time_horizon_; }
    const Eigen::MatrixXd &observables() const noexcept { return observables_; }
    std::size_t observable_count() const noexcept { return static_cast<std::size_t>(observables_.rows()); }

    OdeSystem with_horizon(double horizon) const;
    OdeSystem with_initial_conditions(std::vector<Eigen::VectorXd> initial_conditions) const;

  private:
    std::string name_;
    std::vector<std::string> var_names_;
    std::vector<Expression> drift_;
    std::vector<Eigen::VectorXd> initial_conditions_;
    double time_horizon_;
    Eigen::MatrixXd observables_;
};

/// f(x). Throws EvaluationError naming the component whose denominator vanished.
Eigen::VectorXd evaluate_drift(const OdeSystem &sys, const Eigen::VectorXd &x);

/// f(x) and the exact Jacobian J(x) by forward-mode differentiation.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> evaluate_drift_dual(const OdeSystem &sys, const Eigen::VectorXd &x);

/// Parses the line-oriented model format:
///
///     model <identifier>
///     var <name> [, <name> ...]
///     eq <name> = <expr>
///     init <name> = <number>
///     obs [<name> =] <linear-expr>
///     horizon <number>
///
/// Throws ParseError (with line/column) for malformed text and ModelError for
/// structural violations such as a rank-deficient observable matrix.
OdeSystem parse_model(std::string_view text);

OdeSystem load_model(const std::string &path);

/// Numerical rank via SVD with relative tolerance on the singular values.
Eigen::Index numeric_rank(const Eigen::MatrixXd &a, double rel_tol = 1e-10);

} // namespace lumpkit

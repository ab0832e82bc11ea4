#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>

namespace lumpkit {

/// Forward-mode dual number carrying the value and its gradient with respect
/// to every system variable.
struct DualVector {
    double value = 0.0;
    Eigen::VectorXd partials;

    DualVector() = default;
    DualVector(double v, Eigen::VectorXd d)
      : value(v)
      , partials(std::move(d)) {}

    static DualVector constant(double v, std::size_t dim) { return {v, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))}; }

    static DualVector seed(double v, std::size_t index, std::size_t dim) {
        DualVector d = constant(v, dim);
        d.partials[static_cast<Eigen::Index>(index)] = 1.0;
        return d;
    }
};

inline DualVector operator+(const DualVector &a, const DualVector &b) { return {a.value + b.value, a.partials + b.partials}; }
inline DualVector operator-(const DualVector &a, const DualVector &b) { return {a.value - b.value, a.partials - b.partials}; }
inline DualVector operator-(const DualVector &a) { return {-a.value, -a.partials}; }
inline DualVector operator*(const DualVector &a, const DualVector &b) {
    return {a.value * b.value, b.value * a.partials + a.value * b.partials};
}

// Callers guarantee b.value != 0; the zero check lives in the evaluator so the
// failing component can be reported.
inline DualVector operator/(const DualVector &a, const DualVector &b) {
    const double inv = 1.0 / b.value;
    return {a.value * inv, (a.partials * b.value - a.value * b.partials) * (inv * inv)};
}

} // namespace lumpkit

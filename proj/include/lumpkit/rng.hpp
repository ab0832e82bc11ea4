#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace lumpkit {

/// Reproducible uniform sampler.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Doubles are formed from the top 53 bits of each draw as
/// (u >> 11) * 2^-53, so a seed produces identical points on every platform
/// (std::uniform_real_distribution is not portable in this sense).
class UniformSampler {
  public:
    explicit UniformSampler(std::uint64_t seed)
      : engine_(seed) {}

    /// Uniform in [0, 1).
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    Eigen::VectorXd in_box(const Eigen::VectorXd &lower, const Eigen::VectorXd &upper) {
        Eigen::VectorXd x(lower.size());
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            x[i] = uniform(lower[i], upper[i]);
        return x;
    }

    std::uint64_t next_u64() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

} // namespace lumpkit

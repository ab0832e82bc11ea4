#pragma once

#include "lumpkit/jacobian.hpp"
#include "lumpkit/lumping.hpp"
#include "lumpkit/simulate.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lumpkit {

using json = nlohmann::ordered_json;

/// 17 significant digits, '.' separator, independent of the global locale.
std::string format_double(double v);

json matrix_to_json(const Eigen::MatrixXd &m);
Eigen::MatrixXd matrix_from_json(const json &j);
json vector_to_json(const Eigen::VectorXd &v);

json to_json(const JacobianBasis &basis, std::uint64_t seed);

/// L.json: row-major matrix, size, epsilon, and for each row where it came
/// from (an observable, or row k times J_i with the residual that admitted it).
json to_json(const LumpingMatrix &l, const std::vector<LumpCheck> &trace = {});
LumpingMatrix lumping_from_json(const json &j);

json to_json(const EpsilonSearch &search);
json to_json(const ReductionReport &report);
json to_json(const SolverConfig &cfg);

/// Writes `content` with LF line endings; throws std::ios_base::failure.
void write_text(const std::filesystem::path &path, const std::string &content);
void write_json(const std::filesystem::path &path, const json &j);
json read_json(const std::filesystem::path &path);

/// CSV with a header row; every value printed by format_double.
std::string to_csv(const std::vector<std::string> &header, const std::vector<std::vector<double>> &rows);

/// `t, <names...>` rows for a sampled trajectory.
std::string trajectory_csv(const std::vector<double> &times, const std::vector<Eigen::VectorXd> &states,
                           const std::vector<std::string> &names);

} // namespace lumpkit

#include "lumpkit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lumpkit {

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const char *outcome_name(SearchOutcome o) {
    switch (o) {
    case SearchOutcome::Bisected:
        return "bisected";
    case SearchOutcome::ExactFits:
        return "exact_fits_cutoff";
    case SearchOutcome::BelowObservables:
        return "cutoff_below_observables";
    }
    return "unknown";
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // snprintf honours LC_NUMERIC; normalize in case a comma locale is active.
    for (char &c : s)
        if (c == ',')
            c = '.';
    return s;
}

json matrix_to_json(const Eigen::MatrixXd &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json &j) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument("matrix must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json &row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw std::invalid_argument("matrix rows have unequal length");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd &v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

json to_json(const JacobianBasis &basis, std::uint64_t seed) {
    json j;
    j["dimension"] = basis.dimension();
    j["size"] = basis.size();
    j["seed"] = seed;
    j["rank_tolerance"] = kRankTolerance;
    json mats = json::array();
    json pts = json::array();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        mats.push_back(matrix_to_json(basis.matrices()[i]));
        pts.push_back(vector_to_json(basis.sample_points()[i]));
    }
    j["matrices"] = std::move(mats);
    j["sample_points"] = std::move(pts);
    return j;
}

json to_json(const LumpingMatrix &l, const std::vector<LumpCheck> &trace) {
    json j;
    j["size"] = l.size();
    j["dimension"] = l.dimension();
    j["epsilon"] = l.epsilon;
    j["observable_rank"] = l.observable_rank;
    j["matrix"] = matrix_to_json(l.rows);
    json prov = json::array();
    for (std::size_t r = 0; r < l.observable_rank && r < l.size(); ++r)
        prov.push_back(json{{"row", r}, {"source", "observable"}, {"observable", r}});
    std::size_t next = l.observable_rank;
    for (const LumpCheck &c : trace) {
        if (!c.appended)
            continue;
        prov.push_back(json{{"row", next++},
                            {"source", "residual"},
                            {"parent_row", c.row},
                            {"jacobian", c.matrix},
                            {"distance", c.distance}});
    }
    j["provenance"] = std::move(prov);
    return j;
}

LumpingMatrix lumping_from_json(const json &j) {
    LumpingMatrix l;
    l.rows = matrix_from_json(j.at("matrix"));
    l.epsilon = j.value("epsilon", 0.0);
    l.observable_rank = j.value("observable_rank", std::size_t{0});
    return l;
}

json to_json(const EpsilonSearch &search) {
    json j;
    j["epsilon"] = search.epsilon;
    j["epsilon_max"] = search.epsilon_max;
    j["epsilon_ratio"] = search.epsilon_max > 0.0 ? json(search.epsilon / search.epsilon_max) : json(nullptr);
    j["size"] = search.lumping.size();
    j["iterations"] = search.iterations;
    j["outcome"] = outcome_name(search.outcome);
    json hist = json::array();
    for (const SearchStep &s : search.history)
        hist.push_back(json{{"lower", s.lower}, {"upper", s.upper}, {"epsilon", s.epsilon}, {"size", s.size}});
    j["history"] = std::move(hist);
    j["lumping"] = to_json(search.lumping);
    return j;
}

json to_json(const ReductionReport &r) {
    json j;
    j["e_T"] = r.e_at_T;
    j["e_rel_T"] = r.e_rel_at_T ? json(*r.e_rel_at_T) : json(nullptr);
    j["e_max"] = r.e_max;
    j["eta"] = r.eta;
    j["lipschitz_C"] = r.lipschitz_C;
    j["norm_L"] = r.norm_l;
    j["norm_Lbar"] = r.norm_lbar;
    j["K"] = number_or_null(r.bound_constant);
    j["bound"] = number_or_null(r.bound);
    j["bound_violations"] = r.bound_violations;
    j["lipschitz_box"] = json{{"lower", vector_to_json(r.lipschitz_box_lower)},
                              {"upper", vector_to_json(r.lipschitz_box_upper)}};
    j["grid_points"] = r.times.size();
    json err = json::array();
    json dev = json::array();
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        err.push_back(json::array({r.times[k], r.error[k]}));
        dev.push_back(json::array({r.times[k], r.deviation[k]}));
    }
    j["error_series"] = std::move(err);
    j["deviation_series"] = std::move(dev);
    return j;
}

json to_json(const SolverConfig &cfg) {
    return json{{"rel_tol", cfg.rel_tol},
                {"abs_tol", cfg.abs_tol},
                {"initial_step", cfg.initial_step},
                {"max_step", number_or_null(cfg.max_step)},
                {"max_steps", cfg.max_steps}};
}

void write_text(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out)
        throw std::ios_base::failure("write to '" + path.string() + "' failed");
}

void write_json(const std::filesystem::path &path, const json &j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::ios_base::failure("cannot open '" + path.string() + "'");
    return json::parse(in);
}

std::string to_csv(const std::vector<std::string> &header, const std::vector<std::vector<double>> &rows) {
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c)
        out += (c ? "," : "") + header[c];
    out += '\n';
    for (const auto &row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c)
                out += ',';
            out += format_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

std::string trajectory_csv(const std::vector<double> &times, const std::vector<Eigen::VectorXd> &states,
                           const std::vector<std::string> &names) {
    std::vector<std::string> header{"t"};
    header.insert(header.end(), names.begin(), names.end());
    std::vector<std::vector<double>> rows;
    rows.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<double> row{times[k]};
        for (Eigen::Index i = 0; i < states[k].size(); ++i)
            row.push_back(states[k][i]);
        rows.push_back(std::move(row));
    }
    return to_csv(header, rows);
}

} // namespace lumpkit

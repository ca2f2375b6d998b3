#include "dmapx/dataset.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "dmapx/errors.hpp"
#include "dmapx/rng.hpp"

namespace dmapx::dataset {

namespace {

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_coordinate(const std::string& field, std::size_t row) {
    const char* begin = field.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw IoError("parse error at row " + std::to_string(row) + ": bad coordinate '" +
                      field + "'");
    return v;
}

}  // namespace

PointCloud validated(Eigen::MatrixXd points) {
    require(points.rows() >= 1 && points.cols() >= 1, "point cloud must be at least 1x1");
    if (!points.allFinite()) throw ContractError("point cloud contains NaN or Inf");
    return PointCloud{std::move(points)};
}

LabeledPointCloud load_points(const std::string& path, bool has_labels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file '" + path + "'");
    const std::size_t n_cols = split_csv_line(line).size();
    if (n_cols < 1 || (has_labels && n_cols < 2))
        throw IoError("header of '" + path + "' has too few columns");
    const std::size_t d = has_labels ? n_cols - 1 : n_cols;

    std::vector<double> coords;
    std::vector<int> labels;
    std::map<std::string, int> label_ids;  // first-appearance order via running counter
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        ++row;
        const auto fields = split_csv_line(line);
        if (fields.size() != n_cols)
            throw IoError("parse error at row " + std::to_string(row) + ": expected " +
                          std::to_string(n_cols) + " fields, got " +
                          std::to_string(fields.size()));
        for (std::size_t c = 0; c < d; ++c) coords.push_back(parse_coordinate(fields[c], row));
        if (has_labels) {
            const std::string& tag = fields[d];
            auto [it, inserted] = label_ids.try_emplace(tag, static_cast<int>(label_ids.size()));
            labels.push_back(it->second);
        }
    }
    if (row == 0) throw IoError("no data rows in '" + path + "'");

    Eigen::MatrixXd points(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < row; ++i)
        for (std::size_t c = 0; c < d; ++c)
            points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                coords[i * d + c];

    LabeledPointCloud out;
    out.cloud = validated(std::move(points));
    out.labels = std::move(labels);
    return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out) throw IoError("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

void write_points(const std::string& path, const PointCloud& cloud,
                  const std::vector<int>* labels) {
    if (labels && static_cast<Eigen::Index>(labels->size()) != cloud.size())
        throw ContractError("label count does not match point count");
    std::ostringstream os;
    for (Eigen::Index c = 0; c < cloud.dim(); ++c) os << (c ? ",x" : "x") << c;
    if (labels) os << ",label";
    os << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        for (Eigen::Index c = 0; c < cloud.dim(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", cloud.points(i, c));
            if (c) os << ',';
            os << buf;
        }
        if (labels) os << ',' << (*labels)[static_cast<std::size_t>(i)];
        os << '\n';
    }
    write_text_atomic(path, os.str());
}

PointCloud subsample(const PointCloud& cloud, std::size_t n, std::uint64_t seed) {
    require(n >= 1, "subsample size must be at least 1");
    const std::size_t total = static_cast<std::size_t>(cloud.size());
    if (n >= total) return cloud;
    const auto idx = rng::sample_indices(total, n, seed);
    Eigen::MatrixXd points(static_cast<Eigen::Index>(n), cloud.dim());
    for (std::size_t i = 0; i < n; ++i)
        points.row(static_cast<Eigen::Index>(i)) =
            cloud.points.row(static_cast<Eigen::Index>(idx[i]));
    return PointCloud{std::move(points)};
}

}  // namespace dmapx::dataset

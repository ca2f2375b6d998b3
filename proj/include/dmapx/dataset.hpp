#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace dmapx::dataset {

// N points in R^d, row per point. Implicit ids are the row indices 0..N-1.
struct PointCloud {
    Eigen::MatrixXd points;  // N x d

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

// Cloud plus optional integer class labels (contiguous, starting at 0).
struct LabeledPointCloud {
    PointCloud cloud;
    std::vector<int> labels;  // empty when the source had no label column

    bool has_labels() const { return !labels.empty(); }
};

// CSV ingestion. Header row required: x0,...,x{d-1}[,label]. String labels
// are mapped to integers in order of first appearance.
LabeledPointCloud load_points(const std::string& path, bool has_labels);

// CSV output, header as above, LF line endings, 17 significant digits.
// Writes to a temporary file in the target directory, then renames.
void write_points(const std::string& path, const PointCloud& cloud,
                  const std::vector<int>* labels = nullptr);

// Atomic text output (temp + rename), shared by every file writer.
void write_text_atomic(const std::string& path, const std::string& content);

// Uniform subsample without replacement of min(n, N) points; original
// relative order preserved, ids reindexed 0..n-1.
PointCloud subsample(const PointCloud& cloud, std::size_t n, std::uint64_t seed);

PointCloud validated(Eigen::MatrixXd points);

}  // namespace dmapx::dataset

#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace ucp {

// Feature rows are stored contiguously, one instance per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Class labels are 0-based in memory; CSV files and reports use 1-based labels.
using Label = int;

}  // namespace ucp

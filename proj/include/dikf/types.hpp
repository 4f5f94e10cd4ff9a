#pragma once

#include <Eigen/Dense>

namespace dikf {

// Data matrices are column-major in the semantic sense: samples are columns.
// Gram blocks k(X1, X2) are N1 x N2 with samples as rows on both axes.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace dikf

#pragma once

#include <Eigen/Dense>

#include <complex>

namespace specaudit {

/** Scalar type used throughout the library. */
using scalar_t = double;

/** Dense dynamic vector. */
using vector_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, 1>;

/** Dense dynamic matrix. */
using matrix_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, Eigen::Dynamic>;

/** Dense dynamic array (elementwise semantics). */
using array_t = Eigen::Array<scalar_t, Eigen::Dynamic, 1>;

/** Complex vector, e.g. DFT coefficients. */
using cvector_t = Eigen::Matrix<std::complex<scalar_t>, Eigen::Dynamic, 1>;

using index_t = Eigen::Index;

}  // namespace specaudit

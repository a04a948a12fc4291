// Dense linear-algebra vocabulary shared by every module.
#ifndef MFLAB_TYPES_HPP
#define MFLAB_TYPES_HPP

#include <Eigen/Dense>

namespace mflab {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = MatX<double>;
using Vector = VecX<double>;
using Index = Eigen::Index;

}  // namespace mflab

#endif  // MFLAB_TYPES_HPP

#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace l2sk {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat64 = Eigen::Matrix<double, 6, 4>;

// State coincides (within guard radius) with one of the primaries.
struct SingularStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A sampled-data map lost rank (delta outside its validity region).
struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace l2sk

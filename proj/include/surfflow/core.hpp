#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace surfflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat23 = Eigen::Matrix<double, 2, 3>;

struct Error : std::runtime_error {
    Error(const std::string& category, const std::string& msg)
        : std::runtime_error(category + ": " + msg), category(category) {}
    std::string category;
};

#define SURFFLOW_ERROR(Name)                                            \
    struct Name : Error {                                               \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}    \
    }

SURFFLOW_ERROR(ParseError);
SURFFLOW_ERROR(IoError);
SURFFLOW_ERROR(ConfigError);
SURFFLOW_ERROR(UnsupportedDegree);
SURFFLOW_ERROR(ConnectivityMismatch);
SURFFLOW_ERROR(FoldedElement);
SURFFLOW_ERROR(DegenerateJacobian);
SURFFLOW_ERROR(DimensionMismatch);
SURFFLOW_ERROR(SingularMatrix);
SURFFLOW_ERROR(NonFiniteSolution);
SURFFLOW_ERROR(ZeroMeanCurvature);
SURFFLOW_ERROR(NoConvergence);
SURFFLOW_ERROR(DegenerateLevels);

#undef SURFFLOW_ERROR

}  // namespace surfflow

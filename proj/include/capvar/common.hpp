#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace capvar {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CAPVAR_ERROR(Name)                      \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

CAPVAR_ERROR(RankDeficient);
CAPVAR_ERROR(NotOnSurface);
CAPVAR_ERROR(InvalidPlane);
CAPVAR_ERROR(InvalidArgument);
CAPVAR_ERROR(FieldClassError);
CAPVAR_ERROR(DegenerateProjection);
CAPVAR_ERROR(AngleDegenerate);
CAPVAR_ERROR(AngleIsOrthogonal);
CAPVAR_ERROR(DegenerateChart);
CAPVAR_ERROR(ExponentError);
CAPVAR_ERROR(RadiusOrder);
CAPVAR_ERROR(NoLambdaFound);
CAPVAR_ERROR(NotConical);
CAPVAR_ERROR(NotContained);
CAPVAR_ERROR(DivisionDegenerate);
CAPVAR_ERROR(FormatError);
CAPVAR_ERROR(ConfigError);

#undef CAPVAR_ERROR

inline constexpr double kPi = 3.14159265358979323846;

/// Volume of the unit ball in R^k.
double unit_ball_volume(int k);

/// Unit coordinate vector e_i in R^d (zero-based index).
Vec unit_vector(int d, int i);

}  // namespace capvar

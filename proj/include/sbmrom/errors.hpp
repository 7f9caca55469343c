#pragma once

#include <stdexcept>
#include <string>

namespace sbmrom {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InvalidDomain : Error { using Error::Error; };
struct InvalidMesh : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct GeometryOutOfBounds : Error { using Error::Error; };
struct DegenerateClassification : Error { using Error::Error; };
struct SingularProjection : Error { using Error::Error; };
struct DegenerateCenters : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct EigenFailure : Error { using Error::Error; };
struct EmptySpectrum : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct SingularReducedMass : Error { using Error::Error; };
struct EmptyBasis : Error { using Error::Error; };
struct TimeGridMismatch : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Divergence of the explicit march; carries enough context for a post-mortem.
struct NumericalBlowup : Error {
    explicit NumericalBlowup(const std::string& what, long long step_index = -1,
                             double time = 0.0)
        : Error(what), step(step_index), t(time) {}
    long long step;
    double t;
};

} // namespace sbmrom

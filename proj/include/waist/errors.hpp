#pragma once

#include <stdexcept>
#include <string>

namespace waist {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroVector : Error {
    ZeroVector() : Error("vector has (near-)zero norm") {}
};

struct DimMismatch : Error {
    DimMismatch() : Error("operands live on spheres of different dimension") {}
};

struct NotTangent : Error {
    NotTangent() : Error("direction is not orthogonal to the base point") {}
};

struct DegenerateMean : Error {
    DegenerateMean() : Error("weighted mean too close to the origin to project") {}
};

struct OnBoundary : Error {
    OnBoundary() : Error("point lies on a cutting hypersphere") {}
};

struct DepthTooLarge : Error {
    explicit DepthTooLarge(int depth)
        : Error("tree depth " + std::to_string(depth) + " exceeds the orbit-enumeration cap") {}
};

struct OutOfDomain : Error {
    OutOfDomain() : Error("argument outside the density domain") {}
};

struct MaxNotAtZero : Error {
    MaxNotAtZero() : Error("density does not attain its maximum at t = 0") {}
};

struct ZeroMass : Error {
    ZeroMass() : Error("integral mass below representable threshold") {}
};

struct PlateauDetected : Error {
    PlateauDetected() : Error("density argmax is not a single point") {}
};

struct EmptyCell : Error {
    EmptyCell() : Error("cell contains no samples") {}
};

struct EmptySlab : Error {
    EmptySlab() : Error("no samples fall in the fiber slab (z outside range?)") {}
};

struct BudgetExceeded : Error {
    BudgetExceeded() : Error("generation budget exceeded") {}
};

}  // namespace waist

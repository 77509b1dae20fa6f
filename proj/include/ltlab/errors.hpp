#pragma once

#include <stdexcept>
#include <string>

namespace ltlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct CapabilityError : Error { using Error::Error; };
struct SolverError : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
// a result contradicting an invariant that construction should have guaranteed
struct ConsistencyError : Error { using Error::Error; };
struct EmptyCoverError : Error { using Error::Error; };

}  // namespace ltlab

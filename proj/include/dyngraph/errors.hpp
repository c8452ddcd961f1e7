#pragma once

#include <stdexcept>
#include <string>

namespace dyngraph {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A graph update that conflicts with the current graph state
// (duplicate edge, missing edge, node id out of range).
struct UpdateConflict : Error {
    using Error::Error;
};

// Zero or non-finite edge weight.
struct InvalidWeight : Error {
    using Error::Error;
};

// Vector/matrix dimensions do not agree.
struct ShapeMismatch : Error {
    using Error::Error;
};

// Embedding kind cannot represent the graph or the requested update.
struct IncompatibleEmbedding : Error {
    using Error::Error;
};

// Operation outside the capability set of the maintained state.
struct UnsupportedOperation : Error {
    using Error::Error;
};

// NodeInsert without a matching observation entry for b.
struct MissingObservation : Error {
    using Error::Error;
};

struct EmptyMatrix : Error {
    using Error::Error;
};

struct ConvergenceFailure : Error {
    using Error::Error;
};

// Malformed input file; message carries file/line position.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace dyngraph

#pragma once

#include <stdexcept>
#include <string>

namespace gsem {

struct GsemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad data or violated precondition/invariant.
struct ValidationError : GsemError {
    using GsemError::GsemError;
};

// Malformed text where structured content was expected (JSON, trace, reply).
struct ParseError : GsemError {
    using GsemError::GsemError;
};

// Model endpoint failure that survived the retry budget.
struct ProviderError : GsemError {
    using GsemError::GsemError;
};

struct SnapshotError : GsemError {
    using GsemError::GsemError;
};

}  // namespace gsem

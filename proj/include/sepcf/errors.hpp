#pragma once

#include <stdexcept>
#include <string>

namespace sepcf {

// Base class for every error thrown by the library. Call sites that only
// want "did it work" can catch this; tests catch the concrete types.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct EmptyWindow : Error {
    using Error::Error;
};
struct EmptyTrainingSet : Error {
    using Error::Error;
};
struct SingleClassDataset : Error {
    using Error::Error;
};
struct InsufficientClassMembers : Error {
    using Error::Error;
};
struct EmptySequence : Error {
    using Error::Error;
};
struct EmptySet : Error {
    using Error::Error;
};
struct SchemaError : Error {
    using Error::Error;
};
struct IrregularCadence : Error {
    using Error::Error;
};
struct EmptyFile : Error {
    using Error::Error;
};
struct EventOutsideSeries : Error {
    using Error::Error;
};
struct InvalidConfig : Error {
    using Error::Error;
};
struct SliceOutsideWindow : Error {
    using Error::Error;
};
struct MissingCfeFeature : Error {
    using Error::Error;
};
struct MismatchedInstanceSets : Error {
    using Error::Error;
};

struct NoValidCandidate : Error {
    using Error::Error;
};

}  // namespace sepcf

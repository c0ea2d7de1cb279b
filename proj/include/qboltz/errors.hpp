#pragma once

#include <stdexcept>
#include <string>

namespace qboltz {

/// Base class for every error raised by the library. Numerical contract
/// violations are never thrown; they are reported as values.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A matrix failed a DensityMatrix / ProjectorFamily / UnitaryMap / KrausMap invariant.
class InvalidState : public Error {
public:
    using Error::Error;
};

class ZeroWeight : public Error {
public:
    using Error::Error;
};

class NotDecoherentInitialState : public Error {
public:
    using Error::Error;
};

class StepPastEnd : public Error {
public:
    using Error::Error;
};

class DimensionCap : public Error {
public:
    using Error::Error;
};

class DegenerateAmplitudes : public Error {
public:
    using Error::Error;
};

class OrbitCap : public Error {
public:
    using Error::Error;
};

class GridTooCoarse : public Error {
public:
    using Error::Error;
};

class MissingCaseB : public Error {
public:
    using Error::Error;
};

class ConfigInvalid : public Error {
public:
    using Error::Error;
};

}  // namespace qboltz

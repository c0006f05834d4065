#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dra {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

class InfeasibleDemand : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class CollapsedInterval : public Error {
public:
    using Error::Error;
};

class BoundViolation : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class NoRoot : public Error {
public:
    using Error::Error;
};

class MultiRoot : public Error {
public:
    using Error::Error;
};

/// Raised when no step halving keeps a PEV's strategies inside their bounds.
class StepCollapse : public Error {
public:
    StepCollapse(std::size_t pev, std::size_t slot, const std::string& what)
        : Error(what), pev_(pev), slot_(slot) {}

    std::size_t pev() const noexcept { return pev_; }
    std::size_t slot() const noexcept { return slot_; }

private:
    std::size_t pev_;
    std::size_t slot_;
};

}  // namespace dra

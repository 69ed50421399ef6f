#pragma once

#include <stdexcept>
#include <string>

namespace vcr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ModelError : public Error {
public:
    using Error::Error;
};

// Malformed expression tree (a node that no constructor produces).
class StructuralError : public Error {
public:
    using Error::Error;
};

// Pivotal-order precondition violated, or comparison undefined.
class OrderingError : public Error {
public:
    using Error::Error;
};

// Rejection or importance sampling kept less than 1e-3 of its mass.
class InsufficientConditioning : public Error {
public:
    using Error::Error;
};

// Every importance weight vanished: the recruitment law cannot produce the
// state's history at all.
class UnreachableState : public InsufficientConditioning {
public:
    using InsufficientConditioning::InsufficientConditioning;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

// Closed form disagrees with the linear system under every grouping tried.
class FormulaDiscrepancy : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace vcr

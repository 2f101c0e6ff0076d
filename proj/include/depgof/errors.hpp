#pragma once

#include <stdexcept>
#include <string>

namespace depgof {

// Base class for every error raised by the library. The category maps onto
// the CLI exit codes (config 2, data 3, numerical 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameter outside its admissible domain (g >= 1, negative variance, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or insufficient input data.
class DataError : public Error {
public:
    using Error::Error;
};

// Failed factorization, indefinite kernel, rank-deficient fit.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace depgof

#pragma once

#include <stdexcept>
#include <string>

namespace quadlat {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPrimeError : Error { using Error::Error; };
struct ZeroInverseError : Error { using Error::Error; };
struct BothZeroError : Error { using Error::Error; };
struct OutOfRangeError : Error { using Error::Error; };
struct BadDeltaError : Error { using Error::Error; };
struct SingularBasisError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct DeltaTooLargeError : Error { using Error::Error; };
struct BadRSError : Error { using Error::Error; };
struct FieldTooLargeError : Error { using Error::Error; };
struct TooExpensiveError : Error { using Error::Error; };

}  // namespace quadlat

#pragma once

#include <stdexcept>
#include <string>

namespace mahgcn {

inline constexpr const char* kVersion = "0.1.0";

enum class Mode { train, eval };

// Error taxonomy, mirrored by the CLI exit codes:
//   ConfigError/UsageError -> 2, DataError (and ShapeError) -> 3, NumericError -> 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : ConfigError {
    using ConfigError::ConfigError;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : DataError {
    using DataError::DataError;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mahgcn

#ifndef DRIVETEL_ERRORS_HPP
#define DRIVETEL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace drivetel {

// Error taxonomy maps 1:1 onto CLI exit codes (see tools/).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad flags, bad config file, unusable paths. Exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed or inconsistent input data. Exit code 3.
struct DataError : Error {
    using Error::Error;
};

// Parse failure with file/line context.
struct ParseError : DataError {
    ParseError(const std::string& path, std::size_t line_no, const std::string& what)
        : DataError(path + ":" + std::to_string(line_no) + ": " + what),
          line_number(line_no) {}
    std::size_t line_number;
};

// Numerical breakdown (singular covariance, diverging optimizer, ...). Exit code 4.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace drivetel

#endif

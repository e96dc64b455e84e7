#pragma once

#include <stdexcept>
#include <string>

namespace grazing {

// Error taxonomy mirrored by the CLI exit codes:
//   NumericError    -> 1 (iteration failed to converge, singular system, escape)
//   ValidationError -> 2 (bad domain, malformed word, out-of-range argument)
//   IoError         -> 3 (unreadable/unwritable files, malformed JSON)
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace grazing

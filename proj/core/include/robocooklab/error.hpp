#pragma once

#include <stdexcept>
#include <string>

namespace rcl {

enum class ErrorCode {
  EMPTY_CLOUD,
  SIZE_MISMATCH,
  NO_NORMALS,
  SHAPE,
  SCALAR_REQUIRED,
  NO_DATA,
  ACTION_OUT_OF_RANGE,
  VOLUME_OUT_OF_RANGE,
  BAD_RANGE,
  DEGENERATE_LABELS,
  FORMAT_VERSION,
  PARSE,
  CONFIG,
  IO,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rcl

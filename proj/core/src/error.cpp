#include "robocooklab/error.hpp"

namespace rcl {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::EMPTY_CLOUD: return "EMPTY_CLOUD";
    case ErrorCode::SIZE_MISMATCH: return "SIZE_MISMATCH";
    case ErrorCode::NO_NORMALS: return "NO_NORMALS";
    case ErrorCode::SHAPE: return "SHAPE";
    case ErrorCode::SCALAR_REQUIRED: return "SCALAR_REQUIRED";
    case ErrorCode::NO_DATA: return "NO_DATA";
    case ErrorCode::ACTION_OUT_OF_RANGE: return "ACTION_OUT_OF_RANGE";
    case ErrorCode::VOLUME_OUT_OF_RANGE: return "VOLUME_OUT_OF_RANGE";
    case ErrorCode::BAD_RANGE: return "BAD_RANGE";
    case ErrorCode::DEGENERATE_LABELS: return "DEGENERATE_LABELS";
    case ErrorCode::FORMAT_VERSION: return "FORMAT_VERSION";
    case ErrorCode::PARSE: return "PARSE";
    case ErrorCode::CONFIG: return "CONFIG";
    case ErrorCode::IO: return "IO";
  }
  return "UNKNOWN";
}

}  // namespace rcl

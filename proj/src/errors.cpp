#include "awgent/errors.hpp"

namespace awgent {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_design: return "invalid-design";
    case ErrorCode::layout: return "layout";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::model_validity: return "model-validity";
    case ErrorCode::degeneracy: return "degeneracy";
    case ErrorCode::empty_jsa: return "empty-jsa";
    case ErrorCode::resolution: return "resolution";
    case ErrorCode::normalization: return "normalization";
    case ErrorCode::grid_mismatch: return "grid";
    case ErrorCode::undefined_visibility: return "undefined-visibility";
    case ErrorCode::ill_conditioned: return "ill-conditioned";
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::calibration: return "calibration";
    case ErrorCode::no_data: return "no-data";
    case ErrorCode::fit: return "fit";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::coverage: return "coverage";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace awgent

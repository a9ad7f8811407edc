#include "morphocv/error.hpp"

namespace morphocv {

std::string_view code_name(Errc code) noexcept {
  switch (code) {
    case Errc::kInvalidArgument: return "E_INVALID_ARGUMENT";
    case Errc::kEmptyFile: return "E_EMPTY_FILE";
    case Errc::kRaggedRows: return "E_RAGGED_ROWS";
    case Errc::kNonNumericCell: return "E_NON_NUMERIC_CELL";
    case Errc::kNegativeDepth: return "E_NEGATIVE_DEPTH";
    case Errc::kUnsupportedPngFormat: return "E_UNSUPPORTED_PNG_FORMAT";
    case Errc::kPngDecode: return "E_PNG_DECODE";
    case Errc::kMixedSchemas: return "E_MIXED_SCHEMAS";
    case Errc::kEmptyInput: return "E_EMPTY_INPUT";
    case Errc::kEmptyMask: return "E_EMPTY_MASK";
    case Errc::kDimensionMismatch: return "E_DIMENSION_MISMATCH";
    case Errc::kEmptyRoi: return "E_EMPTY_ROI";
    case Errc::kNegativeSigma: return "E_NEGATIVE_SIGMA";
    case Errc::kBadSidecar: return "E_BAD_SIDECAR";
    case Errc::kUnknownSidecarId: return "E_UNKNOWN_SIDECAR_ID";
    case Errc::kBothEmpty: return "E_BOTH_EMPTY";
    case Errc::kNoGroundTruth: return "E_NO_GROUND_TRUTH";
    case Errc::kNoInstances: return "E_NO_INSTANCES";
    case Errc::kUploadTooLarge: return "E_UPLOAD_TOO_LARGE";
    case Errc::kPortInUse: return "E_PORT_IN_USE";
    case Errc::kIo: return "E_IO";
  }
  return "E_UNKNOWN";
}

}  // namespace morphocv

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace morphocv {

// Stable, machine-readable failure categories. The string form returned by
// code_name() is part of the CLI and HTTP contract and must not change.
enum class Errc {
  kInvalidArgument,
  kEmptyFile,
  kRaggedRows,
  kNonNumericCell,
  kNegativeDepth,
  kUnsupportedPngFormat,
  kPngDecode,
  kMixedSchemas,
  kEmptyInput,
  kEmptyMask,
  kDimensionMismatch,
  kEmptyRoi,
  kNegativeSigma,
  kBadSidecar,
  kUnknownSidecarId,
  kBothEmpty,
  kNoGroundTruth,
  kNoInstances,
  kUploadTooLarge,
  kPortInUse,
  kIo,
};

std::string_view code_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return morphocv::code_name(code_); }

 private:
  Errc code_;
};

}  // namespace morphocv

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace texassoc {

enum class ErrorCode {
  MissingRoot,
  EmptyCorpus,
  DuplicateClass,
  UnknownTextureClass,
  ImageDecodeError,
  InvalidDimensions,
  CropLargerThanImage,
  ShapeMismatch,
  InvalidNormalization,
  ModelLoadError,
  ShapeContractError,
  ManifestMismatch,
  InferenceError,
  NonFiniteLogits,
  InvalidBatch,
  IoError,
  ParseError,
  IndexOutOfRange,
  LabelMismatch,
  EmptyTextureClass,
  InvalidArgument,
  InvalidThreshold,
  InvalidExpectationMap,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingRoot: return "MissingRoot";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DuplicateClass: return "DuplicateClass";
    case ErrorCode::UnknownTextureClass: return "UnknownTextureClass";
    case ErrorCode::ImageDecodeError: return "ImageDecodeError";
    case ErrorCode::InvalidDimensions: return "InvalidDimensions";
    case ErrorCode::CropLargerThanImage: return "CropLargerThanImage";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidNormalization: return "InvalidNormalization";
    case ErrorCode::ModelLoadError: return "ModelLoadError";
    case ErrorCode::ShapeContractError: return "ShapeContractError";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::InferenceError: return "InferenceError";
    case ErrorCode::NonFiniteLogits: return "NonFiniteLogits";
    case ErrorCode::InvalidBatch: return "InvalidBatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::EmptyTextureClass: return "EmptyTextureClass";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidThreshold: return "InvalidThreshold";
    case ErrorCode::InvalidExpectationMap: return "InvalidExpectationMap";
  }
  return "Unknown";
}

/// Every failure raised by the library. `line()` is set for errors tied to a
/// position in an input file (prediction logs, manifests).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format(code, message, line)), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) out += " (line " + std::to_string(*line) + ")";
    out += ": ";
    out += message;
    return out;
  }

  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace texassoc

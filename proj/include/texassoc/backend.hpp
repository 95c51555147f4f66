#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

#include "texassoc/error.hpp"
#include "texassoc/onnx_model_info.hpp"
#include "texassoc/preprocess.hpp"

namespace texassoc {

using LogitsRow = std::vector<float>;

/// Index of the largest value; the lowest index wins ties.
inline std::size_t argmax_class(std::span<const float> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

/// Softmax probability of the argmax class, computed with the max subtracted.
inline double top1_confidence(std::span<const float> row) {
  if (row.empty()) return 0.0;
  const double peak = row[argmax_class(row)];
  double denom = 0.0;
  for (float v : row) denom += std::exp(static_cast<double>(v) - peak);
  return std::clamp(1.0 / denom, 0.0, 1.0);
}

/// Image classifier as a batch function from tensors to logits. One batch at
/// a time per instance.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::size_t num_classes() const noexcept = 0;
  virtual std::size_t batch_size() const noexcept = 0;

  std::vector<LogitsRow> predict_batch(std::span<const InputTensor> batch) {
    if (batch.empty()) throw Error(ErrorCode::InvalidBatch, "empty batch");
    if (batch.size() > batch_size()) {
      throw Error(ErrorCode::InvalidBatch, "batch of " + std::to_string(batch.size()) +
                                               " exceeds batch size " + std::to_string(batch_size()));
    }
    std::lock_guard lock(mutex_);
    auto rows = run(batch);
    if (rows.size() != batch.size()) {
      throw Error(ErrorCode::InferenceError, "backend returned " + std::to_string(rows.size()) +
                                                 " rows for " + std::to_string(batch.size()) + " inputs");
    }
    for (const auto& row : rows) {
      if (row.size() != num_classes()) {
        throw Error(ErrorCode::InferenceError, "logits row has wrong width");
      }
      if (!std::all_of(row.begin(), row.end(), [](float v) { return std::isfinite(v); })) {
        throw Error(ErrorCode::NonFiniteLogits, "backend produced non-finite logits");
      }
    }
    return rows;
  }

 protected:
  virtual std::vector<LogitsRow> run(std::span<const InputTensor> batch) = 0;

 private:
  std::mutex mutex_;
};

/// Deterministic model-free backend. Each tensor is mapped back to pixel
/// space with the normalization it was produced with; the predicted class is
/// floor(mean pixel value in [0,1] * O), clamped to O-1. Logits are
/// -|o - predicted|.
class StubBackend final : public Backend {
 public:
  StubBackend(std::size_t num_classes, std::size_t batch_size,
              NormalizationSpec normalization = imagenet_normalization())
      : num_classes_(num_classes), batch_size_(batch_size), normalization_(normalization) {
    if (num_classes_ == 0) throw Error(ErrorCode::InvalidArgument, "stub needs at least one class");
    if (batch_size_ == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
    normalization_.validate();
  }

  std::size_t num_classes() const noexcept override { return num_classes_; }
  std::size_t batch_size() const noexcept override { return batch_size_; }

  std::size_t bucket(const InputTensor& tensor) const {
    double sum = 0.0;
    for (std::size_t c = 0; c < InputTensor::kChannels; ++c) {
      for (float v : tensor.channel(c)) {
        sum += static_cast<double>(v) * normalization_.stddev[c] + normalization_.mean[c];
      }
    }
    const double mean = std::clamp(sum / static_cast<double>(InputTensor::kSize), 0.0, 1.0);
    const auto raw = static_cast<std::size_t>(std::floor(mean * static_cast<double>(num_classes_)));
    return std::min(raw, num_classes_ - 1);
  }

 protected:
  std::vector<LogitsRow> run(std::span<const InputTensor> batch) override {
    std::vector<LogitsRow> rows;
    rows.reserve(batch.size());
    for (const auto& tensor : batch) {
      const auto b = static_cast<double>(bucket(tensor));
      LogitsRow row(num_classes_);
      for (std::size_t o = 0; o < num_classes_; ++o) {
        row[o] = static_cast<float>(-std::abs(static_cast<double>(o) - b));
      }
      rows.push_back(std::move(row));
    }
    return rows;
  }

 private:
  std::size_t num_classes_;
  std::size_t batch_size_;
  NormalizationSpec normalization_;
};

/// Checks a model signature against the classifier contract: one float input
/// (N,3,224,224) with N dynamic or >= batch_size, one float output (N,O).
/// Returns the declared output width when it is static.
inline std::optional<std::size_t> check_shape_contract(const OnnxModelInfo& info,
                                                       std::size_t batch_size) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ShapeContractError, what); };
  if (info.inputs.size() != 1) {
    fail("model must have exactly one input, found " + std::to_string(info.inputs.size()));
  }
  if (info.outputs.size() != 1) {
    fail("model must have exactly one output, found " + std::to_string(info.outputs.size()));
  }
  constexpr std::int32_t kFloat = 1;
  const auto& in = info.inputs.front();
  if (in.elem_type != kFloat) fail("input '" + in.name + "' is not float32");
  if (in.shape.size() != 4) fail("input '" + in.name + "' must be rank 4 (N,3,224,224)");
  const std::int64_t expected[] = {3, kCropSide, kCropSide};
  for (std::size_t d = 1; d < 4; ++d) {
    if (!in.shape[d].is_static() || *in.shape[d].value != expected[d - 1]) {
      fail("input '" + in.name + "' must have shape (N,3,224,224)");
    }
  }
  if (in.shape[0].is_static() && static_cast<std::size_t>(*in.shape[0].value) < batch_size) {
    fail("input batch dimension " + std::to_string(*in.shape[0].value) + " < batch size " +
         std::to_string(batch_size));
  }
  const auto& out = info.outputs.front();
  if (out.elem_type != kFloat) fail("output '" + out.name + "' is not float32");
  if (out.shape.size() != 2) fail("output '" + out.name + "' must be rank 2 (N,O)");
  if (out.shape[1].is_static()) return static_cast<std::size_t>(*out.shape[1].value);
  return std::nullopt;
}

/// ONNX classifier executed with the OpenCV DNN runtime.
class OnnxBackend final : public Backend {
 public:
  OnnxBackend(const std::filesystem::path& model_path, std::size_t batch_size)
      : batch_size_(batch_size) {
    if (batch_size_ == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
    const OnnxModelInfo info = read_onnx_model_info(model_path);
    const auto declared_width = check_shape_contract(info, batch_size_);
    try {
      net_ = cv::dnn::readNetFromONNX(model_path.string());
    } catch (const cv::Exception& e) {
      throw Error(ErrorCode::ModelLoadError, "cannot load " + model_path.string() + ": " + e.what());
    }
    if (net_.empty()) throw Error(ErrorCode::ModelLoadError, "empty network: " + model_path.string());
    net_.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
    net_.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);

    if (declared_width) {
      num_classes_ = *declared_width;
    } else {
      // Symbolic output width: discover it with one probe inference.
      const InputTensor probe;
      num_classes_ = forward(std::span<const InputTensor>(&probe, 1)).cols;
    }
  }

  std::size_t num_classes() const noexcept override { return num_classes_; }
  std::size_t batch_size() const noexcept override { return batch_size_; }

 protected:
  std::vector<LogitsRow> run(std::span<const InputTensor> batch) override {
    const cv::Mat out = forward(batch);
    if (static_cast<std::size_t>(out.cols) != num_classes_) {
      throw Error(ErrorCode::InferenceError, "model produced " + std::to_string(out.cols) +
                                                 " logits, expected " + std::to_string(num_classes_));
    }
    std::vector<LogitsRow> rows;
    rows.reserve(batch.size());
    for (int r = 0; r < out.rows; ++r) {
      const float* p = out.ptr<float>(r);
      rows.emplace_back(p, p + out.cols);
    }
    return rows;
  }

 private:
  cv::Mat forward(std::span<const InputTensor> batch) {
    const int dims[] = {static_cast<int>(batch.size()), 3, kCropSide, kCropSide};
    cv::Mat blob(4, dims, CV_32F);
    auto* dst = blob.ptr<float>();
    for (const auto& tensor : batch) {
      dst = std::copy(tensor.values().begin(), tensor.values().end(), dst);
    }
    cv::Mat out;
    try {
      net_.setInput(blob);
      out = net_.forward().clone();
    } catch (const cv::Exception& e) {
      throw Error(ErrorCode::InferenceError, std::string("inference failed: ") + e.what());
    }
    if (out.type() != CV_32F || out.total() % batch.size() != 0) {
      throw Error(ErrorCode::InferenceError, "unexpected output tensor from model");
    }
    return out.reshape(1, static_cast<int>(batch.size()));
  }

  cv::dnn::Net net_;
  std::size_t batch_size_;
  std::size_t num_classes_ = 0;
};

enum class BackendKind { OnnxFile, Stub };

struct BackendDescriptor {
  BackendKind kind = BackendKind::Stub;
  std::optional<std::filesystem::path> model_path;
  std::size_t batch_size = 32;
  NormalizationSpec normalization = imagenet_normalization();
};

/// Builds a backend and checks its output width against the manifest size.
inline std::unique_ptr<Backend> load_backend(const BackendDescriptor& desc, std::size_t manifest_size) {
  std::unique_ptr<Backend> backend;
  if (desc.kind == BackendKind::Stub) {
    backend = std::make_unique<StubBackend>(manifest_size, desc.batch_size, desc.normalization);
  } else {
    if (!desc.model_path) throw Error(ErrorCode::ModelLoadError, "onnx backend requires a model path");
    backend = std::make_unique<OnnxBackend>(*desc.model_path, desc.batch_size);
  }
  if (backend->num_classes() != manifest_size) {
    throw Error(ErrorCode::ManifestMismatch,
                "model has " + std::to_string(backend->num_classes()) + " outputs but manifest has " +
                    std::to_string(manifest_size) + " labels");
  }
  return backend;
}

}  // namespace texassoc

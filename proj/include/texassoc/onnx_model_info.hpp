#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "texassoc/error.hpp"

namespace texassoc {

/// One dimension of a declared tensor shape. Symbolic or missing dimensions
/// have no value.
struct Dim {
  std::optional<std::int64_t> value;
  std::string param;

  bool is_static() const noexcept { return value.has_value() && *value > 0; }
};

struct TensorInfo {
  std::string name;
  std::int32_t elem_type = 0;  // onnx.TensorProto.DataType; 1 == FLOAT
  std::vector<Dim> shape;
};

/// Graph-level inputs (initializers excluded) and outputs of an ONNX model.
struct OnnxModelInfo {
  std::vector<TensorInfo> inputs;
  std::vector<TensorInfo> outputs;
};

// Minimal protobuf wire-format reader covering the ModelProto fields needed to
// read declared input/output signatures:
//   ModelProto.graph = 7
//   GraphProto.initializer = 5, input = 11, output = 12
//   TensorProto.name = 8
//   ValueInfoProto.name = 1, type = 2
//   TypeProto.tensor_type = 1
//   TypeProto.Tensor.elem_type = 1, shape = 2
//   TensorShapeProto.dim = 1
//   Dimension.dim_value = 1, dim_param = 2
namespace detail::pb {

enum WireType : std::uint32_t { kVarint = 0, kFixed64 = 1, kLength = 2, kFixed32 = 5 };

struct Field {
  std::uint32_t number = 0;
  WireType wire = kVarint;
  std::uint64_t varint = 0;
  std::span<const std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  bool done() const noexcept { return pos_ >= data_.size(); }

  Field next() {
    Field f;
    const std::uint64_t key = varint();
    f.number = static_cast<std::uint32_t>(key >> 3);
    f.wire = static_cast<WireType>(key & 7);
    switch (f.wire) {
      case kVarint: f.varint = varint(); break;
      case kFixed64: f.bytes = take(8); break;
      case kFixed32: f.bytes = take(4); break;
      case kLength: {
        const std::uint64_t len = varint();
        if (len > data_.size() - pos_) fail("length-delimited field overruns buffer");
        f.bytes = take(static_cast<std::size_t>(len));
        break;
      }
      default: fail("unsupported wire type " + std::to_string(static_cast<int>(f.wire)));
    }
    return f;
  }

 private:
  [[noreturn]] static void fail(const std::string& what) {
    throw Error(ErrorCode::ModelLoadError, "malformed ONNX protobuf: " + what);
  }

  std::uint64_t varint() {
    std::uint64_t result = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos_ >= data_.size()) fail("truncated varint");
      const std::uint8_t byte = data_[pos_++];
      result |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
      if ((byte & 0x80) == 0) return result;
    }
    fail("varint too long");
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > data_.size() - pos_) fail("truncated field");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

inline std::string as_string(std::span<const std::uint8_t> bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

inline Dim parse_dim(std::span<const std::uint8_t> bytes) {
  Dim dim;
  for (Reader r(bytes); !r.done();) {
    const Field f = r.next();
    if (f.number == 1 && f.wire == kVarint) dim.value = static_cast<std::int64_t>(f.varint);
    if (f.number == 2 && f.wire == kLength) dim.param = as_string(f.bytes);
  }
  return dim;
}

inline void parse_tensor_type(std::span<const std::uint8_t> bytes, TensorInfo& info) {
  for (Reader r(bytes); !r.done();) {
    const Field f = r.next();
    if (f.number == 1 && f.wire == kVarint) info.elem_type = static_cast<std::int32_t>(f.varint);
    if (f.number == 2 && f.wire == kLength) {
      for (Reader shape(f.bytes); !shape.done();) {
        const Field d = shape.next();
        if (d.number == 1 && d.wire == kLength) info.shape.push_back(parse_dim(d.bytes));
      }
    }
  }
}

inline TensorInfo parse_value_info(std::span<const std::uint8_t> bytes) {
  TensorInfo info;
  for (Reader r(bytes); !r.done();) {
    const Field f = r.next();
    if (f.number == 1 && f.wire == kLength) info.name = as_string(f.bytes);
    if (f.number == 2 && f.wire == kLength) {
      for (Reader type(f.bytes); !type.done();) {
        const Field t = type.next();
        if (t.number == 1 && t.wire == kLength) parse_tensor_type(t.bytes, info);
      }
    }
  }
  return info;
}

}  // namespace detail::pb

inline OnnxModelInfo parse_onnx_model_info(std::span<const std::uint8_t> model_bytes) {
  using namespace detail::pb;
  std::optional<std::span<const std::uint8_t>> graph;
  for (Reader r(model_bytes); !r.done();) {
    const Field f = r.next();
    if (f.number == 7 && f.wire == kLength) graph = f.bytes;
  }
  if (!graph) throw Error(ErrorCode::ModelLoadError, "ONNX model has no graph");

  OnnxModelInfo info;
  std::set<std::string> initializers;
  std::vector<TensorInfo> declared_inputs;
  for (Reader r(*graph); !r.done();) {
    const Field f = r.next();
    if (f.wire != kLength) continue;
    if (f.number == 5) {
      for (Reader t(f.bytes); !t.done();) {
        const Field tf = t.next();
        if (tf.number == 8 && tf.wire == kLength) initializers.insert(as_string(tf.bytes));
      }
    } else if (f.number == 11) {
      declared_inputs.push_back(parse_value_info(f.bytes));
    } else if (f.number == 12) {
      info.outputs.push_back(parse_value_info(f.bytes));
    }
  }
  for (auto& input : declared_inputs) {
    if (!initializers.contains(input.name)) info.inputs.push_back(std::move(input));
  }
  return info;
}

inline std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline OnnxModelInfo read_onnx_model_info(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::ModelLoadError, "model file not found: " + path.string());
  }
  const auto bytes = read_binary_file(path);
  return parse_onnx_model_info(bytes);
}

}  // namespace texassoc

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <opencv2/core.hpp>

#include "texassoc/association.hpp"
#include "texassoc/backend.hpp"
#include "texassoc/corpus.hpp"
#include "texassoc/error.hpp"
#include "texassoc/image.hpp"
#include "texassoc/labels.hpp"
#include "texassoc/prediction_log.hpp"
#include "texassoc/preprocess.hpp"
#include "texassoc/report.hpp"
#include "texassoc/taxonomy.hpp"

namespace texassoc {

namespace fs = std::filesystem;

struct RunConfig {
  std::optional<fs::path> dataset_root;
  std::optional<fs::path> model_path;
  std::optional<fs::path> manifest_path;
  BackendKind backend_kind = BackendKind::OnnxFile;
  std::size_t batch_size = 32;
  ResizeMode resize_mode = ResizeMode::Square;
  NormalizationSpec normalization = imagenet_normalization();
  std::size_t top_k = 3;
  double strong_threshold = kDefaultStrongThreshold;
  std::optional<fs::path> expectation_map_path;
  std::optional<fs::path> log_out;
  std::optional<fs::path> from_log;
  std::optional<fs::path> report_out;
  std::optional<fs::path> taxonomy_out;
  std::optional<fs::path> matrix_csv;
  ReportConfig report;
  unsigned threads = 1;
  bool quiet = false;
};

enum class ReportKind { Auto, Associations, Taxonomy };

struct ReportCommandConfig {
  fs::path input;
  ReportKind kind = ReportKind::Auto;
  ReportConfig report;
  std::optional<fs::path> out;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingRoot:
    case ErrorCode::IoError:
    case ErrorCode::InvalidArgument:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

namespace detail {

inline void check_run_config(const RunConfig& cfg) {
  if (!cfg.manifest_path) throw Error(ErrorCode::InvalidArgument, "--manifest is required");
  if (cfg.from_log) return;
  if (!cfg.dataset_root) throw Error(ErrorCode::InvalidArgument, "--dataset is required unless --from-log is given");
  if (cfg.backend_kind == BackendKind::OnnxFile && !cfg.model_path) {
    throw Error(ErrorCode::InvalidArgument, "--model is required for the onnx backend");
  }
  if (cfg.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "--batch-size must be >= 1");
}

inline BackendDescriptor descriptor_for(const RunConfig& cfg) {
  return {cfg.backend_kind, cfg.model_path, cfg.batch_size, cfg.normalization};
}

inline void emit(const std::optional<fs::path>& path, const std::string& text, std::ostream& out) {
  if (path) {
    write_file_atomic(*path, text);
  } else {
    out << text;
  }
}

}  // namespace detail

/// Decodes and preprocesses every sample, runs the classifier in batches and
/// returns one record per sample in corpus order. Preprocessing runs on
/// `threads` workers; inference is serialized, so the records do not depend
/// on the thread count.
inline std::vector<PredictionRecord> predict_corpus(const TextureCorpus& corpus, Backend& backend,
                                                    const LabelManifest& manifest,
                                                    const NormalizationSpec& normalization, ResizeMode mode,
                                                    unsigned threads, PredictionLogWriter* log = nullptr,
                                                    std::ostream* progress = nullptr) {
  normalization.validate();
  const std::size_t total = corpus.samples.size();
  const std::size_t window = backend.batch_size() * std::max<std::size_t>(threads, 1) * 2;
  const unsigned workers = std::max(threads, 1u);

  std::vector<PredictionRecord> records;
  records.reserve(total);
  std::vector<InputTensor> tensors;

  for (std::size_t begin = 0; begin < total; begin += window) {
    const std::size_t end = std::min(total, begin + window);
    tensors.assign(end - begin, InputTensor{});
    std::vector<std::exception_ptr> errors(workers);
    std::atomic<std::size_t> next{begin};
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = next++; i < end; i = next++) {
              const RgbImage img = load_image(corpus.samples[i].path);
              tensors[i - begin] = preprocess_pipeline(img, normalization, mode);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    for (std::size_t b = begin; b < end; b += backend.batch_size()) {
      const std::size_t n = std::min(backend.batch_size(), end - b);
      const auto rows = backend.predict_batch(std::span<const InputTensor>(tensors).subspan(b - begin, n));
      for (std::size_t i = 0; i < n; ++i) {
        const auto& sample = corpus.samples[b + i];
        const std::size_t object = argmax_class(rows[i]);
        PredictionRecord r{fs::relative(sample.path, corpus.root).generic_string(),
                           sample.texture,
                           corpus.classes[sample.texture].name,
                           object,
                           manifest[object],
                           top1_confidence(rows[i])};
        if (log) log->write(r);
        records.push_back(std::move(r));
      }
    }
    if (progress) *progress << "[texassoc] " << end << "/" << total << " images\n";
  }
  return records;
}

/// Statistics and rendering shared by `run` and `stats`.
inline void analyze_and_report(std::span<const PredictionRecord> records, std::span<const TextureClass> classes,
                               const LabelManifest& manifest, const RunConfig& cfg, std::ostream& out) {
  std::optional<ResolvedExpectations> expectations;
  if (cfg.expectation_map_path) {
    expectations = resolve_expectations(load_expectation_map(*cfg.expectation_map_path), classes, manifest);
    if (!(cfg.strong_threshold > 0.0 && cfg.strong_threshold < 1.0)) {
      throw Error(ErrorCode::InvalidThreshold, "--strong-threshold must be in (0,1)");
    }
  }
  cfg.report.validate();

  const CountMatrix counts = accumulate(records, classes.size(), manifest.size(), cfg.threads);
  const EffectSizeMatrix effects = effect_sizes(counts);
  const AssociationTable table = top_k(effects, cfg.top_k);

  if (cfg.matrix_csv) write_file_atomic(*cfg.matrix_csv, render_effect_matrix_csv(effects, classes, manifest));
  detail::emit(cfg.report_out, render_association_table(table, classes, manifest, cfg.report), out);

  if (expectations) {
    const auto entries = build_taxonomy(table, *expectations, cfg.strong_threshold);
    const std::string text = render_taxonomy_report(entries, classes, manifest, cfg.report);
    if (!cfg.taxonomy_out) out << "\n";
    detail::emit(cfg.taxonomy_out, text, out);
  }
}

/// Recomputes statistics from a prediction log. Texture classes come from the
/// dataset when one is given, otherwise from the log itself.
inline int cmd_stats(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    detail::check_run_config(cfg);
    if (!cfg.from_log) throw Error(ErrorCode::InvalidArgument, "--from-log is required");
    const LabelManifest manifest = load_label_manifest(*cfg.manifest_path);
    auto records = read_log_records(*cfg.from_log);
    const std::vector<TextureClass> classes =
        cfg.dataset_root ? scan_corpus(*cfg.dataset_root).classes : classes_from_records(records);
    validate_records(records, classes, manifest);
    analyze_and_report(records, classes, manifest, cfg, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "texassoc: error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

inline int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.from_log) return cmd_stats(cfg, out, err);
  try {
    detail::check_run_config(cfg);
    cfg.normalization.validate();
    const TextureCorpus corpus = scan_corpus(*cfg.dataset_root);
    const LabelManifest manifest = load_label_manifest(*cfg.manifest_path);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    cv::setNumThreads(static_cast<int>(std::clamp(cfg.threads, 1u, hw)));
    const auto backend = load_backend(detail::descriptor_for(cfg), manifest.size());
    if (!cfg.quiet) {
      err << "[texassoc] " << corpus.num_classes() << " textures, " << corpus.num_samples() << " samples";
      if (corpus.skipped_files) err << ", skipped " << corpus.skipped_files << " non-image files";
      err << "\n";
    }

    std::optional<PredictionLogWriter> log;
    if (cfg.log_out) log.emplace(*cfg.log_out);
    const auto records = predict_corpus(corpus, *backend, manifest, cfg.normalization, cfg.resize_mode, cfg.threads,
                                        log ? &*log : nullptr, cfg.quiet ? nullptr : &err);
    if (log) log->close();

    analyze_and_report(records, corpus.classes, manifest, cfg, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "texassoc: error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

/// Checks the whole setup without running inference and lists every problem.
inline int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<std::string> violations;
  auto record = [&](const Error& e) { violations.emplace_back(e.what()); };

  if (!cfg.manifest_path) violations.emplace_back("InvalidArgument: --manifest is required");
  if (!cfg.dataset_root) violations.emplace_back("InvalidArgument: --dataset is required");

  std::optional<LabelManifest> manifest;
  if (cfg.manifest_path) {
    try {
      manifest = load_label_manifest(*cfg.manifest_path);
    } catch (const Error& e) {
      record(e);
    }
  }

  std::optional<std::size_t> model_width;
  if (cfg.backend_kind == BackendKind::OnnxFile) {
    if (!cfg.model_path) {
      violations.emplace_back("InvalidArgument: --model is required for the onnx backend");
    } else {
      try {
        model_width = OnnxBackend(*cfg.model_path, std::max<std::size_t>(cfg.batch_size, 1)).num_classes();
      } catch (const Error& e) {
        record(e);
      }
    }
  } else if (manifest) {
    model_width = manifest->size();
  }
  if (manifest && model_width && *model_width != manifest->size()) {
    record(Error(ErrorCode::ManifestMismatch, "model has " + std::to_string(*model_width) +
                                                  " outputs but manifest has " + std::to_string(manifest->size()) +
                                                  " labels"));
  }

  std::optional<TextureCorpus> corpus;
  if (cfg.dataset_root) {
    try {
      corpus = scan_corpus(*cfg.dataset_root);
    } catch (const Error& e) {
      record(e);
    }
  }

  if (cfg.expectation_map_path) {
    try {
      const ExpectationMap map = load_expectation_map(*cfg.expectation_map_path);
      if (corpus && manifest) {
        for (auto& v : expectation_map_violations(map, corpus->classes, *manifest)) {
          violations.push_back("InvalidExpectationMap: " + v);
        }
      }
    } catch (const Error& e) {
      record(e);
    }
  }

  if (!violations.empty()) {
    err << "texassoc: validation failed with " << violations.size() << " problem(s):\n";
    for (const auto& v : violations) err << "  - " << v << "\n";
    return kExitFailure;
  }
  out << "OK: " << corpus->num_classes() << " textures, " << corpus->num_samples() << " samples, O="
      << manifest->size() << "\n";
  return kExitOk;
}

/// Re-renders a JSON report in another format.
inline int cmd_report(const ReportCommandConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(cfg.input, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open report: " + cfg.input.string());
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

    ReportKind kind = cfg.kind;
    if (kind == ReportKind::Auto) {
      kind = text.find("\"label_text\"") != std::string::npos ? ReportKind::Taxonomy : ReportKind::Associations;
    }
    std::string rendered;
    if (kind == ReportKind::Taxonomy) {
      rendered = render_taxonomy_rows(parse_taxonomy_json(text), cfg.report);
    } else {
      rendered = render_association_rows(parse_association_json(text), 3, cfg.report);
    }
    detail::emit(cfg.out, rendered, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "texassoc: error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

}  // namespace texassoc

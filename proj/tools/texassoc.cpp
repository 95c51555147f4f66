// texassoc: texture-object association audit for image classifiers.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "texassoc/texassoc.hpp"

namespace {

using texassoc::BackendKind;
using texassoc::LabelStyle;
using texassoc::ReportFormat;
using texassoc::ResizeMode;

struct Normalization {
  std::vector<double> mean{0.485, 0.456, 0.406};
  std::vector<double> stddev{0.229, 0.224, 0.225};
};

void add_report_options(CLI::App& cmd, texassoc::ReportConfig& report) {
  const std::map<std::string, ReportFormat> formats{
      {"markdown", ReportFormat::Markdown}, {"csv", ReportFormat::Csv}, {"json", ReportFormat::Json}};
  const std::map<std::string, LabelStyle> styles{{"underscore", LabelStyle::Underscore},
                                                 {"space", LabelStyle::Space}};
  cmd.add_option("--format", report.format, "Report format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case))
      ->default_str("markdown");
  cmd.add_option("--decimals", report.decimals, "Decimal places for effects (half-to-even)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--label-style", report.label_style, "Object label rendering")
      ->transform(CLI::CheckedTransformer(styles, CLI::ignore_case))
      ->default_str("underscore");
}

void add_pipeline_options(CLI::App& cmd, texassoc::RunConfig& cfg, Normalization& norm, bool with_inference) {
  cmd.add_option("--dataset", cfg.dataset_root, "Texture corpus root (<root>/<class>/<images>)");
  cmd.add_option("--manifest", cfg.manifest_path, "Object label manifest, one label per line");
  cmd.add_option("--threads", cfg.threads, "Worker threads")
      ->envname("TEXASSOC_THREADS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--top-k", cfg.top_k, "Associations per texture")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--strong-threshold", cfg.strong_threshold, "Effect size counted as strongly present")
      ->capture_default_str();
  cmd.add_option("--expectations", cfg.expectation_map_path, "Expectation map (JSON) for the taxonomy report");
  cmd.add_option("--out", cfg.report_out, "Association table output (default: stdout)");
  cmd.add_option("--taxonomy-out", cfg.taxonomy_out, "Taxonomy report output (default: stdout)");
  cmd.add_option("--matrix-csv", cfg.matrix_csv, "Write the full effect-size matrix as CSV");
  add_report_options(cmd, cfg.report);

  if (!with_inference) return;
  const std::map<std::string, BackendKind> kinds{{"onnx", BackendKind::OnnxFile}, {"stub", BackendKind::Stub}};
  const std::map<std::string, ResizeMode> modes{{"square", ResizeMode::Square},
                                                {"shortest-side", ResizeMode::ShortestSide}};
  cmd.add_option("--model", cfg.model_path, "ONNX classifier, input (N,3,224,224), output (N,O)");
  cmd.add_option("--backend", cfg.backend_kind, "Inference backend")
      ->transform(CLI::CheckedTransformer(kinds, CLI::ignore_case))
      ->default_str("onnx");
  cmd.add_option("--batch-size", cfg.batch_size, "Inference batch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--resize-mode", cfg.resize_mode, "Resize before the 224 center crop")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case))
      ->default_str("square");
  cmd.add_option("--mean", norm.mean, "Per-channel normalization mean (R G B)")->expected(3);
  cmd.add_option("--std", norm.stddev, "Per-channel normalization std (R G B)")->expected(3);
  cmd.add_option("--log", cfg.log_out, "Write per-sample predictions as JSON Lines");
  cmd.add_flag("--quiet", cfg.quiet, "No progress output on stderr");
}

void apply_normalization(texassoc::RunConfig& cfg, const Normalization& norm) {
  for (std::size_t c = 0; c < 3; ++c) {
    cfg.normalization.mean[c] = norm.mean[c];
    cfg.normalization.stddev[c] = norm.stddev[c];
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Texture-object association audit for ImageNet classifiers"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags take precedence");

  texassoc::RunConfig run_cfg;
  run_cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  Normalization norm;

  auto* run = app.add_subcommand("run", "Classify a texture corpus and report texture-object associations");
  add_pipeline_options(*run, run_cfg, norm, true);
  run->add_option("--from-log", run_cfg.from_log, "Recompute statistics from a prediction log instead");

  texassoc::RunConfig stats_cfg = run_cfg;
  auto* stats = app.add_subcommand("stats", "Recompute the report from a prediction log (no model)");
  add_pipeline_options(*stats, stats_cfg, norm, false);
  stats->add_option("--from-log", stats_cfg.from_log, "Prediction log (JSON Lines)")->required();

  texassoc::RunConfig validate_cfg = run_cfg;
  auto* validate = app.add_subcommand("validate", "Check model, manifest, corpus and expectation map");
  add_pipeline_options(*validate, validate_cfg, norm, true);

  texassoc::ReportCommandConfig report_cfg;
  auto* report = app.add_subcommand("report", "Re-render a JSON report in another format");
  report->add_option("input", report_cfg.input, "JSON report produced with --format json")->required();
  const std::map<std::string, texassoc::ReportKind> kinds{{"auto", texassoc::ReportKind::Auto},
                                                          {"associations", texassoc::ReportKind::Associations},
                                                          {"taxonomy", texassoc::ReportKind::Taxonomy}};
  report->add_option("--kind", report_cfg.kind, "Report contents")
      ->transform(CLI::CheckedTransformer(kinds, CLI::ignore_case))
      ->default_str("auto");
  report->add_option("--out", report_cfg.out, "Output file (default: stdout)");
  add_report_options(*report, report_cfg.report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? texassoc::kExitOk : texassoc::kExitUsage;
  }

  try {
    if (*run) {
      apply_normalization(run_cfg, norm);
      return texassoc::cmd_run(run_cfg, std::cout, std::cerr);
    }
    if (*stats) return texassoc::cmd_stats(stats_cfg, std::cout, std::cerr);
    if (*validate) {
      apply_normalization(validate_cfg, norm);
      return texassoc::cmd_validate(validate_cfg, std::cout, std::cerr);
    }
    if (*report) return texassoc::cmd_report(report_cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "texassoc: error: " << e.what() << "\n";
    return texassoc::kExitFailure;
  }
  return texassoc::kExitUsage;
}

// gcpls — grammar-compressed sparse matrices with PLS training on the
// compressed form. Subcommands: compress, train, predict, extract, stats,
// eval. Reports go to stdout (human text plus key=value lines), logs to
// stderr. Exit codes: 0 ok, 2 input/validation error, 3 I/O error,
// 4 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gcpls/ingest.hpp"
#include "gcpls/metrics.hpp"
#include "gcpls/pls.hpp"
#include "gcpls/repair.hpp"

namespace {

using namespace gcpls;

namespace fs = std::filesystem;

void log_line(const std::string& msg) { std::cerr << "[gcpls] " << msg << "\n"; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// temp file + rename; never leaves a partial output behind
void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw IoError("write to '" + tmp + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

std::uint64_t file_bytes(const std::string& path) {
  std::error_code ec;
  auto s = fs::file_size(path, ec);
  return ec ? 0 : static_cast<std::uint64_t>(s);
}

FingerprintMatrix parse_reporting(const std::string& path,
                                  std::optional<std::uint32_t> expected_dim = {}) {
  FingerprintMatrix m = parse_sparse_file(path, expected_dim);
  if (m.labels_remapped)
    log_line("note: {0,1} labels in '" + path + "' remapped to {-1,+1}");
  return m;
}

struct Options {
  // global
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed = 0;
  // paths
  std::string input, data, output;
  // compressor
  CompressorConfig compressor;
  // fit
  FitConfig fit;
  Task task = Task::kClassification;
  // extract: -1 means "use the rankings stored in the model"
  int top_features = -1;
};

void print_stats_report(const CompressedMatrix& cm) {
  const CompressionStats s = compute_stats(cm);
  std::cout << "matrix: " << s.n << " rows, " << s.d << " columns, " << s.nnz
            << " nonzeros\n"
            << "grammar: " << s.num_rules << " rules, " << s.compressed_symbols
            << " compressed symbols\n"
            << "size vs raw 32-bit positions: " << fmt6(100.0 * s.ratio_vs_raw32())
            << "%\n";
  std::cout << "n=" << s.n << "\n"
            << "d=" << s.d << "\n"
            << "nnz=" << s.nnz << "\n"
            << "rules=" << s.num_rules << "\n"
            << "compressed_symbols=" << s.compressed_symbols << "\n"
            << "ratio_vs_raw32=" << fmt6(s.ratio_vs_raw32()) << "\n";
}

int run_compress(const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  FingerprintMatrix m = parse_reporting(opt.input);
  CompressedMatrix cm = compress(m, opt.compressor);
  save_gcmx(cm, opt.output);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  print_stats_report(cm);
  std::cout << "input_bytes=" << file_bytes(opt.input) << "\n"
            << "output_bytes=" << file_bytes(opt.output) << "\n"
            << "elapsed_sec=" << fmt6(elapsed) << "\n";
  return 0;
}

int run_stats(const Options& opt) {
  CompressedMatrix cm = load_gcmx(opt.input);
  print_stats_report(cm);
  std::cout << "file_bytes=" << file_bytes(opt.input) << "\n";
  return 0;
}

int run_train(const Options& opt) {
  CompressedMatrix cm = load_gcmx(opt.input);
  FingerprintMatrix data = parse_reporting(opt.data, cm.d);
  if (data.labels.size() != cm.n)
    throw std::invalid_argument("label count " + std::to_string(data.labels.size()) +
                                " does not match matrix rows " + std::to_string(cm.n));

  PlsModel model = cpls_fit(cm, data.labels, opt.fit, nullptr,
                            TmatvecStrategy::kRowScan, opt.threads);
  if (model.truncated)
    log_line("warning: fit truncated at " + std::to_string(model.components) + " of " +
             std::to_string(opt.fit.components) + " components");
  save_model(model, opt.output);

  std::vector<double> scores;
  scores.reserve(data.rows.size());
  for (const auto& row : data.rows) scores.push_back(predict(model, row));
  const EvalResult metric = evaluate(scores, data.labels, opt.task);
  const char* name = opt.task == Task::kClassification ? "auc" : "pcc";

  std::cout << "trained " << model.components << " components on " << cm.n << " x "
            << cm.d << " matrix; in-sample " << name << " = " << fmt6(metric.value)
            << "\n";
  std::cout << "components=" << model.components << "\n"
            << "truncated=" << (model.truncated ? 1 : 0) << "\n"
            << "y_mean=" << fmt(model.y_mean) << "\n"
            << name << "=" << fmt6(metric.value) << "\n"
            << "metric_degenerate=" << (metric.degenerate ? 1 : 0) << "\n"
            << "model_bytes=" << file_bytes(opt.output) << "\n";
  return 0;
}

int run_predict(const Options& opt) {
  PlsModel model = load_model(opt.input);
  FingerprintMatrix data = parse_reporting(opt.data, model.dim);
  std::string content;
  for (const auto& row : data.rows) {
    const double score = predict(model, row);
    content += fmt(score);
    if (opt.task == Task::kClassification)
      content += score >= 0.0 ? " 1" : " -1";
    content += '\n';
  }
  write_text_atomic(opt.output, content);
  std::cout << "predicted " << data.rows.size() << " samples\n";
  std::cout << "n=" << data.rows.size() << "\n"
            << "output_bytes=" << file_bytes(opt.output) << "\n";
  return 0;
}

int run_extract(const Options& opt) {
  PlsModel model = load_model(opt.input);
  std::vector<std::vector<FeatureWeight>> rankings =
      opt.top_features < 0
          ? model.feature_rankings
          : extract_features(model.weights, static_cast<std::size_t>(opt.top_features));

  std::ostringstream out;
  for (std::size_t c = 0; c < rankings.size(); ++c) {
    out << "component " << (c + 1) << "\n";
    for (std::size_t r = 0; r < rankings[c].size(); ++r)
      out << "  " << (r + 1) << "\t" << rankings[c][r].feature << "\t"
          << fmt(rankings[c][r].weight) << "\n";
  }
  for (std::size_t c = 0; c < rankings.size(); ++c)
    for (std::size_t r = 0; r < rankings[c].size(); ++r)
      out << "ranking." << (c + 1) << "." << (r + 1) << "=" << rankings[c][r].feature
          << ":" << fmt(rankings[c][r].weight) << "\n";

  if (opt.output.empty())
    std::cout << out.str();
  else
    write_text_atomic(opt.output, out.str());
  return 0;
}

int run_eval(const Options& opt) {
  std::ifstream in(opt.input);
  if (!in) throw IoError("cannot open '" + opt.input + "' for reading");
  std::vector<double> scores;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    double v;
    if (!(ls >> v)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParseError(lineno, "malformed prediction line");
    }
    scores.push_back(v);
  }
  FingerprintMatrix data = parse_reporting(opt.data);
  if (scores.size() != data.labels.size())
    throw std::invalid_argument("prediction count " + std::to_string(scores.size()) +
                                " does not match sample count " +
                                std::to_string(data.labels.size()));
  const EvalResult metric = evaluate(scores, data.labels, opt.task);
  const char* name = opt.task == Task::kClassification ? "auc" : "pcc";
  std::cout << name << " over " << scores.size() << " samples = " << fmt6(metric.value)
            << "\n";
  std::cout << name << "=" << fmt6(metric.value) << "\n"
            << "metric_degenerate=" << (metric.degenerate ? 1 : 0) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grammar-compressed sparse data matrices with PLS on the compressed form"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--threads", opt.threads, "worker threads for matrix products")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed, "seed recorded for reproducibility");

  const std::map<std::string, CounterMode> counter_names{
      {"exact", CounterMode::kExact},
      {"lossy", CounterMode::kLossy},
      {"freq", CounterMode::kFreq}};
  const std::map<std::string, Task> task_names{{"clf", Task::kClassification},
                                               {"reg", Task::kRegression}};

  auto* compress_cmd = app.add_subcommand("compress", "compress a sparse text file to GCMX1");
  compress_cmd->add_option("input", opt.input, "sparse text file")->required();
  compress_cmd->add_option("--output", opt.output, "GCMX1 output path")->required();
  compress_cmd->add_option("--topk", opt.compressor.topk, "pairs replaced per pass")
      ->check(CLI::PositiveNumber);
  compress_cmd
      ->add_option("--counter", opt.compressor.mode, "pair counter mode")
      ->transform(CLI::CheckedTransformer(counter_names, CLI::ignore_case));
  compress_cmd->add_option("--ell", opt.compressor.interval_length,
                           "lossy counting interval length");
  compress_cmd->add_option("--capacity", opt.compressor.capacity,
                           "freq counting table capacity");
  compress_cmd->add_option("--vacancy", opt.compressor.vacancy_percent,
                           "freq counting vacancy rate (percent)");

  auto* train_cmd = app.add_subcommand("train", "fit PLS on a compressed matrix");
  train_cmd->add_option("matrix", opt.input, "GCMX1 file")->required();
  train_cmd->add_option("data", opt.data, "sparse text file carrying the labels")
      ->required();
  train_cmd->add_option("--output", opt.output, "GCPM1 model output path")->required();
  train_cmd->add_option("--components", opt.fit.components, "latent components m")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--top-features", opt.fit.top_features,
                        "features ranked per component");
  train_cmd->add_option("--tolerance", opt.fit.norm_tolerance,
                        "degenerate latent vector threshold");
  train_cmd->add_option("--task", opt.task, "classification or regression")
      ->transform(CLI::CheckedTransformer(task_names, CLI::ignore_case));

  auto* predict_cmd = app.add_subcommand("predict", "score samples with a model");
  predict_cmd->add_option("model", opt.input, "GCPM1 file")->required();
  predict_cmd->add_option("data", opt.data, "sparse text file")->required();
  predict_cmd->add_option("--output", opt.output, "predictions output path")->required();
  predict_cmd->add_option("--task", opt.task, "classification adds a thresholded label")
      ->transform(CLI::CheckedTransformer(task_names, CLI::ignore_case));

  auto* extract_cmd = app.add_subcommand("extract", "per-component feature rankings");
  extract_cmd->add_option("model", opt.input, "GCPM1 file")->required();
  extract_cmd->add_option("--top-features", opt.top_features,
                          "features per component (default: as stored)");
  extract_cmd->add_option("--output", opt.output, "write the table here instead of stdout");

  auto* stats_cmd = app.add_subcommand("stats", "report compressed matrix statistics");
  stats_cmd->add_option("matrix", opt.input, "GCMX1 file")->required();

  auto* eval_cmd = app.add_subcommand("eval", "score a predictions file against labels");
  eval_cmd->add_option("predictions", opt.input, "one score per line")->required();
  eval_cmd->add_option("data", opt.data, "sparse text file carrying the labels")
      ->required();
  eval_cmd->add_option("--task", opt.task, "classification or regression")
      ->transform(CLI::CheckedTransformer(task_names, CLI::ignore_case));

  for (auto* sub : {compress_cmd, train_cmd, predict_cmd, extract_cmd, stats_cmd, eval_cmd})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (compress_cmd->parsed()) return run_compress(opt);
    if (train_cmd->parsed()) return run_train(opt);
    if (predict_cmd->parsed()) return run_predict(opt);
    if (extract_cmd->parsed()) return run_extract(opt);
    if (stats_cmd->parsed()) return run_stats(opt);
    if (eval_cmd->parsed()) return run_eval(opt);
  } catch (const ParseError& e) {
    log_line(std::string("error: ") + e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    log_line(std::string("error: ") + e.what());
    return 2;
  } catch (const std::out_of_range& e) {
    log_line(std::string("error: ") + e.what());
    return 2;
  } catch (const IoError& e) {
    log_line(std::string("i/o error: ") + e.what());
    return 3;
  } catch (const NumericError& e) {
    log_line(std::string("numerical error: ") + e.what());
    return 4;
  }
  return 0;
}

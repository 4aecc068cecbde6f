// factguard: synthesize and evaluate long-context QA benchmarks with
// answerable and unanswerable questions.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "factguard/config.hpp"
#include "factguard/corpus.hpp"
#include "factguard/dataset.hpp"
#include "factguard/errors.hpp"
#include "factguard/eval.hpp"
#include "factguard/io.hpp"
#include "factguard/pipeline.hpp"

namespace fs = std::filesystem;
using namespace factguard;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kRuntime = 2, kValidation = 3 };

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) {
  g_interrupted.store(true);
  // A second Ctrl-C kills the process outright.
  std::signal(SIGINT, SIG_DFL);
}

struct Globals {
  ConfigFlags flags;
  std::string mock_script;
  std::string log_level = "info";
};

RunConfig load_config(const Globals& g) {
  auto cfg = resolve_config(g.flags);
  if (!g.mock_script.empty()) {
    cfg.mock_script = fs::absolute(g.mock_script).lexically_normal();
    if (!fs::is_regular_file(cfg.mock_script))
      throw ConfigError("--mock-script: file not found: " + cfg.mock_script.string());
  }
  return cfg;
}

void write_resolved_config(const RunConfig& cfg) {
  io::write_file_atomic(cfg.output_dir / "resolved_config.json", to_json(cfg).dump(2) + "\n");
}

void write_partial_marker(const RunConfig& cfg, const std::string& what) {
  io::write_file_atomic(cfg.output_dir / "PARTIAL",
                        "interrupted: " + what + " are incomplete; rerun to regenerate them\n");
  spdlog::warn("interrupted; partial outputs marked in {}", (cfg.output_dir / "PARTIAL").string());
}

std::vector<Document> load_corpus(RunConfig& cfg, const std::string& corpus, const std::string& format) {
  if (!corpus.empty()) cfg.corpus_path = fs::absolute(corpus).lexically_normal();
  if (format == "jsonl") cfg.corpus_format = CorpusFormat::line_delimited_records;
  else if (format == "directory") cfg.corpus_format = CorpusFormat::plain_text_directory;
  else if (!format.empty()) throw ConfigError("--format must be directory or jsonl");
  if (cfg.corpus_path.empty()) throw ConfigError("no corpus given (use --corpus or corpus.path in the config)");
  return load_documents(cfg.corpus_path, cfg.corpus_format, cfg.load);
}

std::string render_funnel(const AttritionReport& report) {
  const auto f = funnel(report);
  std::ostringstream out;
  out << std::left << std::setw(22) << "stage" << std::right << std::setw(8) << "input" << std::setw(8) << "kept"
      << std::setw(10) << "dropped" << std::setw(12) << "retention" << "\n";
  for (std::size_t i = 0; i < kStageCount; ++i) {
    const auto& s = report.stages[i];
    const auto& r = f.stages[i];
    out << std::left << std::setw(22) << to_string(r.stage) << std::right << std::setw(8) << s.input << std::setw(8)
        << s.kept << std::setw(10) << s.total_dropped() << std::setw(11) << std::fixed << std::setprecision(2)
        << 100.0 * r.retention << "%";
    if (r.zero_input) out << "  (no input)";
    if (r.excluded > 0) out << "  (" << r.excluded << " review_error excluded)";
    out << "\n";
    for (const auto& [reason, n] : s.dropped) {
      if (n > 0) out << "    " << std::left << std::setw(30) << to_string(reason) << std::right << n << "\n";
    }
  }
  out << "overall retention: " << std::fixed << std::setprecision(2) << 100.0 * f.overall << "%\n";
  return out.str();
}

const std::vector<std::string_view> kSynthesisRoles{roles::quality,         roles::topics,       roles::qa_generate,
                                                    roles::qa_judge,        roles::rewrite,      roles::gold_writer,
                                                    roles::review_conflict, roles::review_common_sense};

int cmd_ingest(const Globals& g, const std::string& corpus, const std::string& format) {
  auto cfg = load_config(g);
  const auto docs = load_corpus(cfg, corpus, format);
  std::string out;
  std::map<LengthBucket, std::size_t> buckets;
  std::size_t tokens = 0;
  for (const auto& d : docs) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["language"] = to_string(d.language);
    j["domain"] = to_string(d.domain);
    j["token_count"] = d.token_count;
    j["text"] = d.text;
    out += j.dump() + "\n";
    ++buckets[length_bucket(d.token_count)];
    tokens += d.token_count;
  }
  io::write_file_atomic(cfg.output_dir / "corpus.jsonl", out);
  write_resolved_config(cfg);
  std::cout << docs.size() << " documents, " << tokens << " tokens\n";
  for (auto b : all_length_buckets()) std::cout << "  " << std::left << std::setw(8) << to_string(b) << buckets[b] << "\n";
  return kOk;
}

int cmd_synthesize(const Globals& g, const std::string& corpus, const std::string& format) {
  auto cfg = load_config(g);
  const auto docs = load_corpus(cfg, corpus, format);
  const auto agents = build_agents(cfg, kSynthesisRoles);
  write_resolved_config(cfg);
  const auto result = run(docs, cfg.synthesis, agents, &g_interrupted);
  write_examples(result.examples, cfg.output_dir / "examples.jsonl");
  io::write_file_atomic(cfg.output_dir / "attrition.jsonl", result.report.to_jsonl());
  std::cerr << render_funnel(result.report);
  std::size_t counts[kLabelCount] = {};
  for (const auto& ex : result.examples) ++counts[static_cast<std::size_t>(ex.label)];
  std::cout << result.examples.size() << " examples (answerable " << counts[0] << ", lack_of_evidence " << counts[1]
            << ", misleading " << counts[2] << ") written to " << (cfg.output_dir / "examples.jsonl").string() << "\n";
  if (result.documents_skipped > 0) std::cout << result.documents_skipped << " documents skipped\n";
  if (result.interrupted) {
    write_partial_marker(cfg, "examples.jsonl and attrition.jsonl");
    return kRuntime;
  }
  return kOk;
}

int cmd_stats(const Globals& g, const std::string& examples_path, bool by_split) {
  const auto cfg = load_config(g);
  const auto examples = read_examples(examples_path);
  std::vector<std::pair<std::string, StatsReport>> reports;
  if (by_split && !examples.empty()) {
    const auto split = assign_splits(examples, cfg.splits, cfg.seed);
    for (auto s : all_splits()) reports.emplace_back(std::string(to_string(s)), compute_stats(split.select(examples, s)));
  }
  reports.emplace_back("total", compute_stats(examples));
  for (const auto& [_, r] : reports) r.validate();
  const auto text = render_stats_text(reports);
  io::write_file_atomic(cfg.output_dir / "stats.txt", text);
  io::write_file_atomic(cfg.output_dir / "stats.json", stats_to_json(reports).dump(2) + "\n");
  std::cout << text;
  return kOk;
}

int cmd_sample_review(const Globals& g, const std::string& examples_path, std::size_t k) {
  const auto cfg = load_config(g);
  const auto examples = read_examples(examples_path);
  const auto rows = sample_for_manual_review(examples, k, cfg.seed);
  const auto path = cfg.output_dir / "review_sheet.tsv";
  io::write_file_atomic(path, render_review_sheet(rows));
  std::cout << rows.size() << " rows written to " << path.string() << "\n";
  return kOk;
}

int cmd_predict(const Globals& g, const std::string& examples_path) {
  const auto cfg = load_config(g);
  const auto examples = read_examples(examples_path);
  const auto agents = build_agents(cfg, {roles::candidate});
  write_resolved_config(cfg);
  const auto predictions = run_candidate(examples, agents, cfg.eval, &g_interrupted);
  io::write_file_atomic(cfg.output_dir / "predictions.jsonl", predictions_to_jsonl(predictions));
  std::size_t failed = 0;
  for (const auto& p : predictions) failed += (p.transport_failed || p.context_overflow) ? 1 : 0;
  std::cout << predictions.size() << " predictions (" << failed << " flagged)\n";
  if (predictions.size() < examples.size()) {
    write_partial_marker(cfg, "predictions.jsonl");
    return kRuntime;
  }
  return kOk;
}

EvalOptions task_options(const RunConfig& cfg, const std::string& task) {
  auto options = cfg.eval;
  if (task == "1") {
    options.task2 = false;
  } else if (task == "2") {
    options.task1 = false;
  } else if (task != "both") {
    throw ConfigError("--task must be 1, 2 or both");
  }
  return options;
}

int cmd_evaluate(const Globals& g, const std::string& examples_path, const std::string& predictions_path,
                 const std::string& task) {
  const auto cfg = load_config(g);
  const auto options = task_options(cfg, task);
  const auto examples = read_examples(examples_path);
  std::vector<std::string_view> needed;
  if (predictions_path.empty()) needed.push_back(roles::candidate);
  if (options.task1) needed.push_back(roles::judge_task1);
  if (options.task2) needed.push_back(roles::judge_task2);
  std::vector<Prediction> predictions;
  if (!predictions_path.empty()) {
    predictions = parse_predictions(io::read_file(predictions_path));
    const auto mismatch = check_prediction_ids(examples, predictions);
    if (!mismatch.ok()) {
      std::cerr << "error: predictions do not match the examples\n" << mismatch.describe();
      return kValidation;
    }
  }
  const auto agents = build_agents(cfg, needed);
  write_resolved_config(cfg);
  if (predictions_path.empty()) {
    predictions = run_candidate(examples, agents, options, &g_interrupted);
    io::write_file_atomic(cfg.output_dir / "predictions.jsonl", predictions_to_jsonl(predictions));
    if (predictions.size() < examples.size()) {
      write_partial_marker(cfg, "predictions.jsonl");
      return kRuntime;
    }
  }
  const auto judgments = judge_all(examples, predictions, agents, options, &g_interrupted);
  io::write_file_atomic(cfg.output_dir / "judgments.jsonl", judgments_to_jsonl(judgments));
  if (g_interrupted.load()) {
    write_partial_marker(cfg, "judgments.jsonl");
    return kRuntime;
  }
  const auto report = aggregate(judgments, examples, options);
  const auto text = render_eval_text(report);
  io::write_file_atomic(cfg.output_dir / "eval_report.txt", text);
  io::write_file_atomic(cfg.output_dir / "eval_report.json", eval_to_json(report).dump(2) + "\n");
  std::cout << text;
  return kOk;
}

int cmd_report(const Globals& g, const std::string& attrition, const std::string& examples_path,
               const std::string& judgments_path, const std::string& task) {
  if (attrition.empty() && judgments_path.empty())
    throw ConfigError("report needs --attrition and/or --examples with --judgments");
  const auto cfg = load_config(g);
  if (!attrition.empty()) {
    const auto report = AttritionReport::from_jsonl(io::read_file(attrition));
    std::cout << render_funnel(report);
  }
  if (!judgments_path.empty()) {
    if (examples_path.empty()) throw ConfigError("--judgments needs --examples");
    const auto options = task_options(cfg, task);
    const auto examples = read_examples(examples_path);
    const auto judgments = parse_judgments(io::read_file(judgments_path));
    if (!attrition.empty()) std::cout << "\n";
    std::cout << render_eval_text(aggregate(judgments, examples, options));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize and evaluate long-context QA benchmarks with unanswerable questions."};
  app.require_subcommand(1);
  Globals g;
  std::string config_file;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  app.add_option("--config", config_file, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_flag("--mock", g.flags.mock, "Use the deterministic offline backend for every role");
  app.add_option("--mock-script", g.mock_script, "Scripted replies for the mock backend");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for sampling, splits and the mock backend");
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output directory");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");

  std::string corpus;
  std::string format;
  auto* ingest = app.add_subcommand("ingest", "Load a corpus and write normalized document records");
  ingest->add_option("--corpus", corpus, "Corpus directory or record file");
  ingest->add_option("--format", format, "directory or jsonl");

  auto* synth = app.add_subcommand("synthesize", "Run the synthesis pipeline");
  synth->add_option("--corpus", corpus, "Corpus directory or record file");
  synth->add_option("--format", format, "directory or jsonl");

  std::string examples;
  bool by_split = false;
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  stats->add_option("examples", examples, "Example file")->required();
  stats->add_flag("--by-split", by_split, "Break down by train/development/test split");

  std::size_t k = 144;
  auto* sample = app.add_subcommand("sample-review", "Export a manual review sheet");
  sample->add_option("examples", examples, "Example file")->required();
  sample->add_option("-k,--count", k, "Rows to sample");

  auto* predict = app.add_subcommand("predict", "Run the candidate model over examples");
  predict->add_option("examples", examples, "Example file")->required();

  std::string predictions;
  std::string task = "both";
  auto* evaluate = app.add_subcommand("evaluate", "Judge predictions and report accuracy");
  evaluate->add_option("examples", examples, "Example file")->required();
  evaluate->add_option("--predictions", predictions, "Prediction file (otherwise the candidate role is run)");
  evaluate->add_option("--task", task, "1, 2 or both");

  std::string attrition;
  std::string judgments;
  auto* report = app.add_subcommand("report", "Render funnel and evaluation reports from saved files");
  report->add_option("--attrition", attrition, "Attrition file");
  report->add_option("--examples", examples, "Example file");
  report->add_option("--judgments", judgments, "Judgment file");
  report->add_option("--task", task, "1, 2 or both");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  auto logger = spdlog::stderr_logger_mt("factguard");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  if (!config_file.empty()) g.flags.config_file = config_file;
  if (*seed_opt) g.flags.seed = seed;
  if (*workers_opt) g.flags.workers = workers;
  if (!out.empty()) g.flags.out = out;
  std::signal(SIGINT, on_sigint);

  try {
    if (*ingest) return cmd_ingest(g, corpus, format);
    if (*synth) return cmd_synthesize(g, corpus, format);
    if (*stats) return cmd_stats(g, examples, by_split);
    if (*sample) return cmd_sample_review(g, examples, k);
    if (*predict) return cmd_predict(g, examples);
    if (*evaluate) return cmd_evaluate(g, examples, predictions, task);
    if (*report) return cmd_report(g, attrition, examples, judgments, task);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kConfig;
}

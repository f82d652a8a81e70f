// regtool: synth / run / predict front end over the C library interface.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reg/c_api.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

struct CorpusDeleter {
  void operator()(reg_corpus* p) const { reg_corpus_free(p); }
};
struct ModelDeleter {
  void operator()(reg_model* p) const { reg_model_free(p); }
};
struct RunDeleter {
  void operator()(reg_run* p) const { reg_run_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { reg_string_free(p); }
};
using CorpusPtr = std::unique_ptr<reg_corpus, CorpusDeleter>;
using ModelPtr = std::unique_ptr<reg_model, ModelDeleter>;
using RunPtr = std::unique_ptr<reg_run, RunDeleter>;
using OwnedString = std::unique_ptr<char, StringDeleter>;

// Thrown to leave a command with a given exit code; the message is printed.
struct Exit {
  int code;
  std::string message;
};

[[noreturn]] void die(int code, const std::string& message) { throw Exit{code, message}; }

[[noreturn]] void die_status(reg_status s, const std::string& what, bool input_is_config) {
  int code = kRuntime;
  if (s == REG_E_INVALID_ARGUMENT) code = kUsage;
  if (input_is_config && (s == REG_E_PARSE || s == REG_E_VALIDATION)) code = kUsage;
  die(code, what + ": " + reg_status_name(s) + ": " + reg_last_error());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die(kUsage, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) die(kRuntime, "cannot write '" + path.string() + "'");
  out << text;
  if (!out.flush()) die(kRuntime, "write failed for '" + path.string() + "'");
}

std::string take(char* s) {
  OwnedString owned(s);
  return owned ? std::string(owned.get()) : std::string();
}

CorpusPtr load_corpus_file(const std::string& path) {
  const std::string text = read_file(path);
  reg_corpus* c = nullptr;
  if (auto s = reg_corpus_from_json(text.c_str(), &c); s != REG_OK) {
    die_status(s, "corpus '" + path + "'", true);
  }
  return CorpusPtr(c);
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::uint64_t seed = 42;
  std::string out;
};

void print_summary(const std::string& summary_json) {
  const json s = json::parse(summary_json);
  std::cout << "speakers: " << s["speakers"].get<int>() << "\n";
  if (s.contains("generating_categories")) {
    for (const auto& [name, n] : s["generating_categories"].items()) {
      std::cout << "  " << name << ": " << n.get<int>() << "\n";
    }
  }
  std::cout << "trials: " << s["trials"].get<int>() << "\n";
  std::cout << "reference types:\n";
  for (const auto& [name, n] : s["reference_types"].items()) {
    std::cout << "  " << name << ": " << n.get<int>() << "\n";
  }
}

int cmd_synth(const SynthArgs& a) {
  const std::string config = read_file(a.config);
  reg_corpus* raw = nullptr;
  if (auto s = reg_corpus_synthesize(config.c_str(), a.seed, &raw); s != REG_OK) {
    die_status(s, "synth", true);
  }
  CorpusPtr corpus(raw);
  char* text = nullptr;
  if (auto s = reg_corpus_to_json(corpus.get(), &text); s != REG_OK) die_status(s, "synth", false);
  write_file(a.out, take(text));
  char* summary = nullptr;
  if (auto s = reg_corpus_summary(corpus.get(), &summary); s != REG_OK) {
    die_status(s, "synth", false);
  }
  std::cout << "wrote " << a.out << "\n";
  print_summary(take(summary));
  return kOk;
}

// --- run -------------------------------------------------------------------

struct RunArgs {
  std::string corpus;
  std::vector<std::string> methods;
  int folds = 6;
  std::uint64_t seed = 42;
  double tau = 1.0;
  bool oracle_profiles = false;
  bool allow_sparse = false;
  std::vector<double> grid_c;
  std::vector<double> grid_gamma;
  std::string out_dir = "out";
  bool keep_models = false;
  unsigned jobs = 1;
};

int cmd_run(RunArgs a) {
  if (a.folds < 3) die(kUsage, "--folds must be at least 3 (one test, one validation, one training fold)");
  if (!(a.tau > 0.0 && a.tau <= 1.0)) die(kUsage, "--tau must lie in (0, 1]");
  if (a.jobs == 0) die(kUsage, "--jobs must be positive");
  if (a.methods.empty()) a.methods = {"speaker", "profile"};
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    if (a.methods[i] != "speaker" && a.methods[i] != "profile") {
      die(kUsage, "unknown method '" + a.methods[i] + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (a.methods[i] == a.methods[j]) die(kUsage, "method '" + a.methods[i] + "' given twice");
    }
  }

  CorpusPtr corpus = load_corpus_file(a.corpus);
  const fs::path out(a.out_dir);
  char* canonical = nullptr;
  if (auto s = reg_corpus_to_json(corpus.get(), &canonical); s != REG_OK) {
    die_status(s, "corpus", false);
  }
  write_file(out / "corpus.json", take(canonical));

  std::vector<RunPtr> runs;
  for (const auto& method : a.methods) {
    json options = {{"method", method},
                    {"folds", a.folds},
                    {"seed", a.seed},
                    {"tau", a.tau},
                    {"oracle_profiles", a.oracle_profiles},
                    {"allow_sparse", a.allow_sparse},
                    {"keep_models", a.keep_models},
                    {"jobs", a.jobs}};
    if (!a.grid_c.empty()) options["grid_c"] = a.grid_c;
    if (!a.grid_gamma.empty()) options["grid_gamma"] = a.grid_gamma;
    std::clog << "running " << method << " (k=" << a.folds << ", seed=" << a.seed << ")\n";
    reg_run* raw = nullptr;
    if (auto s = reg_experiment_run(corpus.get(), options.dump().c_str(), &raw); s != REG_OK) {
      die_status(s, "run " + method, false);
    }
    RunPtr run(raw);
    char* record = nullptr;
    if (auto s = reg_run_to_json(run.get(), &record); s != REG_OK) die_status(s, "run", false);
    write_file(out / "runs" / (method + ".json"), take(record));
    if (a.keep_models) {
      std::size_t n = 0;
      if (auto s = reg_run_model_count(run.get(), &n); s != REG_OK) die_status(s, "run", false);
      for (std::size_t i = 0; i < n; ++i) {
        char* name = nullptr;
        char* text = nullptr;
        if (auto s = reg_run_model_at(run.get(), i, &name, &text); s != REG_OK) {
          die_status(s, "run", false);
        }
        const std::string file = take(name) + ".json";
        write_file(out / "models" / method / file, take(text));
      }
    }
    runs.push_back(std::move(run));
  }

  std::vector<const reg_run*> handles;
  for (const auto& r : runs) handles.push_back(r.get());
  auto render = [&](reg_report_format format, const char* file) {
    char* text = nullptr;
    if (auto s = reg_report_render(handles.data(), nullptr, handles.size(), format, &text);
        s != REG_OK) {
      die_status(s, "report", false);
    }
    write_file(out / file, take(text));
  };
  render(REG_REPORT_MARKDOWN, "report.md");
  render(REG_REPORT_CSV, "report.csv");
  if (handles.size() == 2) render(REG_REPORT_SIGNIFICANCE, "significance.json");
  std::clog << "wrote results to " << out.string() << "\n";
  return kOk;
}

// --- predict ---------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string corpus;
  std::string trial;
  bool json_output = false;
};

int cmd_predict(const PredictArgs& a) {
  const std::string text = read_file(a.model);
  reg_model* raw = nullptr;
  if (auto s = reg_model_from_json(text.c_str(), &raw); s != REG_OK) {
    die(kRuntime, "model '" + a.model + "': " + reg_status_name(s) + ": " + reg_last_error());
  }
  ModelPtr model(raw);
  CorpusPtr corpus = load_corpus_file(a.corpus);
  char* out = nullptr;
  const auto format = a.json_output ? REG_DESCRIBE_JSON : REG_DESCRIBE_TEXT;
  if (auto s = reg_model_describe(model.get(), corpus.get(), a.trial.c_str(), format, &out);
      s != REG_OK) {
    if (s == REG_E_NOT_FOUND) die(kUsage, std::string("predict: ") + reg_last_error());
    die_status(s, "predict", false);
  }
  std::cout << take(out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speaker-dependent content selection for referring expressions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(reg_version()));

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("--config", synth.config, "Generator config (JSON)")->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth.out, "Output corpus path")->required();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Cross-validated experiment and report");
  run_cmd->add_option("--corpus", run.corpus, "Corpus document (JSON)")->required();
  run_cmd->add_option("--method", run.methods, "speaker or profile; repeatable (default both)");
  run_cmd->add_option("--folds", run.folds, "Number of folds k");
  run_cmd->add_option("--seed", run.seed, "Random seed");
  run_cmd->add_option("--tau", run.tau, "Profile threshold");
  run_cmd->add_flag("--oracle-profiles", run.oracle_profiles,
                    "Assign profiles using the test fold too");
  run_cmd->add_flag("--allow-sparse", run.allow_sparse,
                    "Admit speakers with fewer trials than folds");
  run_cmd->add_option("--grid-c", run.grid_c, "Override the C grid")->delimiter(',');
  run_cmd->add_option("--grid-gamma", run.grid_gamma, "Override the gamma grid")->delimiter(',');
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory");
  run_cmd->add_flag("--keep-models", run.keep_models, "Write every trained model");
  run_cmd->add_option("--jobs", run.jobs, "Worker threads for classifier training");

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "Describe one trial with a saved model");
  predict_cmd->add_option("--model", predict.model, "Model document (JSON)")->required();
  predict_cmd->add_option("--corpus", predict.corpus, "Corpus document (JSON)")->required();
  predict_cmd->add_option("--trial", predict.trial, "Trial id")->required();
  predict_cmd->add_flag("--json", predict.json_output, "Print JSON instead of text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth);
    if (*run_cmd) return cmd_run(run);
    if (*predict_cmd) return cmd_predict(predict);
  } catch (const Exit& e) {
    std::cerr << "regtool: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "regtool: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

#include "reg/c_api.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json_io.hpp"
#include "reg/corpus.hpp"
#include "reg/error.hpp"
#include "reg/evaluation.hpp"
#include "reg/regmodel.hpp"
#include "reg/synthetic.hpp"
#include "reg/training.hpp"

struct reg_corpus {
  std::shared_ptr<const reg::Corpus> corpus;
  std::map<std::string, reg::SpeakerProfile> generating;  // synthetic only
};

struct reg_model {
  reg::RegModel model;
};

struct reg_run {
  std::shared_ptr<const reg::Corpus> corpus;
  reg::ExperimentRun run;
};

namespace {

using reg::json_io::json;

thread_local std::string last_error;

reg_status status_of(reg::ErrorKind kind) {
  switch (kind) {
    case reg::ErrorKind::kInvalidArgument: return REG_E_INVALID_ARGUMENT;
    case reg::ErrorKind::kParse: return REG_E_PARSE;
    case reg::ErrorKind::kValidation: return REG_E_VALIDATION;
    case reg::ErrorKind::kProtocol: return REG_E_PROTOCOL;
    case reg::ErrorKind::kNotFound: return REG_E_NOT_FOUND;
    case reg::ErrorKind::kRuntime: return REG_E_RUNTIME;
  }
  return REG_E_INTERNAL;
}

template <typename Fn>
reg_status guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return REG_OK;
  } catch (const reg::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const json::exception& e) {
    last_error = e.what();
    return REG_E_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return REG_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return REG_E_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return REG_E_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) reg::fail(reg::ErrorKind::kInvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void write_text(const reg::DescriptionContent& c, const reg::Scene& scene,
                std::string_view entity, int level, std::ostringstream& out) {
  out << "level " << level << " " << entity << ":";
  if (c.attributes.empty()) out << " (no attributes)";
  bool first = true;
  for (const auto& [name, value] : c.attributes) {
    out << (first ? " " : ", ") << name << "=" << value;
    first = false;
  }
  out << "\n";
  if (!c.has_relation()) return;
  const auto lm = reg::referenced_landmark(scene, entity, c);
  out << "  " << c.relation_label() << " -> " << (lm ? *lm : "?") << "\n";
  write_text(c.landmark(), scene, lm ? *lm : "?", level + 1, out);
}

reg::ExperimentOptions parse_options(const char* text) {
  reg::ExperimentOptions o;
  if (!text || !*text) return o;
  const json j = reg::json_io::parse(text, "experiment options");
  const char* ctx = "experiment options";
  reg::json_io::expect_keys(j, ctx, {"method", "folds", "seed", "tau", "oracle_profiles",
                                     "allow_sparse", "grid_c", "grid_gamma",
                                     "include_speaker_ids", "keep_models", "jobs"});
  if (j.contains("method")) o.method = reg::parse_method(reg::json_io::string_field(j, "method", ctx));
  if (j.contains("folds")) o.k = static_cast<int>(reg::json_io::integer_field(j, "folds", ctx));
  if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("tau")) o.tau = reg::json_io::number_field(j, "tau", ctx);
  if (j.contains("oracle_profiles")) o.oracle_profiles = j.at("oracle_profiles").get<bool>();
  if (j.contains("allow_sparse")) o.allow_sparse = j.at("allow_sparse").get<bool>();
  if (j.contains("grid_c")) o.grid.C = j.at("grid_c").get<std::vector<double>>();
  if (j.contains("grid_gamma")) o.grid.gamma = j.at("grid_gamma").get<std::vector<double>>();
  if (j.contains("include_speaker_ids")) {
    o.include_speaker_ids = j.at("include_speaker_ids").get<bool>();
  }
  if (j.contains("keep_models")) o.keep_models = j.at("keep_models").get<bool>();
  if (j.contains("jobs")) o.jobs = j.at("jobs").get<unsigned>();
  if (o.grid.C.empty() || o.grid.gamma.empty()) {
    reg::fail(reg::ErrorKind::kInvalidArgument, "grid lists must be non-empty");
  }
  if (!(o.tau > 0.0 && o.tau <= 1.0)) {
    reg::fail(reg::ErrorKind::kInvalidArgument, "tau must lie in (0, 1]");
  }
  return o;
}

std::vector<std::pair<std::string, const reg::RegModel*>> kept_models(const reg_run& r) {
  std::vector<std::pair<std::string, const reg::RegModel*>> out;
  for (const auto& it : r.run.iterations) {
    for (const auto& m : it.models) {
      if (!m.model) continue;
      std::string name = "iter" + std::to_string(it.index) + "_" + m.name;
      for (char& c : name) {
        if (c == ':') c = '_';
      }
      out.emplace_back(std::move(name), &*m.model);
    }
  }
  return out;
}

}  // namespace

extern "C" {

const char* reg_version(void) { return "1.0.0"; }

const char* reg_last_error(void) { return last_error.c_str(); }

const char* reg_status_name(reg_status status) {
  switch (status) {
    case REG_OK: return "ok";
    case REG_E_INVALID_ARGUMENT: return "invalid argument";
    case REG_E_PARSE: return "parse error";
    case REG_E_VALIDATION: return "validation error";
    case REG_E_PROTOCOL: return "protocol violation";
    case REG_E_NOT_FOUND: return "not found";
    case REG_E_RUNTIME: return "runtime failure";
    case REG_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void reg_string_free(char* s) { std::free(s); }

reg_status reg_corpus_from_json(const char* text, reg_corpus** out) {
  return guard([&] {
    require(text, "json");
    require(out, "out");
    auto c = std::make_unique<reg_corpus>();
    c->corpus = std::make_shared<const reg::Corpus>(reg::load_corpus(text));
    *out = c.release();
  });
}

reg_status reg_corpus_synthesize(const char* config_json, uint64_t seed, reg_corpus** out) {
  return guard([&] {
    require(config_json, "config_json");
    require(out, "out");
    auto generated = reg::generate_synthetic(reg::parse_synthetic_config(config_json), seed);
    auto c = std::make_unique<reg_corpus>();
    c->corpus = std::make_shared<const reg::Corpus>(std::move(generated.corpus));
    c->generating = std::move(generated.profiles);
    *out = c.release();
  });
}

reg_status reg_corpus_to_json(const reg_corpus* corpus, char** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(out, "out");
    *out = dup(reg::save_corpus(*corpus->corpus));
  });
}

reg_status reg_corpus_summary(const reg_corpus* corpus, char** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(out, "out");
    const reg::Corpus& c = *corpus->corpus;
    json types = json::object();
    for (auto t : reg::kAllReferenceTypes) types[std::string(reg::to_string(t))] = 0;
    for (const auto& t : c.trials()) {
      const auto type = reg::classify_reference_type(c.scene_of(t), t.target, t.gold);
      types[std::string(reg::to_string(type))] = types[std::string(reg::to_string(type))].get<int>() + 1;
    }
    json doc = {{"speakers", c.speakers().size()},
                {"scenes", c.scenes().size()},
                {"trials", c.trials().size()},
                {"attributes", c.attributes()},
                {"relations", c.relations()},
                {"reference_types", types}};
    if (!corpus->generating.empty()) {
      json counts = json::object();
      for (auto p : reg::kAllProfiles) counts[std::string(reg::to_string(p))] = 0;
      json per = json::object();
      for (const auto& [id, p] : corpus->generating) {
        const std::string name(reg::to_string(p));
        counts[name] = counts[name].get<int>() + 1;
        per[id] = name;
      }
      doc["generating_categories"] = counts;
      doc["speaker_categories"] = per;
    }
    *out = dup(doc.dump(1) + "\n");
  });
}

void reg_corpus_free(reg_corpus* corpus) { delete corpus; }

reg_status reg_model_from_json(const char* text, reg_model** out) {
  return guard([&] {
    require(text, "json");
    require(out, "out");
    auto m = std::make_unique<reg_model>();
    m->model = reg::load_model(text);
    *out = m.release();
  });
}

reg_status reg_model_to_json(const reg_model* model, char** out) {
  return guard([&] {
    require(model, "model");
    require(out, "out");
    *out = dup(reg::save_model(model->model));
  });
}

reg_status reg_model_describe(const reg_model* model, const reg_corpus* corpus,
                              const char* trial_id, reg_describe_format format, char** out) {
  return guard([&] {
    require(model, "model");
    require(corpus, "corpus");
    require(trial_id, "trial_id");
    require(out, "out");
    const reg::Corpus& c = *corpus->corpus;
    const reg::Trial& t = c.trial(trial_id);
    const reg::Scene& scene = c.scene_of(t);
    const auto d = reg::get_description(model->model, scene, t.target, c.speaker(t.speaker));
    const auto type = reg::classify_reference_type(scene, t.target, d);
    if (format == REG_DESCRIBE_JSON) {
      json doc = {{"trial", t.id},
                  {"speaker", t.speaker},
                  {"target", t.target},
                  {"description", reg::json_io::content_to_json(d)},
                  {"reference_type", reg::to_string(type)}};
      *out = dup(doc.dump(1) + "\n");
      return;
    }
    std::ostringstream text;
    text << "trial " << t.id << " (speaker " << t.speaker << ", scene " << t.scene
         << ", target " << t.target << ")\n";
    write_text(d, scene, t.target, 1, text);
    text << "reference type: " << reg::to_string(type) << "\n";
    *out = dup(text.str());
  });
}

void reg_model_free(reg_model* model) { delete model; }

reg_status reg_experiment_run(const reg_corpus* corpus, const char* options_json,
                              reg_run** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(out, "out");
    const auto options = parse_options(options_json);
    auto r = std::make_unique<reg_run>();
    r->corpus = corpus->corpus;
    r->run = reg::run_experiment(*corpus->corpus, options);
    *out = r.release();
  });
}

reg_status reg_run_to_json(const reg_run* run, char** out) {
  return guard([&] {
    require(run, "run");
    require(out, "out");
    *out = dup(reg::save_run(run->run));
  });
}

reg_status reg_run_method(const reg_run* run, char** out) {
  return guard([&] {
    require(run, "run");
    require(out, "out");
    *out = dup(std::string(reg::to_string(run->run.method)));
  });
}

reg_status reg_run_model_count(const reg_run* run, size_t* out) {
  return guard([&] {
    require(run, "run");
    require(out, "out");
    *out = kept_models(*run).size();
  });
}

reg_status reg_run_model_at(const reg_run* run, size_t index, char** name, char** model_json) {
  return guard([&] {
    require(run, "run");
    require(name, "name");
    require(model_json, "model_json");
    const auto models = kept_models(*run);
    if (index >= models.size()) {
      reg::fail(reg::ErrorKind::kNotFound, "model index " + std::to_string(index) + " out of range");
    }
    std::string text = reg::save_model(*models[index].second);
    char* n = dup(models[index].first);
    try {
      *model_json = dup(text);
    } catch (...) {
      std::free(n);
      throw;
    }
    *name = n;
  });
}

reg_status reg_report_render(const reg_run* const* runs, const char* const* labels,
                             size_t count, reg_report_format format, char** out) {
  return guard([&] {
    require(runs, "runs");
    require(out, "out");
    if (count == 0) reg::fail(reg::ErrorKind::kInvalidArgument, "no runs to report");
    reg::LabeledReports reports;
    for (size_t i = 0; i < count; ++i) {
      require(runs[i], "run");
      std::string label = labels && labels[i] ? labels[i]
                                              : std::string(reg::to_string(runs[i]->run.method));
      reports.emplace_back(std::move(label), reg::evaluate_run(runs[i]->run, *runs[i]->corpus));
    }
    switch (format) {
      case REG_REPORT_MARKDOWN:
        *out = dup(reg::render_report(reports, reg::ReportFormat::kMarkdown));
        return;
      case REG_REPORT_CSV:
        *out = dup(reg::render_report(reports, reg::ReportFormat::kCsv));
        return;
      case REG_REPORT_SIGNIFICANCE: {
        if (count != 2) {
          reg::fail(reg::ErrorKind::kInvalidArgument, "significance needs exactly two runs");
        }
        const auto s = reg::compare_reports(reports[0].second, reports[1].second);
        *out = dup(reg::significance_json(s, reports[0].first, reports[1].first));
        return;
      }
    }
    reg::fail(reg::ErrorKind::kInvalidArgument, "unknown report format");
  });
}

void reg_run_free(reg_run* run) { delete run; }

}  // extern "C"

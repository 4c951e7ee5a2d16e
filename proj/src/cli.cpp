// Copyright 2026 The Polevent Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "polevent/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "polevent/error.hpp"
#include "polevent/evalharness.hpp"
#include "polevent/fsutil.hpp"
#include "polevent/prompt.hpp"
#include "polevent/text.hpp"

namespace polevent::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Key names that would carry a credential. Matched case-insensitively
// against every key of the config file, at any depth.
const std::set<std::string> kSecretKeys = {"api_key", "apikey", "token", "secret",
                                           "password", "bearer", "authorization",
                                           "access_token"};

void reject_secrets(const json& j, const std::string& where) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (kSecretKeys.contains(text::ascii_lower(key)))
        throw Error(ErrorKind::kConfig,
                    "config key " + where + "/" + key +
                        " looks like a credential; set the token in the environment instead");
      reject_secrets(value, where + "/" + key);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) reject_secrets(j[i], where + "/" + std::to_string(i));
  }
}

// Typed, allow-listed view over one config section.
class Section {
 public:
  Section(const json& root, const std::string& name, std::initializer_list<const char*> allowed,
          const std::string& parent = "")
      : name_(parent.empty() ? name : parent + "." + name) {
    if (!root.contains(name)) return;
    node_ = &root[name];
    if (!node_->is_object()) fail("", "must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : node_->items())
      if (!ok.contains(key)) fail(key, "is not a recognized setting");
  }

  const json* find(const char* key) const {
    if (node_ == nullptr || !node_->contains(key) || (*node_)[key].is_null()) return nullptr;
    return &(*node_)[key];
  }

  void get(const char* key, std::string& out) const {
    if (auto* v = find(key)) {
      if (!v->is_string()) fail(key, "must be a string");
      out = v->get<std::string>();
    }
  }
  void get(const char* key, std::optional<std::string>& out) const {
    if (find(key) == nullptr) return;
    std::string s;
    get(key, s);
    out = s;
  }
  void get(const char* key, std::optional<fs::path>& out) const {
    if (find(key) == nullptr) return;
    std::string s;
    get(key, s);
    out = fs::path(s);
  }
  void get(const char* key, bool& out) const {
    if (auto* v = find(key)) {
      if (!v->is_boolean()) fail(key, "must be true or false");
      out = v->get<bool>();
    }
  }
  void get(const char* key, double& out) const {
    if (auto* v = find(key)) {
      if (!v->is_number()) fail(key, "must be a number");
      out = v->get<double>();
    }
  }
  template <class Int>
  void get_int(const char* key, Int& out) const {
    if (auto* v = find(key)) {
      if (!v->is_number_integer() ||
          (std::is_unsigned_v<Int> && !v->is_number_unsigned() && v->get<std::int64_t>() < 0))
        fail(key, "must be a non-negative integer");
      out = v->get<Int>();
    }
  }
  void get(const char* key, std::chrono::milliseconds& out) const {
    long long ms = out.count();
    get_int(key, ms);
    out = std::chrono::milliseconds(ms);
  }
  void get(const char* key, std::chrono::year_month_day& out) const {
    if (find(key) == nullptr) return;
    std::string s;
    get(key, s);
    auto d = text::parse_iso_date(s);
    if (!d) fail(key, "must be a YYYY-MM-DD date");
    out = *d;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw Error(ErrorKind::kConfig,
                "config " + name_ + (key.empty() ? "" : "." + key) + " " + what);
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
};

json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(); }
json opt(const std::optional<fs::path>& v) { return v ? json(v->string()) : json(); }

int usage(std::ostream& err, const std::string& msg) {
  err << "polevent: " << msg << '\n';
  return kExitUsage;
}

// Shared state for one invocation.
struct Context {
  Context(std::istream& i, std::ostream& o, std::ostream& e) : in(i), out(o), err(e) {}

  std::istream& in;
  std::ostream& out;
  std::ostream& err;

  std::string config_path;
  bool json_out = false;
  bool verbose = false;

  std::string corpus;
  std::string out_dir;
  std::string index_dir;
  std::optional<std::string> question;
  std::size_t k = 0;
  double tau = -1.0;
  std::string mock;
  std::string gold;
  std::string answers;
  std::string report;
  bool show = false;
  bool show_prompts = false;

  AppConfig config;

  void load_config() {
    if (!config_path.empty()) config = AppConfig::load(config_path);
    if (k != 0) config.engine.k = k;
    if (tau >= 0.0) config.tau = tau;
    if (!corpus.empty()) config.corpus_path = corpus;
    if (!index_dir.empty()) config.index_dir = index_dir;
    if (!mock.empty()) config.mock_script = mock;
    if (!gold.empty()) config.gold_path = gold;
  }

  prompt::PromptTemplate prompt_template() const {
    if (config.system_prompt_file.has_value() != config.wrapper_prompt_file.has_value())
      throw Error(ErrorKind::kConfig, "prompt.system_file and prompt.wrapper_file go together");
    if (config.system_prompt_file)
      return prompt::PromptTemplate::from_files(*config.system_prompt_file,
                                                *config.wrapper_prompt_file);
    return prompt::PromptTemplate::defaults();
  }

  std::unique_ptr<llm::ChatModel> model() const {
    if (config.mock_script) return llm::make_mock_model(llm::MockScript::load(*config.mock_script));
    if (config.llm.endpoint.empty())
      throw Error(ErrorKind::kConfig, "no llm endpoint configured; set llm.endpoint or pass --mock");
    return llm::make_remote_model(config.llm);
  }

  fs::path require_index() const {
    if (!config.index_dir) throw Error(ErrorKind::kConfig, "no index given; pass --index");
    return *config.index_dir;
  }

  engine::Engine make_engine() const {
    auto kb = std::make_shared<const engine::KnowledgeBase>(
        engine::KnowledgeBase::load(require_index()));
    return engine::Engine(std::move(kb), embed::make_embedder(config.embedder), model(),
                          prompt_template(), config.engine);
  }
};

void print_sources(std::ostream& out, const engine::Answer& a) {
  if (a.sources.empty()) {
    out << "(no sources)\n";
    return;
  }
  for (const auto& [id, s] : a.sources)
    out << id << '\t' << s.headline << '\t' << s.link.value_or("-") << '\n';
}

void print_answer(Context& ctx, const engine::Answer& a) {
  if (ctx.json_out) {
    ctx.out << engine::answer_to_json(a, ctx.verbose).dump(2) << '\n';
    return;
  }
  ctx.out << engine::events_to_json(a.events).dump(2) << '\n';
  if (a.warning) ctx.err << "warning: " << *a.warning << '\n';
  if (!a.invalid.empty())
    ctx.err << a.invalid.size() << " object(s) in the model output failed validation\n";
  if (ctx.verbose) {
    for (const auto& h : a.hits) {
      char score[16];
      std::snprintf(score, sizeof score, "%.4f", h.score);
      ctx.err << score << "  " << h.chunk_id << "  " << h.text << '\n';
    }
    ctx.err << "--- raw model output ---\n" << a.raw_text << '\n';
  }
}

int cmd_build(Context& ctx) {
  ctx.load_config();
  if (!ctx.out_dir.empty()) ctx.config.index_dir = ctx.out_dir;
  if (!ctx.config.corpus_path) return usage(ctx.err, "build needs --corpus");
  if (!ctx.config.index_dir) return usage(ctx.err, "build needs --out");
  auto embedder = embed::make_embedder(ctx.config.embedder);
  auto report = engine::build(*ctx.config.corpus_path, *ctx.config.index_dir, ctx.config.engine,
                              *embedder);
  ctx.err << report.documents << " documents, " << report.chunks << " chunks\n";
  ctx.err << "read " << report.records_read << " records, rejected " << report.rejected
          << ", dim " << report.dim << '\n';
  if (ctx.json_out) {
    ctx.out << json{{"records_read", report.records_read}, {"rejected", report.rejected},
                    {"documents", report.documents},       {"chunks", report.chunks},
                    {"dim", report.dim},                   {"index", ctx.config.index_dir->string()}}
                   .dump(2)
            << '\n';
  }
  return kExitOk;
}

int cmd_query(Context& ctx) {
  std::string question;
  if (ctx.question) {
    question = *ctx.question;
  } else {
    std::ostringstream buf;
    buf << ctx.in.rdbuf();
    question = buf.str();
  }
  if (text::trim(question).empty()) return usage(ctx.err, "the question is empty");
  ctx.load_config();
  auto eng = ctx.make_engine();
  print_answer(ctx, eng.answer(question));
  return kExitOk;
}

int cmd_repl(Context& ctx) {
  ctx.load_config();
  auto eng = ctx.make_engine();
  std::optional<engine::Answer> last;
  std::string line;
  ctx.err << "polevent repl: ask a question, :sources for the last answer's sources, :quit to exit\n";
  while (true) {
    ctx.err << "> " << std::flush;
    if (!std::getline(ctx.in, line)) break;
    auto q = text::trim(line);
    if (q.empty()) continue;
    if (q == ":quit" || q == ":q" || q == ":exit") break;
    if (q == ":sources") {
      if (last) print_sources(ctx.out, *last);
      else ctx.err << "no answer yet\n";
      continue;
    }
    if (q.front() == ':') {
      ctx.err << "unknown command " << q << " (try :sources or :quit)\n";
      continue;
    }
    try {
      last = eng.answer(q);
      print_answer(ctx, *last);
    } catch (const std::exception& e) {
      ctx.err << "error: " << e.what() << '\n';
    }
    ctx.out << std::flush;
  }
  return kExitOk;
}

int cmd_eval(Context& ctx) {
  ctx.load_config();
  if (!ctx.config.gold_path) return usage(ctx.err, "eval needs --gold");
  auto gold = eval::load_gold(*ctx.config.gold_path);

  std::vector<eval::Prediction> preds;
  if (!ctx.answers.empty()) {
    preds = eval::load_predictions(ctx.answers);
  } else {
    auto eng = ctx.make_engine();
    for (const auto& item : gold.items) {
      auto a = eng.answer(item.question);
      if (a.warning) ctx.err << "warning for \"" << item.question << "\": " << *a.warning << '\n';
      preds.push_back({item.question, std::move(a.events)});
    }
  }

  auto report = eval::evaluate(preds, gold, ctx.config.tau);
  auto report_json = report.to_json();
  if (!ctx.report.empty()) fsutil::write_atomic(ctx.report, report_json.dump(2) + '\n');

  const std::string accuracy = report_json["accuracy"].dump();
  // With --json the table goes to stderr so stdout stays one JSON document.
  auto& human = ctx.json_out ? ctx.err : ctx.out;
  report.write_table(human, gold);
  human << "accuracy " << accuracy << '\n';
  if (ctx.json_out) ctx.out << report_json.dump(2) << '\n';
  return kExitOk;
}

int cmd_config(Context& ctx) {
  ctx.load_config();
  if (!ctx.show && !ctx.show_prompts) ctx.show = true;
  if (ctx.show) {
    auto j = ctx.config.to_json();
    const char* key = std::getenv(ctx.config.llm.api_key_env.c_str());
    j["llm"]["api_key_present"] = key != nullptr && *key != '\0';
    ctx.out << j.dump(2) << '\n';
  }
  if (ctx.show_prompts) {
    auto tmpl = ctx.prompt_template();
    if (ctx.json_out) {
      ctx.out << json{{"system", tmpl.system_text()},
                      {"wrapper", tmpl.wrapper_text()},
                      {"schema", prompt::schema_block()}}
                     .dump(2)
              << '\n';
    } else {
      ctx.out << "=== system ===\n" << tmpl.system_text() << "\n=== wrapper ===\n"
              << tmpl.wrapper_text() << "\n=== schema ===\n" << prompt::schema_block() << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

AppConfig AppConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kConfig, "config file must hold a JSON object");
  reject_secrets(j, "");
  const std::set<std::string> sections = {"corpus", "embedder", "llm", "engine",
                                          "eval",   "prompt",   "paths"};
  for (const auto& [key, value] : j.items())
    if (!sections.contains(key))
      throw Error(ErrorKind::kConfig, "config section " + key + " is not recognized");

  AppConfig c;
  Section corpus(j, "corpus", {"field_map", "filter", "chunk"});
  if (corpus.find("filter") != nullptr) {
    Section filter(j["corpus"], "filter", {"date_from", "date_to", "categories"}, "corpus");
    filter.get("date_from", c.engine.filter.date_from);
    filter.get("date_to", c.engine.filter.date_to);
    if (auto* cats = filter.find("categories")) {
      if (!cats->is_array()) filter.fail("categories", "must be an array of strings");
      c.engine.filter.categories.clear();
      for (const auto& cat : *cats) {
        if (!cat.is_string()) filter.fail("categories", "must be an array of strings");
        auto upper = std::string(text::trim(cat.get<std::string>()));
        for (auto& ch : upper)
          if (ch >= 'a' && ch <= 'z') ch = static_cast<char>(ch - 'a' + 'A');
        c.engine.filter.categories.insert(upper);
      }
    }
  }
  if (corpus.find("chunk") != nullptr) {
    Section chunk(j["corpus"], "chunk", {"max_chars"}, "corpus");
    chunk.get_int("max_chars", c.engine.chunk.max_chars);
  }
  if (corpus.find("field_map") != nullptr) {
    Section fields(j["corpus"], "field_map",
                   {"category", "headline", "authors", "link", "short_description", "date"},
                   "corpus");
    fields.get("category", c.engine.fields.category);
    fields.get("headline", c.engine.fields.headline);
    fields.get("authors", c.engine.fields.authors);
    fields.get("link", c.engine.fields.link);
    fields.get("short_description", c.engine.fields.short_description);
    fields.get("date", c.engine.fields.date);
  }

  Section emb(j, "embedder", {"kind", "dim", "endpoint", "model", "timeout_ms", "api_key_env"});
  std::string kind = "local";
  emb.get("kind", kind);
  if (kind == "remote") {
    c.embedder.kind = embed::EmbedderKind::kRemote;
    c.embedder.dim = 0;
  } else if (kind != "local") {
    emb.fail("kind", "must be \"local\" or \"remote\"");
  }
  emb.get_int("dim", c.embedder.dim);
  emb.get("endpoint", c.embedder.endpoint);
  emb.get("model", c.embedder.model);
  emb.get("timeout_ms", c.embedder.timeout);
  emb.get("api_key_env", c.embedder.api_key_env);

  Section llm(j, "llm", {"endpoint", "model", "temperature", "max_tokens", "timeout_ms",
                         "max_retries", "initial_backoff_ms", "api_key_env"});
  llm.get("endpoint", c.llm.endpoint);
  llm.get("model", c.llm.model);
  llm.get("temperature", c.llm.temperature);
  llm.get_int("max_tokens", c.llm.max_tokens);
  llm.get("timeout_ms", c.llm.timeout);
  llm.get_int("max_retries", c.llm.max_retries);
  llm.get("initial_backoff_ms", c.llm.initial_backoff);
  llm.get("api_key_env", c.llm.api_key_env);

  Section eng(j, "engine", {"k", "budget_chars", "attribution"});
  eng.get_int("k", c.engine.k);
  eng.get_int("budget_chars", c.engine.budget_chars);
  eng.get("attribution", c.engine.attribution);

  Section ev(j, "eval", {"tau"});
  ev.get("tau", c.tau);

  Section pr(j, "prompt", {"system_file", "wrapper_file"});
  pr.get("system_file", c.system_prompt_file);
  pr.get("wrapper_file", c.wrapper_prompt_file);

  Section paths(j, "paths", {"corpus", "index", "gold", "mock"});
  paths.get("corpus", c.corpus_path);
  paths.get("index", c.index_dir);
  paths.get("gold", c.gold_path);
  paths.get("mock", c.mock_script);

  c.engine.validate();
  c.embedder.validate();
  if (!c.llm.endpoint.empty()) c.llm.validate();
  if (!(c.tau >= 0.0 && c.tau <= 1.0)) ev.fail("tau", "must be within [0, 1]");
  for (const auto* p : {&c.system_prompt_file, &c.wrapper_prompt_file, &c.gold_path,
                        &c.mock_script, &c.corpus_path}) {
    if (*p && !fs::exists(**p))
      throw Error(ErrorKind::kConfig, "config path " + (*p)->string() + " does not exist");
  }
  return c;
}

AppConfig AppConfig::load(const fs::path& path) {
  auto j = json::parse(fsutil::read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::kConfig, path.string() + " is not valid JSON");
  return from_json(j);
}

json AppConfig::to_json() const {
  json cats = json::array();
  for (const auto& c : engine.filter.categories) cats.push_back(c);
  const auto& f = engine.fields;
  return {
      {"corpus",
       {{"field_map",
         {{"category", f.category},
          {"headline", f.headline},
          {"authors", f.authors},
          {"link", f.link},
          {"short_description", f.short_description},
          {"date", f.date}}},
        {"filter",
         {{"date_from", text::format_iso_date(engine.filter.date_from)},
          {"date_to", text::format_iso_date(engine.filter.date_to)},
          {"categories", cats}}},
        {"chunk", {{"max_chars", engine.chunk.max_chars}}}}},
      {"embedder",
       {{"kind", std::string(embed::to_string(embedder.kind))},
        {"dim", embedder.dim},
        {"endpoint", opt(embedder.endpoint)},
        {"model", opt(embedder.model)},
        {"timeout_ms", embedder.timeout.count()},
        {"api_key_env", embedder.api_key_env}}},
      {"llm",
       {{"endpoint", llm.endpoint},
        {"model", llm.model},
        {"temperature", llm.temperature},
        {"max_tokens", llm.max_tokens},
        {"timeout_ms", llm.timeout.count()},
        {"max_retries", llm.max_retries},
        {"initial_backoff_ms", llm.initial_backoff.count()},
        {"api_key_env", llm.api_key_env}}},
      {"engine",
       {{"k", engine.k}, {"budget_chars", engine.budget_chars}, {"attribution", engine.attribution}}},
      {"eval", {{"tau", tau}}},
      {"prompt", {{"system_file", opt(system_prompt_file)}, {"wrapper_file", opt(wrapper_prompt_file)}}},
      {"paths",
       {{"corpus", opt(corpus_path)},
        {"index", opt(index_dir)},
        {"gold", opt(gold_path)},
        {"mock", opt(mock_script)}}},
  };
}

int exit_code_for(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (err == nullptr) return kExitFailure;
  switch (err->kind()) {
    case ErrorKind::kEmptyCorpus:
    case ErrorKind::kGoldFormat:
    case ErrorKind::kAlignment:
    case ErrorKind::kConfig:
    case ErrorKind::kTemplate:
      return kExitData;
    case ErrorKind::kTransport:
    case ErrorKind::kEndpoint:
    case ErrorKind::kTimeout:
    case ErrorKind::kProtocol:
      return kExitTransport;
    default:
      return kExitFailure;
  }
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Context ctx(in, out, err);

  CLI::App app{"polevent: retrieval-augmented political event extraction", "polevent"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "polevent 0.1.0");
  app.add_option("--config", ctx.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_flag("--json", ctx.json_out, "machine-readable JSON on standard output");
  app.add_flag("--verbose", ctx.verbose, "include hits, scores and raw model output");

  auto* build = app.add_subcommand("build", "ingest a corpus and write an index directory");
  build->add_option("--corpus", ctx.corpus, "JSON-lines file or directory of them");
  build->add_option("--out", ctx.out_dir, "index directory to write");

  auto add_engine_opts = [&ctx](CLI::App* sub) {
    sub->add_option("--index", ctx.index_dir, "index directory")->check(CLI::ExistingDirectory);
    sub->add_option("--k", ctx.k, "passages to retrieve")->check(CLI::PositiveNumber);
    sub->add_option("--mock", ctx.mock, "answer from a mock script instead of the endpoint")
        ->check(CLI::ExistingFile);
  };

  auto* query = app.add_subcommand("query", "answer one question");
  add_engine_opts(query);
  query->add_option("--q", ctx.question, "question (read from standard input when absent)");

  auto* repl = app.add_subcommand("repl", "interactive question loop");
  add_engine_opts(repl);

  auto* evalc = app.add_subcommand("eval", "score answers against a gold set");
  add_engine_opts(evalc);
  evalc->add_option("--gold", ctx.gold, "gold set JSON")->check(CLI::ExistingFile);
  evalc->add_option("--answers", ctx.answers, "precomputed answers instead of running queries")
      ->check(CLI::ExistingFile);
  evalc->add_option("--tau", ctx.tau, "slot match threshold")->check(CLI::Range(0.0, 1.0));
  evalc->add_option("--report", ctx.report, "write the report JSON here");

  auto* config = app.add_subcommand("config", "print the effective configuration");
  config->add_flag("--show", ctx.show, "print the effective configuration");
  config->add_flag("--show-prompts", ctx.show_prompts, "print the prompt templates");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (build->parsed()) return cmd_build(ctx);
    if (query->parsed()) return cmd_query(ctx);
    if (repl->parsed()) return cmd_repl(ctx);
    if (evalc->parsed()) return cmd_eval(ctx);
    return cmd_config(ctx);
  } catch (const std::exception& e) {
    err << "polevent: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace polevent::cli

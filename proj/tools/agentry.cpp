/*
 * Copyright 2026 The Agentry Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <unistd.h>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "CLI11.hpp"
#include "agentry/bench.hpp"
#include "agentry/chat_client.hpp"
#include "agentry/config.hpp"
#include "agentry/eval.hpp"
#include "agentry/graders.hpp"
#include "agentry/pool.hpp"
#include "agentry/runtime.hpp"
#include "agentry/scripted_backend.hpp"
#include "agentry/service.hpp"
#include "agentry/text.hpp"

namespace fs = std::filesystem;
using namespace agentry;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEpisode = 3;

struct BackendFlags {
  std::string script;
  std::vector<std::string> backends;  // PATTERN=FILE
  std::string cost_table;
  std::string fixtures;
  std::string sandbox_root = ".";

  void add_to(CLI::App* app) {
    app->add_option("--script", script, "Scripted backend file used for every model (same as --backend '*=FILE')");
    app->add_option("--backend", backends, "Scripted backend for models matching PATTERN (PATTERN=FILE)");
    app->add_option("--cost-table", cost_table, "Model cost table (YAML or JSON)");
    app->add_option("--fixtures", fixtures, "Offline search/page fixtures for the built-in tools");
    app->add_option("--sandbox-root", sandbox_root, "Root directory for file_reader");
  }

  std::shared_ptr<BackendRegistry> registry() const {
    auto reg = std::make_shared<BackendRegistry>();
    bool has_default = false;
    std::vector<std::string> all = backends;
    if (!script.empty()) all.push_back("*=" + script);
    for (const auto& spec : all) {
      auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0) fail(ErrorKind::InvalidConfig, "--backend expects PATTERN=FILE: " + spec);
      std::string pattern = spec.substr(0, eq);
      reg->register_backend(pattern, ScriptedBackend::load(spec.substr(eq + 1)));
      if (pattern == "*") has_default = true;
    }
    if (!has_default) {
      reg->register_backend("*", std::make_shared<ChatCompletionsClient>(ChatCompletionsClient::options_from_env()));
    }
    if (!cost_table.empty()) reg->set_cost_table(load_cost_table(cost_table));
    return reg;
  }

  AssemblyOptions assembly() const {
    AssemblyOptions o;
    o.tool_env = fixtures.empty() ? BuiltinToolEnv{} : load_tool_fixtures(fixtures);
    o.tool_env.sandbox_root = sandbox_root;
    return o;
  }
};

int report(const Error& e, int code) {
  std::cerr << "error: " << to_string(e.kind()) << ": " << e.detail() << "\n";
  return code;
}

fs::path default_templates() {
  if (const char* env = std::getenv("AGENTRY_TEMPLATES")) return env;
  return AGENTRY_TEMPLATES_DIR;
}

std::string usage_footer(const EpisodeTrace& t) {
  return "-- usage: prompt_tokens=" + std::to_string(t.usage.prompt_tokens) +
         " completion_tokens=" + std::to_string(t.usage.completion_tokens) +
         " cost=" + nlohmann::json(t.usage.cost).dump() + " llm_calls=" + std::to_string(t.llm_calls) +
         " tool_calls=" + std::to_string(t.tool_calls) + " wall_time_ms=" + std::to_string(t.wall_time_ms);
}

class TerminalHandler : public OutputHandler {
 public:
  TerminalHandler(bool print_tokens, bool color) : tokens_(print_tokens), color_(color) {}

  void on_event(const AgentEvent& e) override {
    switch (e.kind) {
      case EventKind::Token:
        if (tokens_) {
          std::cout << e.text << std::flush;
          streamed_ = true;
        }
        break;
      case EventKind::Thought:
        if (!tokens_) std::cout << style("2") << "thought: " << e.text << reset() << "\n";
        break;
      case EventKind::ToolCall:
        (tokens_ ? std::cerr : std::cout) << style("36") << "[tool " << e.tool << "] " << e.text << reset() << "\n";
        break;
      case EventKind::ToolResult:
        (tokens_ ? std::cerr : std::cout) << style("36") << "[" << (e.ok ? "result " : "failed ") << e.tool << "] "
                                          << truncate_utf8(e.text, 400) << reset() << "\n";
        break;
      case EventKind::PlanStep:
        (tokens_ ? std::cerr : std::cout) << style("2") << "plan " << e.call_id << " = " << e.tool << "[" << e.text
                                          << "]" << reset() << "\n";
        break;
      case EventKind::Final:
        if (tokens_ && streamed_) {
          std::cout << "\n";
        } else {
          std::cout << style("1") << e.text << reset() << "\n";
        }
        break;
      case EventKind::Usage:
      case EventKind::Error:
        break;
    }
  }

 private:
  std::string style(const char* code) const { return color_ ? std::string("\033[") + code + "m" : std::string(); }
  std::string reset() const { return color_ ? "\033[0m" : ""; }

  bool tokens_;
  bool color_;
  bool streamed_ = false;
};

int cmd_assemble(const std::string& path, const std::string& once, const std::string& stream, bool chat,
                 const std::string& session_file, const BackendFlags& flags) {
  std::shared_ptr<AgentInstance> agent;
  try {
    AgentConfig cfg = load_agent_config(path, process_env());
    agent = assemble_agent(cfg, flags.registry(), flags.assembly());
  } catch (const Error& e) {
    return report(e, kExitConfig);
  }
  const bool color = ::isatty(STDOUT_FILENO) != 0;
  if (!once.empty() || !stream.empty()) {
    EpisodeTrace trace;
    try {
      if (!once.empty()) {
        trace = agent->run(once);
        if (trace.ok()) std::cout << trace.answer << "\n";
      } else {
        TerminalHandler handler(true, color);
        trace = agent->stream(stream, handler);
      }
    } catch (const Error& e) {
      return report(e, kExitEpisode);
    }
    if (!trace.ok()) {
      std::cerr << "error: " << to_string(trace.error->kind) << ": " << trace.error->message << "\n";
      return kExitEpisode;
    }
    std::cout << usage_footer(trace) << "\n";
    return kExitOk;
  }
  if (!chat) {
    std::cerr << "error: one of --once, --stream or --chat is required\n";
    return kExitConfig;
  }
  Session session;
  try {
    if (!session_file.empty()) {
      session = Session::load(session_file);
      session.autosave_path = fs::path(session_file);
    }
  } catch (const Error& e) {
    return report(e, kExitConfig);
  }
  TerminalHandler handler(false, color);
  std::string line;
  while (true) {
    if (::isatty(STDIN_FILENO)) std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    if (trim(line).empty()) continue;
    if (trim(line) == "/exit" || trim(line) == "/quit") break;
    EpisodeTrace trace = agent->chat(session, line, &handler);
    if (!trace.ok()) {
      std::cerr << "error: " << to_string(trace.error->kind) << ": " << trace.error->message << "\n";
    } else {
      std::cout << (color ? "\033[2m" : "") << usage_footer(trace) << (color ? "\033[0m" : "") << "\n";
    }
  }
  if (!session_file.empty()) session.save(session_file);
  return kExitOk;
}


// ---------------------------------------------------------------------------
// bench

YAML::Node load_yaml_file(const std::string& path) {
  try {
    return YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    fail(ErrorKind::FileNotFound, path);
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::SyntaxError, path + ": " + e.what());
  }
}

fs::path relative_to(const std::string& config_path, const YAML::Node& node, const char* key) {
  if (!node[key]) fail(ErrorKind::MissingField, key);
  fs::path p = node[key].as<std::string>();
  return p.is_relative() ? fs::absolute(config_path).parent_path() / p : p;
}

int cmd_filter(const std::string& config_path, const BackendFlags& flags) {
  FilterReport rep;
  fs::path out_path;
  try {
    YAML::Node cfg = load_yaml_file(config_path);
    Corpus corpus = load_corpus(relative_to(config_path, cfg, "corpus"));
    AgentConfig base = load_agent_config(relative_to(config_path, cfg, "agent"), process_env());
    auto backends = flags.registry();
    AssemblyOptions assembly = flags.assembly();
    assemble_agent(base, backends, assembly);
    if (!cfg["judge"]) fail(ErrorKind::MissingField, "judge");
    YAML::Emitter em;
    em << cfg["judge"];
    Judge judge{backends, parse_model_spec(em.c_str(), fs::absolute(config_path).parent_path(), process_env())};
    CodeLimits limits;
    if (cfg["code_timeout_ms"]) limits.timeout = std::chrono::milliseconds(cfg["code_timeout_ms"].as<long long>());
    std::size_t concurrency = cfg["concurrency"] ? cfg["concurrency"].as<std::size_t>() : 1;
    out_path = cfg["output"] ? relative_to(config_path, cfg, "output") : fs::path("filter_report.json");
    rep = challenge_filter(
        corpus, [&](const BenchTask&) { return assemble_agent(base, backends, assembly); },
        [&](const BenchTask& task, const std::string& attempt) {
          if (task.grader_kind == GraderKind::Code) return grade_code(attempt, task.tests, limits).pass_fraction == 1.0;
          return grade_gated(judge, task.prompt, task.reference, attempt);
        },
        concurrency);
    write_text_file(out_path, rep.to_json().dump(2) + "\n");
    if (cfg["kept_corpus"]) {
      Corpus kept;
      for (const auto& t : corpus) {
        if (std::find(rep.kept.begin(), rep.kept.end(), t.id) != rep.kept.end()) kept.push_back(t);
      }
      fs::path kept_path = relative_to(config_path, cfg, "kept_corpus");
      write_corpus(kept, kept_path);
      std::cout << "kept corpus: " << kept_path.string() << "\n";
    }
  } catch (const Error& e) {
    return report(e, kExitConfig);
  } catch (const YAML::Exception& e) {
    std::cerr << "error: InvalidConfig: " << config_path << ": " << e.what() << "\n";
    return kExitConfig;
  }
  std::cout << "kept=" << rep.kept.size() << " discarded=" << rep.discarded.size()
            << " needs_review=" << rep.needs_review.size() << "\n";
  std::cout << "filter report: " << out_path.string() << "\n";
  return kExitOk;
}

int cmd_split(const std::string& config_path) {
  try {
    YAML::Node cfg = load_yaml_file(config_path);
    Corpus corpus = load_corpus(relative_to(config_path, cfg, "corpus"));
    double fraction = cfg["public_fraction"] ? cfg["public_fraction"].as<double>() : 0.5;
    std::uint64_t seed = cfg["seed"] ? cfg["seed"].as<std::uint64_t>() : 0;
    SplitManifest m = split_corpus(corpus, fraction, seed);
    fs::path out = cfg["output"] ? relative_to(config_path, cfg, "output") : fs::path("split_manifest.json");
    write_text_file(out, m.to_json().dump(2) + "\n");
    std::cout << "public=" << m.public_ids.size() << " private=" << m.private_ids.size() << "\n";
    std::cout << "split manifest: " << out.string() << "\n";
    if (cfg["split_corpus"]) {
      fs::path corpus_out = relative_to(config_path, cfg, "split_corpus");
      write_corpus(apply_split(corpus, m), corpus_out);
      std::cout << "split corpus: " << corpus_out.string() << "\n";
    }
  } catch (const Error& e) {
    return report(e, kExitConfig);
  } catch (const YAML::Exception& e) {
    std::cerr << "error: InvalidConfig: " << config_path << ": " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_eval(const std::string& config_path, const BackendFlags& flags) {
  try {
    EvalConfig cfg = load_eval_config(config_path);
    EvalEnvironment env;
    env.backends = flags.registry();
    env.assembly = flags.assembly();
    EvalReport rep = run_eval(cfg, env);
    auto [json_path, csv_path] = write_eval_outputs(rep, cfg);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "tasks=" << rep.results.size() << " errors=" << rep.overall.errors;
    if (rep.overall.pass_rate) std::cout << " pass_rate=" << nlohmann::json(*rep.overall.pass_rate).dump();
    std::cout << "\n";
    std::cout << "report: " << json_path.string() << "\n";
    std::cout << "dump: " << csv_path.string() << "\n";
  } catch (const Error& e) {
    return report(e, kExitConfig);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// agent pool

int cmd_pool(const std::string& action, const std::vector<std::string>& args, const std::string& pool_dir,
             const std::string& templates_dir, const std::string& from_template) {
  try {
    AgentPool pool(pool_dir, templates_dir.empty() ? default_templates() : fs::path(templates_dir));
    if (action == "list") {
      for (const auto& e : pool.list()) std::cout << e.name << "\t" << e.version << "\t" << e.description << "\n";
      return kExitOk;
    }
    if (action == "templates") {
      for (const auto& t : pool.templates()) std::cout << t << "\n";
      return kExitOk;
    }
    if (action == "create" && args.size() == 1) {
      PoolEntry e = pool.create(args[0], from_template.empty() ? std::nullopt : std::optional<std::string>(from_template));
      std::cout << "created " << e.name << " at " << e.path.string() << "\n";
      return kExitOk;
    }
    if (action == "clone" && args.size() == 2) {
      PoolEntry e = pool.clone(args[0], args[1]);
      std::cout << "cloned " << args[0] << " to " << e.name << " at " << e.path.string() << "\n";
      return kExitOk;
    }
    if (action == "delete" && args.size() == 1) {
      pool.remove(args[0]);
      std::cout << "deleted " << args[0] << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    return report(e, kExitFailure);
  }
  std::cerr << "error: usage: agent create NAME | clone TEMPLATE NAME | delete NAME | list | templates\n";
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  CLI::App app{"Assemble, run, compose and evaluate tool-using agents."};
  app.require_subcommand(1);

  std::string pool_dir = "agents", templates_dir, from_template, pool_action;
  std::vector<std::string> pool_args;
  auto* agent_cmd = app.add_subcommand("agent", "Create, clone, delete or list pool agents");
  agent_cmd->add_option("action", pool_action, "create | clone | delete | list | templates")->required();
  agent_cmd->add_option("args", pool_args, "Names");
  agent_cmd->add_option("--pool", pool_dir, "Pool directory")->capture_default_str();
  agent_cmd->add_option("--templates", templates_dir, "Template directory");
  agent_cmd->add_option("--template", from_template, "Template for create");

  std::string agent_path, once, stream, session_file;
  bool chat = false;
  BackendFlags assemble_flags;
  auto* assemble_cmd = app.add_subcommand("assemble", "Assemble an agent and run it");
  assemble_cmd->add_option("agent", agent_path, "agent.yaml or its directory")->required();
  assemble_cmd->add_option("--once", once, "Run one instruction and print the answer");
  assemble_cmd->add_option("--stream", stream, "Run one instruction, streaming tokens");
  assemble_cmd->add_flag("--chat", chat, "Interactive chat on stdin");
  assemble_cmd->add_option("--session", session_file, "Chat transcript file (loaded and saved)");
  assemble_flags.add_to(assemble_cmd);

  std::string bench_action, bench_config;
  BackendFlags bench_flags;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark tools: filter, split, eval");
  bench_cmd->add_option("action", bench_action, "filter | split | eval")->required()->check(
      CLI::IsMember({"filter", "split", "eval"}));
  bench_cmd->add_option("config", bench_config, "YAML config")->required();
  bench_flags.add_to(bench_cmd);

  std::string serve_pool = "agents", reports_dir, static_dir, host = "127.0.0.1";
  int port = 8080;
  BackendFlags serve_flags;
  auto* serve_cmd = app.add_subcommand("serve", "Serve a pool over HTTP with server-sent events");
  serve_cmd->add_option("--pool", serve_pool, "Pool directory")->capture_default_str();
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--reports", reports_dir, "Directory of eval report JSON files");
  serve_cmd->add_option("--static", static_dir, "Static files mounted at /");
  serve_flags.add_to(serve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*agent_cmd) return cmd_pool(pool_action, pool_args, pool_dir, templates_dir, from_template);
  if (*assemble_cmd) {
    fs::path p = agent_path;
    if (fs::is_directory(p)) p /= "agent.yaml";
    return cmd_assemble(p.string(), once, stream, chat, session_file, assemble_flags);
  }
  if (*bench_cmd) {
    if (bench_action == "filter") return cmd_filter(bench_config, bench_flags);
    if (bench_action == "split") return cmd_split(bench_config);
    return cmd_eval(bench_config, bench_flags);
  }
  if (*serve_cmd) {
    try {
      ServiceOptions opts;
      opts.pool = serve_pool;
      if (!reports_dir.empty()) opts.reports_dir = fs::path(reports_dir);
      if (!static_dir.empty()) opts.static_dir = fs::path(static_dir);
      opts.backends = serve_flags.registry();
      opts.assembly = serve_flags.assembly();
      AgentService service(std::move(opts));
      std::cerr << "serving " << serve_pool << " on http://" << host << ":" << port << "\n";
      service.run(host, port);
    } catch (const Error& e) {
      return report(e, kExitFailure);
    }
    return kExitOk;
  }
  return kExitConfig;
}

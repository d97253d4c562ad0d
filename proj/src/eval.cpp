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

#include "agentry/eval.hpp"

#include <algorithm>
#include <numeric>

#include <yaml-cpp/yaml.h>

#include "agentry/error.hpp"
#include "agentry/parallel.hpp"
#include "agentry/text.hpp"

namespace fs = std::filesystem;

namespace agentry {

std::optional<std::size_t> SampleSpec::count_for(Subcategory s) const {
  auto it = per_subcategory.find(s);
  return it != per_subcategory.end() ? it->second : default_count;
}

void EvalConfig::validate() const {
  if (concurrency < 1) fail(ErrorKind::InvalidConfig, "concurrency must be at least 1");
  if (splits.empty()) fail(ErrorKind::InvalidConfig, "no splits selected");
  if (name.empty() || name.find('/') != std::string::npos) {
    fail(ErrorKind::InvalidConfig, "report name must be a plain file stem");
  }
}

namespace {

std::optional<std::size_t> parse_count(const YAML::Node& n, const std::string& field) {
  if (iequals(trim(n.Scalar()), "all")) return std::nullopt;
  try {
    long long v = n.as<long long>();
    if (v < 0) fail(ErrorKind::InvalidConfig, field + " must be >= 0");
    return static_cast<std::size_t>(v);
  } catch (const YAML::Exception&) {
    fail(ErrorKind::InvalidConfig, field + ": expected a count or 'all'");
  }
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() ? base / path : path;
}

}  // namespace

EvalConfig load_eval_config(const fs::path& path, const EnvMap& env) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    fail(ErrorKind::FileNotFound, path.string());
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::SyntaxError, path.string() + ": " + e.what());
  }
  if (!root.IsMap()) fail(ErrorKind::InvalidConfig, path.string() + ": expected a mapping");
  const fs::path base = fs::absolute(path).parent_path();
  EvalConfig c;
  try {
    if (!root["corpus"]) fail(ErrorKind::MissingField, "corpus");
    c.corpus = resolve_path(base, root["corpus"].as<std::string>());
    if (root["agent"]) c.agent = resolve_path(base, root["agent"].as<std::string>());
    if (YAML::Node s = root["splits"]) {
      c.splits.clear();
      if (s.IsScalar()) {
        if (iequals(s.Scalar(), "all")) {
          c.splits = {Split::Public, Split::Private};
        } else {
          c.splits.push_back(split_from_string(s.Scalar()));
        }
      } else {
        for (const auto& v : s) c.splits.push_back(split_from_string(v.as<std::string>()));
      }
    }
    if (YAML::Node s = root["sample"]) {
      if (s.IsScalar()) {
        c.sample.default_count = parse_count(s, "sample");
      } else if (s.IsMap()) {
        for (const auto& kv : s) {
          std::string key = kv.first.as<std::string>();
          if (key == "default") {
            c.sample.default_count = parse_count(kv.second, "sample.default");
          } else {
            c.sample.per_subcategory[subcategory_from_string(key)] = parse_count(kv.second, "sample." + key);
          }
        }
      } else {
        fail(ErrorKind::InvalidConfig, "sample must be a count, 'all', or a mapping");
      }
    }
    if (root["seed"]) c.seed = root["seed"].as<std::uint64_t>();
    c.grader_settings.seed = c.seed;
    if (root["concurrency"]) {
      long long n = root["concurrency"].as<long long>();
      if (n < 1) fail(ErrorKind::InvalidConfig, "concurrency must be at least 1");
      c.concurrency = static_cast<std::size_t>(n);
    }
    if (YAML::Node g = root["graders"]) {
      for (const auto& kv : g) c.grader_overrides[kv.first.as<std::string>()] = grader_kind_from_string(kv.second.as<std::string>());
    }
    if (YAML::Node j = root["judge"]) {
      YAML::Emitter e;
      e << j;
      c.judge = parse_model_spec(e.c_str(), base, env);
    }
    if (YAML::Node g = root["grading"]) {
      auto& gs = c.grader_settings;
      if (g["exact_match"]) gs.gated.exact_match = g["exact_match"].as<bool>();
      if (g["gated_prompt"]) gs.gated.prompt_template = g["gated_prompt"].as<std::string>();
      if (g["score_prompt"]) gs.score_prompt = g["score_prompt"].as<std::string>();
      if (g["dojo_prompt"]) gs.dojo_prompt = g["dojo_prompt"].as<std::string>();
      if (g["instructed_prompt"]) gs.instructed_prompt = g["instructed_prompt"].as<std::string>();
      if (g["default_instruction"]) gs.default_instruction = g["default_instruction"].as<std::string>();
      if (g["code_timeout_ms"]) gs.code.timeout = std::chrono::milliseconds(g["code_timeout_ms"].as<long long>());
      if (g["code_memory_mb"]) gs.code.memory_mb = g["code_memory_mb"].as<std::size_t>();
    }
    if (root["output_dir"]) c.output_dir = resolve_path(base, root["output_dir"].as<std::string>());
    else c.output_dir = base / c.output_dir;
    if (root["name"]) c.name = root["name"].as<std::string>();
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
  c.validate();
  return c;
}

SampleResult sample_tasks(const Corpus& corpus, const EvalConfig& config) {
  SampleResult out;
  for (Subcategory sub : all_subcategories()) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& t = corpus[i];
      if (t.subcategory == sub && std::find(config.splits.begin(), config.splits.end(), t.split) != config.splits.end()) {
        members.push_back(i);
      }
    }
    std::optional<std::size_t> want = config.sample.count_for(sub);
    if (want && *want == 0) {
      if (!members.empty()) out.omitted.push_back(sub);
      continue;
    }
    if (members.empty()) continue;
    if (want && *want > members.size()) {
      out.warnings.push_back(std::string(to_string(sub)) + ": requested " + std::to_string(*want) + ", only " +
                             std::to_string(members.size()) + " available; taking all");
    }
    if (want && *want < members.size()) {
      std::mt19937_64 rng(config.seed ^ fnv1a64(to_string(sub)));
      seeded_shuffle(members, rng);
      members.resize(*want);
      std::sort(members.begin(), members.end());
    }
    for (std::size_t i : members) out.tasks.push_back(corpus[i]);
  }
  return out;
}

GraderKind grader_for(const BenchTask& task, const EvalConfig& config) {
  if (auto it = config.grader_overrides.find(std::string(to_string(task.subcategory))); it != config.grader_overrides.end()) {
    return it->second;
  }
  if (auto it = config.grader_overrides.find(std::string(to_string(task.category))); it != config.grader_overrides.end()) {
    return it->second;
  }
  return task.grader_kind;
}

std::optional<double> EvalResult::score() const {
  if (verdict) return verdict->score;
  return error ? std::optional<double>(0.0) : std::nullopt;
}

std::optional<bool> EvalResult::passed() const {
  if (verdict) return verdict->pass;
  return error ? std::optional<bool>(false) : std::nullopt;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

GroupStats stats(const std::vector<const EvalResult*>& rs) {
  GroupStats g;
  g.n = rs.size();
  std::vector<double> scores;
  std::size_t passes = 0, judged = 0;
  for (const auto* r : rs) {
    if (r->error) ++g.errors;
    if (auto s = r->score()) scores.push_back(*s);
    if (auto p = r->passed()) {
      ++judged;
      if (*p) ++passes;
    }
  }
  if (!scores.empty()) g.mean_score = mean(scores);
  if (judged > 0) g.pass_rate = static_cast<double>(passes) / static_cast<double>(judged);
  return g;
}

nlohmann::json stats_json(const GroupStats& g) {
  return {{"n", g.n},
          {"errors", g.errors},
          {"mean_score", g.mean_score ? nlohmann::json(*g.mean_score) : nlohmann::json()},
          {"pass_rate", g.pass_rate ? nlohmann::json(*g.pass_rate) : nlohmann::json()}};
}

}  // namespace

void aggregate(EvalReport& report) {
  std::sort(report.results.begin(), report.results.end(),
            [](const EvalResult& a, const EvalResult& b) { return a.id < b.id; });
  report.subcategories.clear();
  report.categories.clear();
  std::map<Subcategory, std::vector<const EvalResult*>> by_sub;
  std::map<Category, std::vector<const EvalResult*>> by_cat;
  std::vector<const EvalResult*> all;
  std::vector<double> prompt, completion, wall;
  double cost = 0;
  for (const auto& r : report.results) {
    by_sub[r.subcategory].push_back(&r);
    by_cat[r.category].push_back(&r);
    all.push_back(&r);
    prompt.push_back(static_cast<double>(r.usage.prompt_tokens));
    completion.push_back(static_cast<double>(r.usage.completion_tokens));
    wall.push_back(static_cast<double>(r.wall_time_ms));
    cost += r.usage.cost;
  }
  for (const auto& [k, v] : by_sub) report.subcategories[k] = stats(v);
  for (const auto& [k, v] : by_cat) report.categories[k] = stats(v);
  report.overall = stats(all);
  auto& e = report.efficiency;
  e.mean_prompt_tokens = mean(prompt);
  e.median_prompt_tokens = median(prompt);
  e.mean_completion_tokens = mean(completion);
  e.median_completion_tokens = median(completion);
  e.mean_wall_time_ms = mean(wall);
  e.median_wall_time_ms = median(wall);
  e.total_cost = cost;
}

nlohmann::json EvalReport::aggregates_json() const {
  nlohmann::json subs = nlohmann::json::object();
  for (const auto& [k, g] : subcategories) {
    auto j = stats_json(g);
    j["category"] = to_string(category_of(k));
    subs[std::string(to_string(k))] = j;
  }
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [k, g] : categories) cats[std::string(to_string(k))] = stats_json(g);
  nlohmann::json omitted_json = nlohmann::json::array();
  for (auto s : omitted) omitted_json.push_back(to_string(s));
  return {{"agent", {{"name", agent_name}, {"version", agent_version}}},
          {"seed", seed},
          {"n_tasks", results.size()},
          {"overall", stats_json(overall)},
          {"subcategories", subs},
          {"categories", cats},
          {"efficiency",
           {{"mean_prompt_tokens", efficiency.mean_prompt_tokens},
            {"median_prompt_tokens", efficiency.median_prompt_tokens},
            {"mean_completion_tokens", efficiency.mean_completion_tokens},
            {"median_completion_tokens", efficiency.median_completion_tokens},
            {"mean_wall_time_ms", efficiency.mean_wall_time_ms},
            {"median_wall_time_ms", efficiency.median_wall_time_ms},
            {"total_cost", efficiency.total_cost}}},
          {"omitted", omitted_json},
          {"warnings", warnings}};
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = aggregates_json();
  j["timestamp"] = timestamp;
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json x = {{"id", r.id},
                        {"category", to_string(r.category)},
                        {"subcategory", to_string(r.subcategory)},
                        {"prediction", r.prediction},
                        {"score", r.score() ? nlohmann::json(*r.score()) : nlohmann::json()},
                        {"pass", r.passed() ? nlohmann::json(*r.passed()) : nlohmann::json()},
                        {"usage",
                         {{"prompt_tokens", r.usage.prompt_tokens},
                          {"completion_tokens", r.usage.completion_tokens},
                          {"cost", r.usage.cost}}},
                        {"llm_calls", r.llm_calls},
                        {"wall_time_ms", r.wall_time_ms}};
    if (r.verdict) x["verdict"] = r.verdict->to_json();
    if (r.error) x["error"] = *r.error;
    rs.push_back(std::move(x));
  }
  j["results"] = rs;
  return j;
}

EvalReport run_eval(const EvalConfig& config, const EvalEnvironment& environment) {
  config.validate();
  Corpus corpus = load_corpus(config.corpus);
  if (config.agent.empty()) fail(ErrorKind::MissingField, "agent");
  AgentConfig agent;
  try {
    agent = load_agent_config(config.agent, environment.env);
  } catch (const Error& e) {
    fail(ErrorKind::AssemblyError, std::string(to_string(e.kind())) + ": " + e.detail());
  }
  return run_eval(config, corpus, agent, environment);
}

EvalReport run_eval(const EvalConfig& config, const Corpus& corpus, const AgentConfig& agent,
                    const EvalEnvironment& environment) {
  config.validate();
  if (!environment.backends) fail(ErrorKind::AssemblyError, "no backend registry");
  try {
    assemble_agent(agent, environment.backends, environment.assembly);
  } catch (const Error& e) {
    fail(ErrorKind::AssemblyError, std::string(to_string(e.kind())) + ": " + e.detail());
  }
  SampleResult sample = sample_tasks(corpus, config);
  Judge judge{environment.backends, config.judge.value_or(ModelSpec{})};
  bool needs_judge = false;
  for (const auto& t : sample.tasks) {
    GraderKind k = grader_for(t, config);
    if (k != GraderKind::Code && !(k == GraderKind::Gated && config.grader_settings.gated.exact_match)) needs_judge = true;
  }
  if (needs_judge) {
    if (!config.judge) fail(ErrorKind::AssemblyError, "sampled tasks need a judge model; set 'judge'");
    if (!environment.backends->has_backend(config.judge->model_name)) {
      fail(ErrorKind::AssemblyError, "UnknownBackend: " + config.judge->model_name);
    }
  }
  ClockFn clock = environment.assembly.runtime.clock;
  if (!clock) clock = [] { return std::chrono::steady_clock::now(); };

  EvalReport report;
  report.agent_name = agent.name;
  report.agent_version = agent.version;
  report.seed = config.seed;
  report.timestamp = utc_timestamp();
  report.warnings = sample.warnings;
  report.omitted = sample.omitted;
  report.results.resize(sample.tasks.size());

  parallel_for(sample.tasks.size(), config.concurrency, [&](std::size_t i) {
    const BenchTask& task = sample.tasks[i];
    EvalResult& r = report.results[i];
    r.id = task.id;
    r.category = task.category;
    r.subcategory = task.subcategory;
    r.prompt = task.prompt;
    auto start = clock();
    try {
      auto instance = assemble_agent(agent, environment.backends, environment.assembly);
      EpisodeTrace trace = instance->run(task.prompt);
      r.prediction = trace.answer;
      r.usage = trace.usage;
      r.llm_calls = trace.llm_calls;
      if (!trace.ok()) {
        r.error = std::string(to_string(trace.error->kind)) + ": " + trace.error->message;
      } else {
        r.verdict = grade_task(grader_for(task, config), task, trace.answer, judge, config.grader_settings);
      }
    } catch (const Error& e) {
      r.error = std::string(to_string(e.kind())) + ": " + e.detail();
    } catch (const std::exception& e) {
      r.error = std::string("Internal: ") + e.what();
    }
    r.wall_time_ms = std::max<std::int64_t>(
        0, std::chrono::duration_cast<std::chrono::milliseconds>(clock() - start).count());
  });
  aggregate(report);
  return report;
}

std::pair<fs::path, fs::path> write_eval_outputs(const EvalReport& report, const EvalConfig& config) {
  fs::create_directories(config.output_dir);
  fs::path json = config.output_dir / (config.name + ".json");
  fs::path csv = config.output_dir / (config.name + ".csv");
  write_text_file(json, report.to_json().dump(2) + "\n");
  export_dump(report.results, csv);
  return {json, csv};
}

// ---------------------------------------------------------------------------

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string dump_csv(const std::vector<EvalResult>& results) {
  std::vector<const EvalResult*> sorted;
  for (const auto& r : results) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const EvalResult* a, const EvalResult* b) { return a->id < b->id; });
  std::string out;
  const auto& cols = dump_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\r\n";
  for (const auto* r : sorted) {
    auto s = r->score();
    auto p = r->passed();
    std::vector<std::string> row = {r->id,
                                    std::string(to_string(r->category)),
                                    std::string(to_string(r->subcategory)),
                                    r->prompt,
                                    r->prediction,
                                    s ? nlohmann::json(*s).dump() : std::string(),
                                    p ? (*p ? "true" : "false") : std::string(),
                                    std::to_string(r->usage.prompt_tokens),
                                    std::to_string(r->usage.completion_tokens),
                                    std::to_string(r->wall_time_ms),
                                    r->error.value_or("")};
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_escape(row[i]);
    out += "\r\n";
  }
  return out;
}

void export_dump(const std::vector<EvalResult>& results, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text_file(path, dump_csv(results));
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) fail(ErrorKind::SchemaError, "unterminated quoted CSV field");
  if (any || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace agentry

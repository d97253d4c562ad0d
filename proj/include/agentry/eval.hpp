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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentry/bench.hpp"
#include "agentry/graders.hpp"
#include "agentry/runtime.hpp"

namespace agentry {

// Per-subcategory sample size; nullopt means every task.
struct SampleSpec {
  std::optional<std::size_t> default_count;
  std::map<Subcategory, std::optional<std::size_t>> per_subcategory;

  std::optional<std::size_t> count_for(Subcategory s) const;
};

struct EvalConfig {
  std::filesystem::path corpus;
  std::filesystem::path agent;
  std::vector<Split> splits = {Split::Public, Split::Private};
  SampleSpec sample;
  std::uint64_t seed = 0;
  std::size_t concurrency = 1;
  // Keyed by subcategory or category name; the subcategory entry wins.
  std::map<std::string, GraderKind> grader_overrides;
  std::optional<ModelSpec> judge;
  GraderSettings grader_settings;
  std::filesystem::path output_dir = "eval_out";
  std::string name = "report";

  void validate() const;
};

// YAML file; relative paths resolve against the file's directory.
EvalConfig load_eval_config(const std::filesystem::path& path, const EnvMap& env = process_env());

struct SampleResult {
  std::vector<BenchTask> tasks;  // grouped by subcategory, corpus order inside each
  std::vector<std::string> warnings;
  std::vector<Subcategory> omitted;  // sample count 0
};

SampleResult sample_tasks(const Corpus& corpus, const EvalConfig& config);

GraderKind grader_for(const BenchTask& task, const EvalConfig& config);

struct EvalResult {
  std::string id;
  Category category = Category::Reasoning;
  Subcategory subcategory = Subcategory::Math;
  std::string prompt;
  std::string prediction;
  std::optional<GraderVerdict> verdict;
  TokenUsage usage;
  std::int64_t llm_calls = 0;
  std::int64_t wall_time_ms = 0;
  std::optional<std::string> error;

  // Errored tasks score 0 and fail; Instructed verdicts have neither.
  std::optional<double> score() const;
  std::optional<bool> passed() const;
};

struct GroupStats {
  std::size_t n = 0;
  std::size_t errors = 0;
  std::optional<double> mean_score;
  std::optional<double> pass_rate;
};

struct EfficiencyStats {
  double mean_prompt_tokens = 0;
  double median_prompt_tokens = 0;
  double mean_completion_tokens = 0;
  double median_completion_tokens = 0;
  double mean_wall_time_ms = 0;
  double median_wall_time_ms = 0;
  double total_cost = 0;
};

struct EvalReport {
  std::string agent_name;
  std::string agent_version;
  std::uint64_t seed = 0;
  std::string timestamp;
  std::vector<EvalResult> results;  // sorted by id
  std::map<Subcategory, GroupStats> subcategories;
  std::map<Category, GroupStats> categories;
  GroupStats overall;
  EfficiencyStats efficiency;
  std::vector<std::string> warnings;
  std::vector<Subcategory> omitted;

  // Everything except the timestamp.
  nlohmann::json aggregates_json() const;
  nlohmann::json to_json() const;
};

// Recomputes every aggregate from the per-instance results.
void aggregate(EvalReport& report);

struct EvalEnvironment {
  std::shared_ptr<const BackendRegistry> backends;
  AssemblyOptions assembly;
  EnvMap env = process_env();
};

// Assembles once up front (AssemblyError aborts), then runs every sampled
// task on its own agent instance across `concurrency` workers.
EvalReport run_eval(const EvalConfig& config, const EvalEnvironment& environment);
EvalReport run_eval(const EvalConfig& config, const Corpus& corpus, const AgentConfig& agent,
                    const EvalEnvironment& environment);

// Writes <output_dir>/<name>.json and <name>.csv; returns both paths.
std::pair<std::filesystem::path, std::filesystem::path> write_eval_outputs(const EvalReport& report,
                                                                           const EvalConfig& config);

inline const std::vector<std::string>& dump_columns() {
  static const std::vector<std::string> cols = {"id",         "category",      "subcategory",       "prompt",
                                                "prediction", "score",         "pass",              "prompt_tokens",
                                                "completion_tokens", "wall_time_ms", "error"};
  return cols;
}

std::string csv_escape(std::string_view field);
std::string dump_csv(const std::vector<EvalResult>& results);
void export_dump(const std::vector<EvalResult>& results, const std::filesystem::path& path);
// RFC 4180 reader; returns rows including the header.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace agentry

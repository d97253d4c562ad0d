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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace agentry {

class AgentInstance;

enum class Category { Reasoning, Knowledge, Safety, Multilingual };
enum class Subcategory {
  Math,
  Coding,
  Planning,
  Commonsense,
  WorldKnowledge,
  DomainKnowledge,
  WebRetrieval,
  Integrity,
  Harmlessness,
  Translation,
  Understanding,
};
enum class GraderKind { Gated, Score, Dojo, Instructed, Code };
enum class Split { Public, Private };

std::string_view to_string(Category c) noexcept;
std::string_view to_string(Subcategory s) noexcept;
std::string_view to_string(GraderKind g) noexcept;
std::string_view to_string(Split s) noexcept;
Category category_from_string(std::string_view text);
Subcategory subcategory_from_string(std::string_view text);
GraderKind grader_kind_from_string(std::string_view text);
Split split_from_string(std::string_view text);

const std::vector<Subcategory>& all_subcategories();
Category category_of(Subcategory s) noexcept;
// Coding -> Code, Safety -> Instructed, everything else -> Gated.
GraderKind default_grader(Subcategory s) noexcept;

struct UnitTest {
  std::string test_id;
  std::string test_source;
  bool operator==(const UnitTest&) const = default;
};

struct BenchTask {
  std::string id;
  Category category = Category::Reasoning;
  Subcategory subcategory = Subcategory::Math;
  std::string prompt;
  std::string reference;       // non-Coding tasks
  std::vector<UnitTest> tests;  // Coding tasks
  GraderKind grader_kind = GraderKind::Gated;
  Split split = Split::Public;
  std::string source;
  std::string grading_instruction;  // Instructed grader

  bool operator==(const BenchTask&) const = default;
};

using Corpus = std::vector<BenchTask>;

nlohmann::json task_to_json(const BenchTask& task);
// `line` is used in SchemaError messages.
BenchTask task_from_json(const nlohmann::json& j, std::size_t line = 0);

// Line-delimited JSON; blank lines and lines starting with '#' are skipped.
Corpus parse_corpus(std::string_view text, const std::string& label = "corpus");
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Challenge filter

enum class FilterOutcome { Kept, Discarded, NeedsReview };
std::string_view to_string(FilterOutcome o) noexcept;

struct FilterTranscript {
  std::string id;
  std::string attempt;
  FilterOutcome outcome = FilterOutcome::NeedsReview;
  std::string reason;  // grading or episode error for NeedsReview
  nlohmann::json trace;
};

struct FilterReport {
  std::vector<std::string> kept;
  std::vector<std::string> discarded;
  std::vector<std::string> needs_review;
  std::vector<FilterTranscript> transcripts;  // corpus order

  nlohmann::json to_json() const;
};

// One fresh base agent per task.
using AgentFactory = std::function<std::shared_ptr<AgentInstance>(const BenchTask&)>;
// True when the attempt solves the task. Throwing sends the task to review.
using TaskJudge = std::function<bool(const BenchTask&, const std::string& attempt)>;

// Kept = tasks the base agent fails. Episode errors and grading errors both
// land in needs_review.
FilterReport challenge_filter(const Corpus& corpus, const AgentFactory& make_agent,
                              const TaskJudge& judge, std::size_t concurrency = 1);

// ---------------------------------------------------------------------------
// Public/private split

struct SplitManifest {
  std::uint64_t seed = 0;
  double public_fraction = 0.5;
  std::vector<std::string> public_ids;   // corpus order
  std::vector<std::string> private_ids;  // corpus order

  nlohmann::json to_json() const;
  static SplitManifest from_json(const nlohmann::json& j);
  bool operator==(const SplitManifest&) const = default;
};

// Stratified per subcategory: each gets round(n * fraction) public tasks.
// InvalidFraction unless 0 < fraction < 1.
SplitManifest split_corpus(const Corpus& corpus, double public_fraction, std::uint64_t seed);
// Sets each task's split field from the manifest.
Corpus apply_split(Corpus corpus, const SplitManifest& manifest);

// Portable Fisher-Yates over mt19937_64 (standard distributions are not
// reproducible across library implementations).
void seeded_shuffle(std::vector<std::size_t>& items, std::mt19937_64& rng);

}  // namespace agentry

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

#include "agentry/bench.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>

#include "agentry/error.hpp"
#include "agentry/parallel.hpp"
#include "agentry/runtime.hpp"
#include "agentry/text.hpp"

namespace agentry {

namespace {

constexpr std::array<std::string_view, 4> kCategoryNames = {"Reasoning", "Knowledge", "Safety",
                                                            "Multilingual"};
constexpr std::array<std::string_view, 11> kSubcategoryNames = {
    "Math",         "Coding",       "Planning",    "Commonsense", "WorldKnowledge", "DomainKnowledge",
    "WebRetrieval", "Integrity",    "Harmlessness", "Translation", "Understanding"};
constexpr std::array<std::string_view, 5> kGraderNames = {"gated", "score", "dojo", "instructed", "code"};

template <typename Enum, std::size_t N>
Enum lookup(const std::array<std::string_view, N>& names, std::string_view text, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (iequals(names[i], text)) return static_cast<Enum>(i);
  }
  fail(ErrorKind::SchemaError, std::string("unknown ") + what + " '" + std::string(text) + "'");
}

[[noreturn]] void schema(std::size_t line, const std::string& what) {
  fail(ErrorKind::SchemaError, (line ? "line " + std::to_string(line) + ": " : std::string()) + what);
}

std::string req_string(const nlohmann::json& j, const char* field, std::size_t line) {
  if (!j.contains(field)) schema(line, std::string("missing field '") + field + "'");
  if (!j.at(field).is_string()) schema(line, std::string("field '") + field + "' must be a string");
  return j.at(field).get<std::string>();
}

}  // namespace

std::string_view to_string(Category c) noexcept { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Subcategory s) noexcept {
  return kSubcategoryNames[static_cast<std::size_t>(s)];
}
std::string_view to_string(GraderKind g) noexcept { return kGraderNames[static_cast<std::size_t>(g)]; }
std::string_view to_string(Split s) noexcept { return s == Split::Public ? "public" : "private"; }

Category category_from_string(std::string_view text) {
  return lookup<Category>(kCategoryNames, text, "category");
}
Subcategory subcategory_from_string(std::string_view text) {
  return lookup<Subcategory>(kSubcategoryNames, text, "subcategory");
}
GraderKind grader_kind_from_string(std::string_view text) {
  return lookup<GraderKind>(kGraderNames, text, "grader");
}
Split split_from_string(std::string_view text) {
  if (iequals(text, "public")) return Split::Public;
  if (iequals(text, "private")) return Split::Private;
  fail(ErrorKind::SchemaError, "unknown split '" + std::string(text) + "'");
}

const std::vector<Subcategory>& all_subcategories() {
  static const std::vector<Subcategory> all = [] {
    std::vector<Subcategory> v;
    for (std::size_t i = 0; i < kSubcategoryNames.size(); ++i) v.push_back(static_cast<Subcategory>(i));
    return v;
  }();
  return all;
}

Category category_of(Subcategory s) noexcept {
  switch (s) {
    case Subcategory::Math:
    case Subcategory::Coding:
    case Subcategory::Planning:
    case Subcategory::Commonsense:
      return Category::Reasoning;
    case Subcategory::WorldKnowledge:
    case Subcategory::DomainKnowledge:
    case Subcategory::WebRetrieval:
      return Category::Knowledge;
    case Subcategory::Integrity:
    case Subcategory::Harmlessness:
      return Category::Safety;
    case Subcategory::Translation:
    case Subcategory::Understanding:
      return Category::Multilingual;
  }
  return Category::Reasoning;
}

GraderKind default_grader(Subcategory s) noexcept {
  if (s == Subcategory::Coding) return GraderKind::Code;
  if (category_of(s) == Category::Safety) return GraderKind::Instructed;
  return GraderKind::Gated;
}

nlohmann::json task_to_json(const BenchTask& t) {
  nlohmann::json j = {{"id", t.id},
                      {"category", to_string(t.category)},
                      {"subcategory", to_string(t.subcategory)},
                      {"prompt", t.prompt}};
  if (t.subcategory == Subcategory::Coding) {
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& u : t.tests) tests.push_back({{"test_id", u.test_id}, {"test_source", u.test_source}});
    j["tests"] = tests;
  } else {
    j["reference"] = t.reference;
  }
  j["grader"] = to_string(t.grader_kind);
  j["split"] = to_string(t.split);
  j["source"] = t.source;
  if (!t.grading_instruction.empty()) j["grading_instruction"] = t.grading_instruction;
  return j;
}

BenchTask task_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) schema(line, "task must be a JSON object");
  BenchTask t;
  t.id = req_string(j, "id", line);
  if (t.id.empty()) schema(line, "field 'id' is empty");
  try {
    t.subcategory = subcategory_from_string(req_string(j, "subcategory", line));
    Category expected = category_of(t.subcategory);
    if (j.contains("category")) {
      t.category = category_from_string(req_string(j, "category", line));
      if (t.category != expected) {
        schema(line, "subcategory " + std::string(to_string(t.subcategory)) + " belongs to " +
                         std::string(to_string(expected)));
      }
    } else {
      t.category = expected;
    }
    t.grader_kind = j.contains("grader") ? grader_kind_from_string(req_string(j, "grader", line))
                                         : default_grader(t.subcategory);
    t.split = j.contains("split") ? split_from_string(req_string(j, "split", line)) : Split::Public;
  } catch (const Error& e) {
    if (line && e.detail().rfind("line ", 0) != 0) schema(line, e.detail());
    throw;
  }
  t.prompt = req_string(j, "prompt", line);
  if (t.subcategory == Subcategory::Coding) {
    if (!j.contains("tests") || !j.at("tests").is_array() || j.at("tests").empty()) {
      schema(line, "Coding task '" + t.id + "' needs a non-empty 'tests' list");
    }
    for (const auto& u : j.at("tests")) {
      if (!u.is_object()) schema(line, "each test must be an object");
      t.tests.push_back({req_string(u, "test_id", line), req_string(u, "test_source", line)});
    }
  } else {
    t.reference = req_string(j, "reference", line);
  }
  if (j.contains("source")) t.source = req_string(j, "source", line);
  if (j.contains("grading_instruction")) t.grading_instruction = req_string(j, "grading_instruction", line);
  return t;
}

Corpus parse_corpus(std::string_view text, const std::string& label) {
  Corpus corpus;
  std::set<std::string> ids;
  std::size_t lineno = 0;
  for (const auto& raw : split_lines(text)) {
    ++lineno;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) fail(ErrorKind::SchemaError, label + ": line " + std::to_string(lineno) + ": invalid JSON");
    BenchTask task;
    try {
      task = task_from_json(j, lineno);
    } catch (const Error& e) {
      fail(ErrorKind::SchemaError, label + ": " + e.detail());
    }
    if (!ids.insert(task.id).second) {
      fail(ErrorKind::SchemaError, label + ": line " + std::to_string(lineno) + ": duplicate id '" + task.id + "'");
    }
    corpus.push_back(std::move(task));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_text_file(path), path.string());
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const auto& t : corpus) out += task_to_json(t).dump() + "\n";
  write_text_file(path, out);
}

// ---------------------------------------------------------------------------

std::string_view to_string(FilterOutcome o) noexcept {
  switch (o) {
    case FilterOutcome::Kept: return "kept";
    case FilterOutcome::Discarded: return "discarded";
    case FilterOutcome::NeedsReview: return "needs_review";
  }
  return "needs_review";
}

nlohmann::json FilterReport::to_json() const {
  nlohmann::json ts = nlohmann::json::array();
  for (const auto& t : transcripts) {
    nlohmann::json j = {{"id", t.id}, {"outcome", to_string(t.outcome)}, {"attempt", t.attempt}};
    if (!t.reason.empty()) j["reason"] = t.reason;
    if (!t.trace.is_null()) j["trace"] = t.trace;
    ts.push_back(std::move(j));
  }
  return {{"kept", kept}, {"discarded", discarded}, {"needs_review", needs_review}, {"transcripts", ts}};
}

FilterReport challenge_filter(const Corpus& corpus, const AgentFactory& make_agent,
                              const TaskJudge& judge, std::size_t concurrency) {
  std::vector<FilterTranscript> transcripts(corpus.size());
  parallel_for(corpus.size(), concurrency, [&](std::size_t i) {
    const BenchTask& task = corpus[i];
    FilterTranscript& out = transcripts[i];
    out.id = task.id;
    try {
      auto agent = make_agent(task);
      EpisodeTrace trace = agent->run(task.prompt);
      out.trace = trace.to_json(false);
      out.attempt = trace.answer;
      if (!trace.ok()) {
        out.reason = "episode error: " + std::string(to_string(trace.error->kind)) + ": " + trace.error->message;
        return;
      }
    } catch (const std::exception& e) {
      out.reason = std::string("episode error: ") + e.what();
      return;
    }
    try {
      out.outcome = judge(task, out.attempt) ? FilterOutcome::Discarded : FilterOutcome::Kept;
    } catch (const std::exception& e) {
      out.outcome = FilterOutcome::NeedsReview;
      out.reason = std::string("grading error: ") + e.what();
    }
  });
  FilterReport report;
  for (auto& t : transcripts) {
    switch (t.outcome) {
      case FilterOutcome::Kept: report.kept.push_back(t.id); break;
      case FilterOutcome::Discarded: report.discarded.push_back(t.id); break;
      case FilterOutcome::NeedsReview: report.needs_review.push_back(t.id); break;
    }
  }
  report.transcripts = std::move(transcripts);
  return report;
}

// ---------------------------------------------------------------------------

nlohmann::json SplitManifest::to_json() const {
  return {{"seed", seed}, {"public_fraction", public_fraction}, {"public", public_ids}, {"private", private_ids}};
}

SplitManifest SplitManifest::from_json(const nlohmann::json& j) {
  SplitManifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.public_fraction = j.at("public_fraction").get<double>();
    m.public_ids = j.at("public").get<std::vector<std::string>>();
    m.private_ids = j.at("private").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("split manifest: ") + e.what());
  }
  return m;
}

void seeded_shuffle(std::vector<std::size_t>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

SplitManifest split_corpus(const Corpus& corpus, double public_fraction, std::uint64_t seed) {
  if (!(public_fraction > 0.0 && public_fraction < 1.0)) {
    fail(ErrorKind::InvalidFraction, "public fraction must lie strictly between 0 and 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> is_public(corpus.size(), false);
  for (Subcategory sub : all_subcategories()) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].subcategory == sub) members.push_back(i);
    }
    if (members.empty()) continue;
    seeded_shuffle(members, rng);
    auto n_public = static_cast<std::size_t>(std::lround(static_cast<double>(members.size()) * public_fraction));
    for (std::size_t k = 0; k < n_public; ++k) is_public[members[k]] = true;
  }
  SplitManifest m;
  m.seed = seed;
  m.public_fraction = public_fraction;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (is_public[i] ? m.public_ids : m.private_ids).push_back(corpus[i].id);
  }
  return m;
}

Corpus apply_split(Corpus corpus, const SplitManifest& manifest) {
  std::set<std::string> pub(manifest.public_ids.begin(), manifest.public_ids.end());
  std::set<std::string> priv(manifest.private_ids.begin(), manifest.private_ids.end());
  for (auto& t : corpus) {
    if (pub.count(t.id)) {
      t.split = Split::Public;
    } else if (priv.count(t.id)) {
      t.split = Split::Private;
    }
  }
  return corpus;
}

}  // namespace agentry

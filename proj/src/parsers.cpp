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

#include <regex>

#include "agentry/runtime.hpp"
#include "agentry/text.hpp"

namespace agentry {
namespace {

// Position of `marker` at the start of a line (leading spaces allowed),
// case-insensitive. Returns the offset just past the marker.
std::optional<std::pair<std::size_t, std::size_t>> find_marker(std::string_view text,
                                                               std::string_view marker,
                                                               std::size_t from = 0) {
  std::size_t line_start = from;
  while (line_start <= text.size()) {
    std::size_t i = line_start;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (starts_with_ci(text.substr(i), marker)) return std::make_pair(i, i + marker.size());
    std::size_t nl = text.find('\n', line_start);
    if (nl == std::string_view::npos) break;
    line_start = nl + 1;
  }
  return std::nullopt;
}

std::string_view rest_of_line(std::string_view text, std::size_t from) {
  std::size_t nl = text.find('\n', from);
  return trim(text.substr(from, nl == std::string_view::npos ? std::string_view::npos : nl - from));
}

[[noreturn]] void malformed(std::string_view why, std::string_view text) {
  fail(ErrorKind::MalformedModelOutput, std::string(why) + ": \"" + std::string(text) + "\"");
}

}  // namespace

ReActStep parse_react(std::string_view completion) {
  auto thought = find_marker(completion, "Thought:");
  if (!thought) malformed("missing 'Thought:'", completion);
  auto action = find_marker(completion, "Action:", thought->second);
  auto final_answer = find_marker(completion, "Final Answer:", thought->second);

  ReActStep step;
  bool use_action = action && (!final_answer || action->first < final_answer->first);
  std::size_t thought_end = use_action ? action->first
                            : final_answer ? final_answer->first
                                           : completion.size();
  step.thought = std::string(trim(completion.substr(thought->second, thought_end - thought->second)));

  if (use_action) {
    ReActAction a;
    a.tool = std::string(rest_of_line(completion, action->second));
    if (a.tool.empty()) malformed("empty 'Action:'", completion);
    auto input = find_marker(completion, "Action Input:", action->second);
    if (!input) malformed("missing 'Action Input:'", completion);
    a.input = std::string(rest_of_line(completion, input->second));
    step.action = std::move(a);
    return step;
  }
  if (final_answer) {
    step.final_answer = std::string(trim(completion.substr(final_answer->second)));
    return step;
  }
  malformed("expected 'Action:' or 'Final Answer:'", completion);
}

RewooPlan parse_rewoo_plan(std::string_view completion) {
  static const std::regex step_re(R"(^#E(\d+)\s*=\s*([A-Za-z_][A-Za-z0-9_\-]*)\s*\[(.*)\]\s*$)");
  static const std::regex ref_re(R"(#E(\d+))");
  RewooPlan plan;
  std::string pending_plan;
  for (const auto& raw : split_lines(completion)) {
    std::string line(trim(raw));
    if (line.empty()) continue;
    if (starts_with_ci(line, "Plan:")) {
      pending_plan = std::string(trim(std::string_view(line).substr(5)));
      continue;
    }
    if (line.rfind("#E", 0) != 0) continue;
    std::smatch m;
    if (!std::regex_match(line, m, step_re)) malformed("bad plan line", line);
    int id = std::stoi(m[1].str());
    int expected = static_cast<int>(plan.steps.size()) + 1;
    if (id != expected) {
      malformed("evidence ids must run #E1..#En; expected #E" + std::to_string(expected), line);
    }
    RewooStep step;
    step.evidence_id = "#E" + m[1].str();
    step.tool = m[2].str();
    step.input = m[3].str();
    step.plan = std::move(pending_plan);
    pending_plan.clear();
    std::string in = step.input;
    for (std::sregex_iterator it(in.begin(), in.end(), ref_re), end; it != end; ++it) {
      int ref = std::stoi((*it)[1].str());
      if (ref >= id) {
        fail(ErrorKind::PlanReferenceError,
             step.evidence_id + " references #E" + std::to_string(ref) + " before it exists");
      }
      step.depends_on.push_back(ref);
    }
    plan.steps.push_back(std::move(step));
  }
  if (plan.steps.empty()) malformed("plan has no #E steps", completion);
  return plan;
}

std::string substitute_evidence(std::string_view input, const std::vector<std::string>& evidence) {
  static const std::regex ref_re(R"(#E(\d+))");
  std::string in(input);
  std::string out;
  std::size_t last = 0;
  for (std::sregex_iterator it(in.begin(), in.end(), ref_re), end; it != end; ++it) {
    const auto& m = *it;
    std::size_t idx = std::stoul(m[1].str());
    if (idx == 0 || idx > evidence.size()) {
      fail(ErrorKind::PlanReferenceError, m.str() + " is undefined");
    }
    out.append(in, last, static_cast<std::size_t>(m.position()) - last);
    out += evidence[idx - 1];
    last = static_cast<std::size_t>(m.position() + m.length());
  }
  out.append(in, last);
  return out;
}

}  // namespace agentry

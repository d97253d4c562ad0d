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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentry/tools.hpp"

namespace agentry {

// Infix arithmetic: + - * / (also × ÷ −), parentheses, decimals, unary
// sign. Left-associative with the usual precedence. Division by zero and
// syntax errors throw InvalidInput.
double evaluate_expression(std::string_view expression);
// Integral values print without a fraction; others with up to 15
// significant digits.
std::string format_number(double value);

struct SearchFixture {
  std::string query;
  std::string snippet;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string final_url;
};
// HTTP/1.1 GET following at most `max_redirects` redirects.
HttpResponse http_get(const std::string& url, int max_redirects = 3, int timeout_ms = 10000);

struct BuiltinToolEnv {
  std::filesystem::path sandbox_root = ".";
  std::vector<SearchFixture> search_fixtures;
  // url -> HTML; when non-empty web_page_fetch never touches the network.
  std::map<std::string, std::string> page_fixtures;
};

// {"results": [{"query": "...", "snippet": "..."}], "pages": {"url": "<html>"}}
BuiltinToolEnv load_tool_fixtures(const std::filesystem::path& path,
                                  std::filesystem::path sandbox_root = ".");

std::vector<std::string> builtin_tool_names();
bool is_builtin_tool(std::string_view name);
// Throws UnknownTool.
Tool make_builtin_tool(std::string_view name, const BuiltinToolEnv& env);

struct CustomToolStep {
  enum class Kind { Template, Fetch, Transform } kind = Kind::Template;
  std::string argument;
  bool operator==(const CustomToolStep&) const = default;
};

// A declarative tool from a companion tool file: the input flows through the
// steps in order. Template renders `{input}` and named arguments; Fetch GETs
// the rendered URL and keeps the visible page text; Transform is one of
// upper, lower, trim, strip_tags, first_line, truncate:N.
struct CustomToolDef {
  std::string name;
  std::string description;
  std::vector<CustomToolStep> steps;
  bool operator==(const CustomToolDef&) const = default;
};

std::map<std::string, CustomToolDef> load_tool_file(const std::filesystem::path& path);
Tool make_custom_tool(const CustomToolDef& def, const BuiltinToolEnv& env);

}  // namespace agentry

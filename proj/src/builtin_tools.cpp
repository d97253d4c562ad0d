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

#include "agentry/builtin_tools.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include <yaml-cpp/yaml.h>

#include "agentry/chat_client.hpp"
#include "agentry/error.hpp"
#include "agentry/prompt.hpp"
#include "agentry/text.hpp"
#include "httplib.h"

namespace agentry {
namespace {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string text) : s_(std::move(text)) {}

  double parse() {
    double v = expr();
    skip_ws();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::InvalidInput, what + " at position " + std::to_string(pos_));
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) {
        v += term();
      } else if (eat('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }
  double term() {
    double v = factor();
    for (;;) {
      if (eat('*')) {
        v *= factor();
      } else if (eat('/')) {
        double d = factor();
        if (d == 0.0) fail(ErrorKind::InvalidInput, "division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }
  double factor() {
    if (++depth_ > 256) error("expression nested too deeply");
    double v;
    if (eat('-')) {
      v = -factor();
    } else if (eat('+')) {
      v = factor();
    } else {
      v = primary();
    }
    --depth_;
    return v;
  }
  double primary() {
    if (eat('(')) {
      double v = expr();
      if (!eat(')')) error("expected ')'");
      return v;
    }
    skip_ws();
    std::size_t start = pos_;
    bool digits = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
      digits = true;
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
        digits = true;
      }
    }
    if (!digits) {
      if (pos_ >= s_.size()) error("unexpected end of expression");
      error("expected a number");
    }
    return std::stod(s_.substr(start, pos_ - start));
  }

  std::string s_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

std::string normalize_operators(std::string_view in) {
  std::string s(in);
  s = replace_all(std::move(s), "\xC3\x97", "*");      // ×
  s = replace_all(std::move(s), "\xC3\xB7", "/");      // ÷
  s = replace_all(std::move(s), "\xE2\x88\x92", "-");  // −
  return s;
}

std::set<std::string> word_set(std::string_view text) {
  std::set<std::string> out;
  std::string cleaned;
  for (char c : text) {
    cleaned += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c)) : ' ';
  }
  for (auto w : split_units(cleaned)) out.emplace(w);
  return out;
}

std::filesystem::path resolve_in_sandbox(const std::filesystem::path& root, std::string_view rel) {
  namespace fs = std::filesystem;
  fs::path base = fs::weakly_canonical(fs::absolute(root));
  fs::path target = fs::weakly_canonical(base / fs::path(std::string(trim(rel))));
  auto [b, t] = std::mismatch(base.begin(), base.end(), target.begin(), target.end());
  if (b != base.end()) fail(ErrorKind::InvalidInput, "path escapes the sandbox root");
  return target;
}

std::string apply_transform(const std::string& op, const std::string& value) {
  if (op == "upper") return to_upper(value);
  if (op == "lower") return to_lower(value);
  if (op == "trim") return std::string(trim(value));
  if (op == "strip_tags") return html_to_text(value);
  if (op == "first_line") {
    auto lines = split_lines(value);
    return lines.empty() ? std::string{} : lines.front();
  }
  if (op.rfind("truncate:", 0) == 0) {
    std::size_t n = std::stoul(op.substr(9));
    return truncate_utf8(value, n);
  }
  fail(ErrorKind::InvalidConfig, "unknown transform '" + op + "'");
}

std::string fetch_page_text(const std::string& url, const BuiltinToolEnv& env) {
  if (!env.page_fixtures.empty()) {
    auto it = env.page_fixtures.find(url);
    if (it == env.page_fixtures.end()) fail(ErrorKind::InvalidInput, "no page fixture for " + url);
    return html_to_text(it->second);
  }
  HttpResponse r = http_get(url);
  if (r.status < 200 || r.status >= 300) {
    fail(ErrorKind::InvalidInput, "GET " + url + " returned status " + std::to_string(r.status));
  }
  return html_to_text(r.body);
}

}  // namespace

double evaluate_expression(std::string_view expression) {
  std::string s = normalize_operators(expression);
  if (trim(s).empty()) fail(ErrorKind::InvalidInput, "empty expression");
  return ExpressionParser(std::move(s)).parse();
}

std::string format_number(double value) {
  if (!std::isfinite(value)) fail(ErrorKind::InvalidInput, "result is not finite");
  if (value == 0.0) return "0";
  if (std::nearbyint(value) == value && std::fabs(value) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", value);
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", value);
  return buf;
}

HttpResponse http_get(const std::string& url, int max_redirects, int timeout_ms) {
  std::string current = url;
  for (int hop = 0;; ++hop) {
    ParsedUrl u = parse_url(current);
    httplib::Client client(u.scheme + "://" + u.host + ":" + std::to_string(u.port));
    client.set_connection_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    client.set_follow_location(false);
    auto res = client.Get(u.path);
    if (!res) fail(ErrorKind::TransportError, "GET " + current + ": " + httplib::to_string(res.error()));
    bool redirect = res->status >= 300 && res->status < 400 && res->has_header("Location");
    if (!redirect) return {res->status, res->body, current};
    if (hop >= max_redirects) {
      fail(ErrorKind::TransportError, "too many redirects from " + url);
    }
    std::string location = res->get_header_value("Location");
    if (location.rfind("http://", 0) == 0 || location.rfind("https://", 0) == 0) {
      current = location;
    } else {
      std::string origin = u.scheme + "://" + u.host + ":" + std::to_string(u.port);
      if (location.empty() || location[0] != '/') {
        std::string dir = u.path.substr(0, u.path.rfind('/') + 1);
        location = dir + location;
      }
      current = origin + location;
    }
  }
}

BuiltinToolEnv load_tool_fixtures(const std::filesystem::path& path,
                                  std::filesystem::path sandbox_root) {
  BuiltinToolEnv env;
  env.sandbox_root = std::move(sandbox_root);
  nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::SyntaxError, path.string() + " is not valid JSON");
  nlohmann::json results = j.value("results", nlohmann::json::array());
  nlohmann::json pages = j.value("pages", nlohmann::json::object());
  for (const auto& r : results) {
    env.search_fixtures.push_back({r.at("query").get<std::string>(), r.at("snippet").get<std::string>()});
  }
  for (const auto& [url, html] : pages.items()) {
    env.page_fixtures[url] = html.get<std::string>();
  }
  return env;
}

std::vector<std::string> builtin_tool_names() {
  return {"calculator", "file_reader", "mock_search", "web_page_fetch"};
}

bool is_builtin_tool(std::string_view name) {
  for (const auto& n : builtin_tool_names()) {
    if (n == name) return true;
  }
  return false;
}

Tool make_builtin_tool(std::string_view name, const BuiltinToolEnv& env) {
  if (name == "calculator") {
    ToolDescriptor d{"calculator",
                     "Evaluates an arithmetic expression with + - * / and parentheses, "
                     "e.g. 2*(3+4). Input is the expression.",
                     true,
                     {{"expression", "string", "The arithmetic expression.", true}},
                     false};
    return Tool::simple(std::move(d), [](const ToolInput& in) {
      std::string expr = in.text;
      if (in.args.is_object() && in.args.contains("expression")) expr = in.args["expression"];
      return format_number(evaluate_expression(expr));
    });
  }
  if (name == "file_reader") {
    ToolDescriptor d{"file_reader",
                     "Reads a text file from the workspace. Input is a relative path.",
                     true,
                     {{"path", "string", "Path relative to the workspace root.", true}},
                     false};
    auto root = env.sandbox_root;
    return Tool::simple(std::move(d), [root](const ToolInput& in) {
      std::string rel = in.text;
      if (in.args.is_object() && in.args.contains("path")) rel = in.args["path"];
      auto target = resolve_in_sandbox(root, rel);
      if (!std::filesystem::is_regular_file(target)) {
        fail(ErrorKind::FileNotFound, std::string(trim(rel)));
      }
      return read_text_file(target);
    });
  }
  if (name == "mock_search") {
    ToolDescriptor d{"mock_search",
                     "Searches the web and returns the best matching snippet. Input is a search query.",
                     true,
                     {{"query", "string", "The search query.", true}},
                     false};
    auto fixtures = env.search_fixtures;
    return Tool::simple(std::move(d), [fixtures](const ToolInput& in) {
      std::string q = in.text;
      if (in.args.is_object() && in.args.contains("query")) q = in.args["query"];
      auto qwords = word_set(q);
      const SearchFixture* best = nullptr;
      std::size_t best_overlap = 0;
      for (const auto& f : fixtures) {
        if (iequals(trim(f.query), trim(q))) return f.snippet;
        std::size_t overlap = 0;
        for (const auto& w : word_set(f.query)) overlap += qwords.count(w);
        if (overlap > best_overlap) {
          best_overlap = overlap;
          best = &f;
        }
      }
      return best ? best->snippet : std::string("No results found.");
    });
  }
  if (name == "web_page_fetch") {
    ToolDescriptor d{"web_page_fetch",
                     "Fetches a web page and returns its visible text. Input is the URL.",
                     true,
                     {{"url", "string", "Absolute http(s) URL.", true}},
                     false};
    auto env_copy = env;
    return Tool::simple(std::move(d), [env_copy](const ToolInput& in) {
      std::string url(trim(in.text));
      if (in.args.is_object() && in.args.contains("url")) url = in.args["url"];
      return fetch_page_text(url, env_copy);
    });
  }
  fail(ErrorKind::UnknownTool, std::string(name));
}

std::map<std::string, CustomToolDef> load_tool_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::FileNotFound, path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::SyntaxError, path.string() + ": " + e.what());
  }
  std::map<std::string, CustomToolDef> out;
  for (const auto& node : root["tools"]) {
    CustomToolDef def;
    if (!node["name"]) fail(ErrorKind::MissingField, path.string() + ": tools[].name");
    def.name = node["name"].as<std::string>();
    def.description = node["description"].as<std::string>("");
    if (def.description.empty()) fail(ErrorKind::MissingField, def.name + ".description");
    for (const auto& step : node["steps"]) {
      CustomToolStep s;
      if (step["template"]) {
        s.kind = CustomToolStep::Kind::Template;
        s.argument = step["template"].as<std::string>();
      } else if (step["fetch"]) {
        s.kind = CustomToolStep::Kind::Fetch;
        s.argument = step["fetch"].as<std::string>();
      } else if (step["transform"]) {
        s.kind = CustomToolStep::Kind::Transform;
        s.argument = step["transform"].as<std::string>();
        apply_transform(s.argument, "");
      } else {
        fail(ErrorKind::InvalidConfig, def.name + ": step must be template, fetch or transform");
      }
      def.steps.push_back(std::move(s));
    }
    out[def.name] = std::move(def);
  }
  return out;
}

Tool make_custom_tool(const CustomToolDef& def, const BuiltinToolEnv& env) {
  ToolDescriptor d{def.name, def.description, true, {}, false};
  return Tool::simple(std::move(d), [def, env](const ToolInput& in) {
    std::string value = in.text;
    auto bindings_for = [&](const std::string& current) {
      Bindings b{{"input", current}};
      if (in.args.is_object()) {
        for (const auto& [k, v] : in.args.items()) b[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
      return b;
    };
    for (const auto& step : def.steps) {
      switch (step.kind) {
        case CustomToolStep::Kind::Template:
          value = render(PromptTemplate::from_text(step.argument), bindings_for(value),
                         RenderMode::Lenient);
          break;
        case CustomToolStep::Kind::Fetch: {
          std::string url = render(PromptTemplate::from_text(step.argument), bindings_for(value),
                                   RenderMode::Lenient);
          value = fetch_page_text(std::string(trim(url)), env);
          break;
        }
        case CustomToolStep::Kind::Transform:
          value = apply_transform(step.argument, value);
          break;
      }
    }
    return value;
  });
}

}  // namespace agentry

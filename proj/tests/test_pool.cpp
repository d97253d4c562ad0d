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

#include <thread>

#include "agentry/config.hpp"
#include "agentry/pool.hpp"
#include "agentry/runtime.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace agentry;
using namespace agentry::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("templates are discovered") {
  TempDir dir;
  AgentPool pool(dir.path(), templates_dir());
  CHECK(pool.templates() == std::vector<std::string>{"openai_memory_template", "openai_template", "react_template",
                                                     "rewoo_template", "vanilla_template"});
}

TEST_CASE("cloning a template copies companion files and renames") {
  TempDir dir;
  AgentPool pool(dir / "pool", templates_dir());
  auto entry = pool.clone("react_template", "my_agent");
  CHECK(entry.name == "my_agent");
  CHECK(entry.agent_type == "react");
  for (const char* f : {"agent.yaml", "prompt.yaml", "tool.yaml", "wiki.md"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(dir / "pool/my_agent" / f));
  }
  auto config = load_agent_config(dir / "pool/my_agent/agent.yaml", {});
  CHECK(config.name == "my_agent");
  auto original = load_agent_config(templates_dir() / "react_template/agent.yaml", {});
  config.name = original.name;
  CHECK(config == original);
  CHECK_NOTHROW(assemble_agent(load_agent_config(dir / "pool/my_agent/agent.yaml", {}),
                               registry_with(std::make_shared<EchoBackend>())));

  auto again = pool.clone("my_agent", "second");
  CHECK(again.name == "second");
  CHECK(read_text_file(dir / "pool/second/prompt.yaml") == read_text_file(dir / "pool/my_agent/prompt.yaml"));
}

TEST_CASE("pool errors") {
  TempDir dir;
  AgentPool pool(dir.path(), templates_dir());
  pool.create("x");
  CHECK(kind_of([&] { pool.create("x"); }) == ErrorKind::NameCollision);
  CHECK(kind_of([&] { pool.clone("vanilla_template", "x"); }) == ErrorKind::NameCollision);
  CHECK(kind_of([&] { pool.remove("ghost"); }) == ErrorKind::NotFound);
  CHECK(kind_of([&] { pool.clone("no_such_template", "y"); }) == ErrorKind::UnknownTemplate);
  CHECK(kind_of([&] { pool.create("y", std::string("no_such_template")); }) == ErrorKind::UnknownTemplate);
  CHECK(kind_of([&] { pool.create("../escape"); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([&] { pool.create(""); }) == ErrorKind::InvalidInput);
  try {
    pool.remove("ghost");
  } catch (const Error& e) {
    CHECK(e.detail().find("not found") != std::string::npos);
  }
}

TEST_CASE("create writes a runnable agent and the manifest lists entries") {
  TempDir dir;
  AgentPool pool(dir.path(), templates_dir());
  auto e = pool.create("helper");
  CHECK(e.agent_type == "vanilla");
  auto config = load_agent_config(dir / "helper/agent.yaml", {});
  CHECK(config.name == "helper");
  pool.create("alpha", std::string("openai_template"));
  auto listed = pool.list();
  REQUIRE(listed.size() == 2);
  CHECK(listed[0].name == "alpha");
  CHECK(listed[1].name == "helper");
  CHECK(pool.find("alpha")->agent_type == "openai");
  CHECK_FALSE(pool.find("zzz"));

  auto lines = split_lines(read_text_file(pool.manifest_path()));
  std::erase_if(lines, [](const std::string& l) { return l.empty(); });
  REQUIRE(lines.size() == 2);
  auto first = nlohmann::json::parse(lines[0]);
  CHECK(first["name"] == "alpha");
  CHECK(first["path"] == "alpha");
  CHECK(first.contains("version"));
  CHECK(first.contains("description"));

  pool.remove("alpha");
  CHECK_FALSE(std::filesystem::exists(dir / "alpha"));
  CHECK(pool.list().size() == 1);
}

TEST_CASE("clone then delete restores the manifest byte for byte") {
  TempDir dir;
  AgentPool pool(dir.path(), templates_dir());
  pool.clone("vanilla_template", "a");
  pool.clone("rewoo_template", "c");
  std::string before = read_text_file(pool.manifest_path());
  for (const auto& t : pool.templates()) {
    CAPTURE(t);
    pool.clone(t, "b");
    CHECK(read_text_file(pool.manifest_path()) != before);
    pool.remove("b");
    CHECK(read_text_file(pool.manifest_path()) == before);
  }
}

TEST_CASE("concurrent mutations serialize") {
  TempDir dir;
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      AgentPool pool(dir.path(), templates_dir());
      pool.clone("vanilla_template", "agent" + std::to_string(i));
    });
  }
  for (auto& t : threads) t.join();
  AgentPool pool(dir.path(), templates_dir());
  CHECK(pool.list().size() == 8);
  auto lines = split_lines(read_text_file(pool.manifest_path()));
  std::erase_if(lines, [](const std::string& l) { return l.empty(); });
  CHECK(lines.size() == 8);
}

TEST_CASE("name rewriting touches only the top-level key") {
  std::string yaml = "# header\nname: old\nversion: 1\nplugins:\n  - agent:\n      name: inner\n";
  std::string out = rewrite_name_field(yaml, "fresh");
  CHECK(out == "# header\nname: fresh\nversion: 1\nplugins:\n  - agent:\n      name: inner\n");
  CHECK(rewrite_name_field("version: 1\n", "n").find("name: n") != std::string::npos);
}

TEST_CASE("read_pool_entry does not resolve tags") {
  TempDir dir;
  dir.write("e/agent.yaml", "name: e\nversion: 2\ntype: react\ndescription: !env NOPE\nllm: {model_name: m}\n");
  dir.write("e/wiki.md", "# e\n");
  auto entry = read_pool_entry(dir / "e");
  CHECK(entry.name == "e");
  CHECK(entry.version == "2");
  CHECK(entry.wiki == "# e\n");
}

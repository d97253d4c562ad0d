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

#include <chrono>

#include "agentry/graders.hpp"
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

Judge judge_with(std::shared_ptr<Backend> backend) {
  Judge j;
  j.backends = registry_with(std::move(backend));
  j.spec.model_name = "judge";
  return j;
}

Judge judge_saying(const std::string& text) {
  return judge_with(ScriptedBackend::with_rules({{"", ScriptedReply::text(text)}}));
}

BenchTask task_of(Subcategory sub, std::string reference = "4") {
  BenchTask t;
  t.id = "t";
  t.subcategory = sub;
  t.category = category_of(sub);
  t.prompt = "What is 2+2?";
  t.reference = std::move(reference);
  t.grader_kind = default_grader(sub);
  return t;
}

const std::vector<UnitTest> kAddTests = {{"add", "assert add(1, 2) == 3"}};

}  // namespace

TEST_CASE("gated grader") {
  CHECK(grade_gated(judge_saying("CORRECT"), "q", "4", "4"));
  CHECK_FALSE(grade_gated(judge_saying("The answer is incorrect."), "q", "4", "5"));
  CHECK(grade_gated(judge_saying("verdict: correct"), "q", "4", "4"));
  GatedOptions exact;
  exact.exact_match = true;
  auto calls = ScriptedBackend::with_rules({{"", ScriptedReply::text("INCORRECT")}});
  CHECK(grade_gated(judge_with(calls), "q", "4", " 4 ", exact));
  CHECK_FALSE(grade_gated(judge_with(calls), "q", "4", "5", exact));
  CHECK(calls->calls() == 0);
  CHECK(kind_of([] { grade_gated(judge_saying("maybe"), "q", "4", "4"); }) == ErrorKind::UnparseableVerdict);
}

TEST_CASE("score grader") {
  CHECK(grade_score(judge_saying("Score: 87"), "q", "r", "p") == doctest::Approx(0.87));
  CHECK(grade_score(judge_saying("1"), "q", "r", "p") == 1.0);
  CHECK(grade_score(judge_saying("0.25 overall"), "q", "r", "p") == 0.25);
  CHECK(grade_score(judge_saying("250"), "q", "r", "p") == 1.0);
  CHECK(grade_score(judge_saying("-3"), "q", "r", "p") == 0.0);
  CHECK(kind_of([] { grade_score(judge_saying("no number here"), "q", "r", "p"); }) ==
        ErrorKind::UnparseableVerdict);
}

TEST_CASE("property: parsed scores stay in the unit interval") {
  for (int i = -50; i <= 500; i += 7) {
    double s = parse_score("score " + std::to_string(i) + ".5");
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("dojo grader") {
  CHECK(grade_dojo_presented(judge_saying("A"), "q", "x", "y", false) == DojoOutcome::A);
  CHECK(grade_dojo_presented(judge_saying("A"), "q", "x", "y", true) == DojoOutcome::B);
  CHECK(grade_dojo_presented(judge_saying("TIE"), "q", "x", "y", true) == DojoOutcome::Tie);
  CHECK(grade_dojo_presented(judge_saying("tie"), "q", "x", "y", false) == DojoOutcome::Tie);
  CHECK(kind_of([] { grade_dojo_presented(judge_saying("neither"), "q", "x", "y", false); }) ==
        ErrorKind::UnparseableVerdict);
  CHECK(parse_dojo("Answer: B is better") == DojoOutcome::B);
}

TEST_CASE("property: dojo verdicts are presentation invariant") {
  // Judge prefers whichever candidate contains GOOD.
  auto prefers_good = judge_with(ScriptedBackend::with_rules(
      {{"Candidate A:\\nGOOD", ScriptedReply::text("A")}, {"Candidate B:\\nGOOD", ScriptedReply::text("B")},
       {"", ScriptedReply::text("TIE")}}));
  CHECK(grade_dojo_presented(prefers_good, "q", "GOOD one", "bad one", false) == DojoOutcome::A);
  CHECK(grade_dojo_presented(prefers_good, "q", "GOOD one", "bad one", true) == DojoOutcome::A);
  CHECK(grade_dojo_presented(prefers_good, "q", "bad one", "GOOD one", false) == DojoOutcome::B);
  CHECK(grade_dojo_presented(prefers_good, "q", "bad one", "GOOD one", true) == DojoOutcome::B);
  int swapped = 0;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    swapped += dojo_presentation_swapped(seed) ? 1 : 0;
    CHECK(dojo_presentation_swapped(seed) == dojo_presentation_swapped(seed));
    CHECK(grade_dojo(prefers_good, "q", "GOOD", "bad", seed) == DojoOutcome::A);
    CHECK(grade_dojo(prefers_good, "q", "meh", "meh", seed) == DojoOutcome::Tie);
  }
  CHECK(swapped > 0);
  CHECK(swapped < 64);
}

TEST_CASE("instructed grader") {
  auto echo = judge_with(std::make_shared<EchoBackend>());
  std::string out = grade_instructed(echo, "Check for rudeness.", "task", "response");
  CHECK(out.find("Check for rudeness.") != std::string::npos);
  CHECK(out.find("response") != std::string::npos);
  CHECK(kind_of([&] { grade_instructed(echo, "  ", "task", "response"); }) == ErrorKind::InvalidInput);

  auto task = task_of(Subcategory::Integrity);
  task.grading_instruction = "Flag any fabricated citation.";
  auto v = grade_task(GraderKind::Instructed, task, "answer", echo);
  CHECK_FALSE(v.pass.has_value());
  CHECK_FALSE(v.score.has_value());
  CHECK(v.text == grade_instructed(echo, task.grading_instruction, task.prompt, "answer"));
  CHECK(v.to_json()["text"] == v.text);
}

TEST_CASE("grade_task maps every kind") {
  auto g = grade_task(GraderKind::Gated, task_of(Subcategory::Math), "4", judge_saying("CORRECT"));
  CHECK(g.pass == true);
  CHECK(g.score == 1.0);
  auto s = grade_task(GraderKind::Score, task_of(Subcategory::Math), "4", judge_saying("50"));
  CHECK(s.score == 0.5);
  CHECK(s.pass == true);
  auto s2 = grade_task(GraderKind::Score, task_of(Subcategory::Math), "4", judge_saying("49"));
  CHECK(s2.pass == false);
  auto d = grade_task(GraderKind::Dojo, task_of(Subcategory::Translation), "x", judge_saying("TIE"));
  CHECK(d.dojo == DojoOutcome::Tie);
  CHECK(d.score == 0.5);
  CHECK(d.pass == true);
  auto j = g.to_json();
  CHECK(j["kind"] == "gated");
  CHECK(j["pass"] == true);
}

TEST_CASE("code extraction") {
  CHECK(extract_code("def f(): pass") == "def f(): pass");
  CHECK(extract_code("Here:\n```python\ndef f():\n    return 1\n```\nDone") == "def f():\n    return 1\n");
}

TEST_CASE("code grader examples") {
  auto v = grade_code("def add(a, b):\n    return a + b\n", kAddTests);
  CHECK(v.pass_fraction == 1.0);
  REQUIRE(v.per_test.size() == 1);
  CHECK(v.per_test[0].outcome == TestOutcome::Pass);

  std::vector<UnitTest> two = {{"one", "assert add(1, 2) == 3"}, {"two", "assert add(2, 2) == 5"}};
  auto half = grade_code("def add(a, b):\n    return a + b\n", two);
  CHECK(half.pass_fraction == 0.5);
  CHECK(half.per_test[1].outcome == TestOutcome::Fail);
  CHECK(half.per_test[1].output.find("AssertionError") != std::string::npos);

  auto bad = grade_code("def add(a, b) return a + b\n", two);
  CHECK(bad.pass_fraction == 0.0);
  for (const auto& t : bad.per_test) {
    CHECK(t.outcome == TestOutcome::Fail);
    CHECK(t.output.find("SyntaxError") != std::string::npos);
  }

  CodeLimits limits;
  limits.timeout = std::chrono::milliseconds(2000);
  auto start = std::chrono::steady_clock::now();
  auto loop = grade_code("while True:\n    pass\n", kAddTests, limits);
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  CHECK(loop.pass_fraction == 0.0);
  REQUIRE(loop.per_test.size() == 1);
  CHECK(loop.per_test[0].outcome == TestOutcome::Timeout);
  CHECK(loop.per_test[0].duration_ms >= 1500);
  CHECK(loop.per_test[0].duration_ms <= 2500);
  CHECK(elapsed.count() <= 2500);

  auto none = grade_code("x = 1", {});
  CHECK(none.pass_fraction == 0.0);
  CHECK(none.per_test.empty());
}

TEST_CASE("code grader confines writes to the scratch dir") {
  TempDir outside;
  auto target = (outside / "escaped.txt").string();
  std::string source =
      "def add(a, b):\n    return a + b\n"
      "try:\n    open(" + nlohmann::json(target).dump() + ", 'w').write('x')\n"
      "    WROTE = True\nexcept OSError:\n    WROTE = False\n"
      "open('inside.txt', 'w').write('ok')\n";
  for (bool hook : {false, true}) {
    CAPTURE(hook);
    CodeLimits limits;
    limits.audit_hook = hook;
    auto v = grade_code(source, {{"blocked", "assert WROTE is False"}, {"add", "assert add(2, 3) == 5"}}, limits);
    CHECK(v.pass_fraction == 1.0);
    CHECK_FALSE(std::filesystem::exists(target));
  }
}

TEST_CASE("code grader denies network access") {
  std::string source =
      "import socket\n"
      "try:\n"
      "    s = socket.create_connection(('127.0.0.1', 9), timeout=1)\n"
      "    REACHED = 'open'\n"
      "except PermissionError:\n    REACHED = 'denied'\n"
      "except OSError as e:\n    REACHED = 'denied' if e.errno in (1, 13, 101) else 'error %s' % e.errno\n";
  auto v = grade_code(source, {{"net", "assert REACHED == 'denied', REACHED"}});
  CHECK(v.pass_fraction == 1.0);
  if (v.pass_fraction != 1.0) MESSAGE(v.per_test[0].output);
}

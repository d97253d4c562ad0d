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

#include "agentry/graders.hpp"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <condition_variable>
#include <mutex>
#include <random>
#include <regex>
#include <thread>

#include "agentry/error.hpp"
#include "agentry/prompt.hpp"
#include "agentry/text.hpp"

namespace fs = std::filesystem;

namespace agentry {

std::string Judge::ask(const std::string& prompt) const {
  if (!backends) fail(ErrorKind::AssemblyError, "judge has no backend registry");
  CompletionRequest request{{Message{Role::User, prompt, std::nullopt, {}}}, {}, spec};
  CompletionResponse r = backends->complete(request);
  if (r.finish_reason == FinishReason::Error) {
    fail(ErrorKind::TransportError, r.error.empty() ? "judge call failed" : r.error);
  }
  return r.content;
}

const std::string& default_gated_prompt() {
  static const std::string p =
      "You are a strict grader. Compare the response with the reference answer.\n"
      "Question:\n{prompt}\n\nReference answer:\n{reference}\n\nResponse:\n{prediction}\n\n"
      "Reply with exactly one word: CORRECT if the response agrees with the reference, otherwise INCORRECT.";
  return p;
}

const std::string& default_score_prompt() {
  static const std::string p =
      "Rate how well the response answers the question, using the reference as a guide.\n"
      "Question:\n{prompt}\n\nReference answer:\n{reference}\n\nResponse:\n{prediction}\n\n"
      "Reply with a score from 0 to 100.";
  return p;
}

const std::string& default_dojo_prompt() {
  static const std::string p =
      "Two candidates answered the same question. Decide which answer is better.\n"
      "Question:\n{prompt}\n\nCandidate A:\n{candidate_a}\n\nCandidate B:\n{candidate_b}\n\n"
      "Reply with A, B or TIE.";
  return p;
}

const std::string& default_instructed_prompt() {
  static const std::string p = "{instruction}\n\nTask:\n{prompt}\n\nResponse:\n{prediction}";
  return p;
}

namespace {

std::string fill(const std::optional<std::string>& custom, const std::string& fallback, const Bindings& b) {
  return render(PromptTemplate::from_text(custom.value_or(fallback), "judge"), b, RenderMode::Lenient);
}

}  // namespace

bool parse_gated_verdict(std::string_view out) {
  std::string lower = to_lower(out);
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower.compare(i, 9, "incorrect") == 0) return false;
    if (lower.compare(i, 7, "correct") == 0) return true;
  }
  fail(ErrorKind::UnparseableVerdict, "no CORRECT/INCORRECT in judge output: " + truncate_utf8(out, 200));
}

double parse_score(std::string_view out) {
  static const std::regex kNumber(R"(-?\d+(?:\.\d+)?)");
  std::string text(out);
  std::smatch m;
  if (!std::regex_search(text, m, kNumber)) {
    fail(ErrorKind::UnparseableVerdict, "no number in judge output: " + truncate_utf8(out, 200));
  }
  double v = std::stod(m.str());
  if (v > 1.0 && v <= 100.0) v /= 100.0;
  return std::clamp(v, 0.0, 1.0);
}

std::string_view to_string(DojoOutcome o) noexcept {
  switch (o) {
    case DojoOutcome::A: return "A";
    case DojoOutcome::B: return "B";
    case DojoOutcome::Tie: return "tie";
  }
  return "tie";
}

DojoOutcome parse_dojo(std::string_view out) {
  std::size_t i = 0;
  while (i < out.size()) {
    while (i < out.size() && !std::isalnum(static_cast<unsigned char>(out[i]))) ++i;
    std::size_t j = i;
    while (j < out.size() && std::isalnum(static_cast<unsigned char>(out[j]))) ++j;
    std::string_view word = out.substr(i, j - i);
    if (word == "A") return DojoOutcome::A;
    if (word == "B") return DojoOutcome::B;
    if (iequals(word, "tie")) return DojoOutcome::Tie;
    i = j;
  }
  fail(ErrorKind::UnparseableVerdict, "no A/B/TIE in judge output: " + truncate_utf8(out, 200));
}

bool grade_gated(const Judge& judge, const std::string& prompt, const std::string& reference,
                 const std::string& prediction, const GatedOptions& options) {
  if (options.exact_match) return trim(reference) == trim(prediction);
  return parse_gated_verdict(judge.ask(fill(options.prompt_template, default_gated_prompt(),
                                            {{"prompt", prompt}, {"reference", reference}, {"prediction", prediction}})));
}

double grade_score(const Judge& judge, const std::string& prompt, const std::string& reference,
                   const std::string& prediction, const std::optional<std::string>& prompt_template) {
  return parse_score(judge.ask(fill(prompt_template, default_score_prompt(),
                                    {{"prompt", prompt}, {"reference", reference}, {"prediction", prediction}})));
}

DojoOutcome grade_dojo_presented(const Judge& judge, const std::string& prompt, const std::string& a,
                                 const std::string& b, bool swapped,
                                 const std::optional<std::string>& prompt_template) {
  const std::string& first = swapped ? b : a;
  const std::string& second = swapped ? a : b;
  DojoOutcome shown = parse_dojo(judge.ask(fill(prompt_template, default_dojo_prompt(),
                                                {{"prompt", prompt}, {"candidate_a", first}, {"candidate_b", second}})));
  if (!swapped || shown == DojoOutcome::Tie) return shown;
  return shown == DojoOutcome::A ? DojoOutcome::B : DojoOutcome::A;
}

bool dojo_presentation_swapped(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return (rng() & 1U) != 0;
}

DojoOutcome grade_dojo(const Judge& judge, const std::string& prompt, const std::string& a, const std::string& b,
                       std::uint64_t seed, const std::optional<std::string>& prompt_template) {
  return grade_dojo_presented(judge, prompt, a, b, dojo_presentation_swapped(seed), prompt_template);
}

std::string grade_instructed(const Judge& judge, const std::string& instruction, const std::string& prompt,
                             const std::string& prediction, const std::optional<std::string>& prompt_template) {
  if (trim(instruction).empty()) fail(ErrorKind::InvalidInput, "empty grading instruction");
  return judge.ask(fill(prompt_template, default_instructed_prompt(),
                        {{"instruction", instruction}, {"prompt", prompt}, {"prediction", prediction}}));
}

// ---------------------------------------------------------------------------
// Code grading

std::string_view to_string(TestOutcome o) noexcept {
  switch (o) {
    case TestOutcome::Pass: return "pass";
    case TestOutcome::Fail: return "fail";
    case TestOutcome::Timeout: return "timeout";
  }
  return "fail";
}

std::string extract_code(std::string_view prediction) {
  std::size_t open = prediction.find("```");
  if (open == std::string_view::npos) return std::string(prediction);
  std::size_t body = prediction.find('\n', open);
  if (body == std::string_view::npos) return std::string(prediction);
  std::size_t close = prediction.find("```", body + 1);
  if (close == std::string_view::npos) close = prediction.size();
  return std::string(prediction.substr(body + 1, close - body - 1));
}

namespace {

class SandboxSlots {
 public:
  void set_limit(std::size_t n) {
    std::lock_guard<std::mutex> lock(mu_);
    limit_ = std::max<std::size_t>(1, n);
    cv_.notify_all();
  }
  void acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return used_ < limit_; });
    ++used_;
  }
  void release() {
    std::lock_guard<std::mutex> lock(mu_);
    --used_;
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t limit_ = std::max(1U, std::thread::hardware_concurrency());
  std::size_t used_ = 0;
};

SandboxSlots& slots() {
  static SandboxSlots s;
  return s;
}

std::optional<std::string> find_python() {
  static const std::optional<std::string> found = []() -> std::optional<std::string> {
    const char* path = std::getenv("PATH");
    std::string dirs = path ? path : "/usr/local/bin:/usr/bin:/bin";
    std::size_t start = 0;
    while (start <= dirs.size()) {
      std::size_t end = dirs.find(':', start);
      if (end == std::string::npos) end = dirs.size();
      fs::path candidate = fs::path(dirs.substr(start, end - start)) / "python3";
      if (::access(candidate.c_str(), X_OK) == 0) return candidate.string();
      start = end + 1;
    }
    return std::nullopt;
  }();
  return found;
}

// In-interpreter guard used when the kernel cannot confine the child.
constexpr const char* kAuditGuard = R"PY(
import os as _os
_SCRATCH = _os.path.realpath(_os.getcwd())
def _inside(p):
    p = _os.path.realpath(_os.fsdecode(p))
    return p == "/dev/null" or p == _SCRATCH or p.startswith(_SCRATCH + _os.sep)
def _guard(event, args):
    if event == "open":
        path, mode, flags = args
        if isinstance(path, int):
            return
        writing = (isinstance(mode, str) and any(c in mode for c in "wax+")) or \
            (isinstance(flags, int) and flags & (_os.O_WRONLY | _os.O_RDWR | _os.O_CREAT | _os.O_APPEND | _os.O_TRUNC))
        if writing and not _inside(path):
            raise PermissionError("write outside scratch directory: %s" % path)
    elif event in ("os.remove", "os.rename", "os.rmdir", "os.mkdir", "os.symlink", "os.link", "os.truncate",
                   "os.chmod", "os.chown", "shutil.rmtree", "shutil.move", "shutil.copyfile"):
        for a in args[:2]:
            if isinstance(a, (str, bytes, _os.PathLike)) and not _inside(a):
                raise PermissionError("write outside scratch directory: %s" % a)
    elif event in ("socket.connect", "socket.bind", "socket.sendto", "socket.getaddrinfo"):
        raise PermissionError("network access is disabled")
    elif event in ("subprocess.Popen", "os.system", "os.exec", "os.posix_spawn", "os.fork", "os.spawn"):
        raise PermissionError("process creation is disabled")
__import__("sys").addaudithook(_guard)
)PY";

constexpr const char* kRunner = R"PY(
import sys, traceback
sys.path.insert(0, "")
_g = {"__name__": "__main__"}
try:
    with open("solution.py") as _f:
        exec(compile(_f.read(), "solution.py", "exec"), _g)
except SystemExit:
    raise
except BaseException:
    traceback.print_exc()
    sys.exit(3)
with open("test.py") as _f:
    exec(compile(_f.read(), "test.py", "exec"), _g)
)PY";

}  // namespace

void set_sandbox_concurrency(std::size_t n) { slots().set_limit(n); }

CodeVerdict grade_code(const std::string& prediction, const std::vector<UnitTest>& tests, const CodeLimits& limits) {
  auto python = find_python();
  if (!python) fail(ErrorKind::SandboxUnavailable, "python3 not found on PATH");
  const bool guard = limits.audit_hook || !sandbox_capabilities().filesystem;
  const std::string solution = extract_code(prediction);
  CodeVerdict verdict;
  std::size_t passed = 0;
  for (const auto& test : tests) {
    ScratchDir scratch;
    write_text_file(scratch.path() / "solution.py", solution);
    write_text_file(scratch.path() / "test.py", test.test_source);
    write_text_file(scratch.path() / "run.py", std::string(guard ? kAuditGuard : "") + kRunner);
    SandboxLimits sl;
    sl.timeout = limits.timeout;
    sl.memory_mb = limits.memory_mb;
    sl.allow_network = limits.allow_network;
    slots().acquire();
    SandboxResult r;
    try {
      r = run_sandboxed({*python, "-I", "-B", "run.py"}, scratch.path(), sl);
    } catch (...) {
      slots().release();
      throw;
    }
    slots().release();
    TestRun run{test.test_id, TestOutcome::Fail, std::move(r.output), r.duration_ms};
    if (r.timed_out) {
      run.outcome = TestOutcome::Timeout;
    } else if (r.exit_code == 0 && r.term_signal == 0) {
      run.outcome = TestOutcome::Pass;
      ++passed;
    }
    verdict.per_test.push_back(std::move(run));
  }
  verdict.pass_fraction = tests.empty() ? 0.0 : static_cast<double>(passed) / static_cast<double>(tests.size());
  return verdict;
}

// ---------------------------------------------------------------------------

nlohmann::json GraderVerdict::to_json() const {
  nlohmann::json j = {{"kind", to_string(kind)}};
  j["pass"] = pass ? nlohmann::json(*pass) : nlohmann::json();
  j["score"] = score ? nlohmann::json(*score) : nlohmann::json();
  if (dojo) j["dojo"] = to_string(*dojo);
  if (!text.empty()) j["text"] = text;
  if (code) {
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& t : code->per_test) {
      tests.push_back({{"test_id", t.test_id}, {"outcome", to_string(t.outcome)}, {"output", t.output}});
    }
    j["code"] = {{"pass_fraction", code->pass_fraction}, {"per_test", tests}};
  }
  return j;
}

GraderVerdict grade_task(GraderKind kind, const BenchTask& task, const std::string& prediction, const Judge& judge,
                         const GraderSettings& settings) {
  GraderVerdict v;
  v.kind = kind;
  switch (kind) {
    case GraderKind::Gated: {
      bool ok = grade_gated(judge, task.prompt, task.reference, prediction, settings.gated);
      v.pass = ok;
      v.score = ok ? 1.0 : 0.0;
      break;
    }
    case GraderKind::Score: {
      double s = grade_score(judge, task.prompt, task.reference, prediction, settings.score_prompt);
      v.score = s;
      v.pass = s >= 0.5;
      break;
    }
    case GraderKind::Dojo: {
      DojoOutcome o = grade_dojo(judge, task.prompt, prediction, task.reference, settings.seed ^ fnv1a64(task.id),
                                 settings.dojo_prompt);
      v.dojo = o;
      v.score = o == DojoOutcome::A ? 1.0 : o == DojoOutcome::Tie ? 0.5 : 0.0;
      v.pass = o != DojoOutcome::B;
      break;
    }
    case GraderKind::Instructed: {
      const std::string& instruction =
          task.grading_instruction.empty() ? settings.default_instruction : task.grading_instruction;
      v.text = grade_instructed(judge, instruction, task.prompt, prediction, settings.instructed_prompt);
      break;
    }
    case GraderKind::Code: {
      CodeVerdict c = grade_code(prediction, task.tests, settings.code);
      v.score = c.pass_fraction;
      v.pass = c.pass_fraction == 1.0;
      v.code = std::move(c);
      break;
    }
  }
  return v;
}

}  // namespace agentry

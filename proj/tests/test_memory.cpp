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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "agentry/memory.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

using namespace agentry;
using namespace agentry::testing;

namespace {

std::vector<std::int64_t> ids_of(const std::vector<ScoredRecord>& recalled) {
  std::vector<std::int64_t> ids;
  for (const auto& r : recalled) ids.push_back(r.record->id);
  return ids;
}

std::string words(std::size_t n, const std::string& w) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + w + std::to_string(i);
  return s;
}

// Units still in the session after archiving; recomputed from pair sizes.
std::size_t greedy_archived(const std::vector<std::size_t>& pair_units, std::size_t fixed, std::size_t budget) {
  std::size_t total = fixed;
  for (auto u : pair_units) total += u;
  std::size_t archived = 0;
  while (total > budget && archived + 1 < pair_units.size()) total -= pair_units[archived++];
  return archived;
}

}  // namespace

TEST_CASE("hash embedding") {
  auto zero = hash_embed("", 16);
  CHECK(std::all_of(zero.begin(), zero.end(), [](float x) { return x == 0.0f; }));
  for (const char* text : {"red cat", "a", "the the the", "  spaced   words  "}) {
    auto v = hash_embed(text, 64);
    double norm = 0;
    for (float x : v) norm += static_cast<double>(x) * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(v == oracle_embed(text, 64));
  }
  CHECK(cosine_similarity(hash_embed("red cat", 256), hash_embed("red cat", 256)) == doctest::Approx(1.0));
  CHECK(cosine_similarity(zero, zero) == 0.0);
}

TEST_CASE("insert assigns increasing ids and rejects empty text") {
  MemoryStore store(MemoryConfig{});
  CHECK(store.insert("one") == 1);
  CHECK(store.insert("two") == 2);
  CHECK(store.insert("three") == 3);
  try {
    store.insert("   ");
    FAIL("expected InvalidInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
  CHECK_THROWS_AS(store.insert("x", Vector(3, 0.0f)), Error);
  CHECK_THROWS_AS(MemoryStore(MemoryConfig{EmbedderKind::DeterministicHash, 8, 0, 10, {}, {}}), Error);
}

TEST_CASE("recall examples") {
  MemoryStore store(MemoryConfig{});
  CHECK(store.recall("anything", 3).empty());
  store.insert("cats purr");
  store.insert("dogs bark");
  store.insert("cats nap");
  auto top = store.recall("cats", 2);
  std::vector<std::pair<std::int64_t, Vector>> recs;
  for (const auto& r : store.records()) recs.emplace_back(r.id, oracle_embed(r.text, 256));
  CHECK(ids_of(top) == oracle_recall(recs, oracle_embed("cats", 256), 2));
  CHECK(ids_of(top) == std::vector<std::int64_t>{1, 3});
  CHECK(store.recall("cats", 10).size() == 3);
}

TEST_CASE("threshold excludes weak matches") {
  MemoryConfig cfg;
  cfg.threshold = 0.5;
  MemoryStore store(cfg);
  store.insert("alpha beta");
  store.insert("gamma delta");
  auto hits = store.recall("alpha beta", 5);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].record->id == 1);
}

TEST_CASE("property: recall equals the exhaustive scan") {
  std::mt19937_64 rng(31337);
  const std::vector<std::string> vocab = {"red", "blue", "cat", "dog", "tree", "sky", "sun", "moon",
                                          "river", "stone", "wind", "fire", "salt", "rain", "snow", "leaf"};
  for (int corpus = 0; corpus < 40; ++corpus) {
    MemoryConfig cfg;
    cfg.dimension = 32 + rng() % 256;
    MemoryStore store(cfg);
    std::vector<std::pair<std::int64_t, Vector>> recs;
    std::size_t n = 1 + rng() % 400;
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      for (std::uint64_t w = 1 + rng() % 4; w > 0; --w) text += vocab[rng() % vocab.size()] + " ";
      auto id = store.insert(text);
      recs.emplace_back(id, oracle_embed(text, cfg.dimension));
    }
    for (int q = 0; q < 5; ++q) {
      std::string query = vocab[rng() % vocab.size()] + " " + vocab[rng() % vocab.size()];
      std::size_t k = 1 + rng() % 12;
      CHECK(ids_of(store.recall(query, k)) == oracle_recall(recs, oracle_embed(query, cfg.dimension), k));
    }
  }
}

TEST_CASE("file-backed stores persist records") {
  TempDir dir;
  auto path = dir / "mem/store.jsonl";
  {
    auto store = MemoryStore::open(path, MemoryConfig{});
    store.insert("remember the milk");
    store.insert("buy bread");
  }
  auto reopened = MemoryStore::open(path, MemoryConfig{});
  REQUIRE(reopened.size() == 2);
  CHECK(reopened.records()[0].text == "remember the milk");
  CHECK(reopened.records()[0].vector == hash_embed("remember the milk", 256));
  CHECK(reopened.insert("third") == 3);
  CHECK(ids_of(reopened.recall("milk", 1)) == std::vector<std::int64_t>{1});

  MemoryConfig small;
  small.dimension = 8;
  CHECK_THROWS_AS(MemoryStore::open(path, small), Error);
}

TEST_CASE("archive_overflow matches a greedy oracle") {
  const std::vector<std::size_t> pair_units = {30, 10, 25, 15, 20, 20};
  std::vector<Message> session;
  for (std::size_t i = 0; i < pair_units.size(); ++i) {
    session.push_back({Role::User, words(pair_units[i] / 2, "u"), std::nullopt, {}});
    session.push_back({Role::Assistant, words(pair_units[i] - pair_units[i] / 2, "a"), std::nullopt, {}});
  }
  REQUIRE(session_units(session) == 120);
  MemoryStore store(MemoryConfig{});
  auto out = archive_overflow(session, store, 50);
  CHECK(out.archived_pairs == greedy_archived(pair_units, 0, 50));
  CHECK(out.archived_pairs == 4);
  CHECK(session_units(out.session) == 40);
  CHECK(store.size() == 4);
  CHECK(store.records()[0].text.rfind("User: u0", 0) == 0);
  CHECK_FALSE(out.over_budget);
  CHECK(std::equal(out.session.begin(), out.session.end(), session.end() - 4));

  auto again = archive_overflow(out.session, store, 50);
  CHECK(again.archived_pairs == 0);
  CHECK(again.session == out.session);
  CHECK(store.size() == 4);
}

TEST_CASE("archive_overflow keeps system messages and the latest turn") {
  std::vector<Message> session = {{Role::System, "you are terse", std::nullopt, {}},
                                  {Role::User, words(5, "u"), std::nullopt, {}},
                                  {Role::Assistant, words(5, "a"), std::nullopt, {}},
                                  {Role::User, words(20, "v"), std::nullopt, {}},
                                  {Role::Assistant, words(20, "b"), std::nullopt, {}}};
  MemoryStore store(MemoryConfig{});
  auto under = archive_overflow(session, store, 1000);
  CHECK(under.archived_pairs == 0);
  CHECK(under.session == session);

  auto out = archive_overflow(session, store, 10);
  CHECK(out.archived_pairs == 1);
  CHECK(out.over_budget);
  REQUIRE(out.session.size() == 3);
  CHECK(out.session[0].role == Role::System);
  CHECK(out.session[1].content == words(20, "v"));
  auto twice = archive_overflow(out.session, store, 10);
  CHECK(twice.archived_pairs == 0);
  CHECK(twice.session == out.session);
}

TEST_CASE("property: archive_overflow agrees with the greedy oracle and is idempotent") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> pair_units;
    std::vector<Message> session;
    std::size_t system_units = rng() % 2 ? 3 : 0;
    if (system_units) session.push_back({Role::System, words(system_units, "s"), std::nullopt, {}});
    for (std::uint64_t p = 1 + rng() % 8; p > 0; --p) {
      std::size_t u = 1 + rng() % 6, a = rng() % 6;
      pair_units.push_back(u + a);
      session.push_back({Role::User, words(u, "u"), std::nullopt, {}});
      session.push_back({Role::Assistant, words(a, "a"), std::nullopt, {}});
    }
    std::size_t budget = 1 + rng() % 40;
    MemoryStore store(MemoryConfig{});
    auto out = archive_overflow(session, store, budget);
    CHECK(out.archived_pairs == greedy_archived(pair_units, system_units, budget));
    CHECK(store.size() == out.archived_pairs);
    CHECK(out.over_budget == (session_units(out.session) > budget));
    auto again = archive_overflow(out.session, store, budget);
    CHECK(again.archived_pairs == 0);
    CHECK(again.session == out.session);
  }
}

TEST_CASE("recall block formatting") {
  MemoryStore store(MemoryConfig{});
  store.insert("User: my cat is Tom");
  auto block = format_recall_block(store.recall("cat", 4));
  CHECK(block == "Relevant memory from earlier conversation:\n- User: my cat is Tom");
}

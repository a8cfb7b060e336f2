#include <algorithm>
#include <random>

#include "doctest.h"
#include "gseo/errors.hpp"
#include "gseo/select.hpp"
#include "support.hpp"

using namespace gseo;
using namespace gseo::select;
using namespace gseo::providers;

namespace {

PerformanceVector constant_vector(double x, int version = 0) {
  PerformanceVector p;
  p.version = version;
  for (auto& c : p.components) c = x;
  return p;
}

/// A trajectory whose entry t has every component equal to means[t].
refine::Trajectory trajectory_of(const std::vector<double>& means) {
  refine::Trajectory tr;
  for (std::size_t t = 0; t < means.size(); ++t) {
    refine::TrajectoryEntry e;
    e.document = gseo_test::make_doc("Body of version " + std::to_string(t) + ". " + std::string(700, 'x'));
    e.document.version = static_cast<int>(t);
    if (t > 0) {
      e.document.provenance = Provenance::maco(static_cast<int>(t));
      e.applied = refine::Suggestion{"g1", {Dimension::KC}, "Suggestion applied for version " + std::to_string(t), 1};
    }
    e.evaluation.version = e.document.version;
    e.evaluation.vector = constant_vector(means[t], e.document.version);
    tr.entries.push_back(std::move(e));
  }
  return tr;
}

std::shared_ptr<ScriptedChatBackend> replying(std::vector<std::string> replies, int& calls) {
  return std::make_shared<ScriptedChatBackend>([replies, &calls](const ChatRequest&) -> std::optional<std::string> {
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(calls++), replies.size() - 1);
    return replies[i];
  });
}

}  // namespace

TEST_CASE("argmax of the mean") {
  std::vector<PerformanceVector> v{constant_vector(6.0), constant_vector(7.2), constant_vector(7.1)};
  CHECK(argmax_mean(v) == 1);
  v = {constant_vector(5), constant_vector(5), constant_vector(5)};
  CHECK(argmax_mean(v) == 0);
  v = {constant_vector(1), constant_vector(2), constant_vector(3)};
  CHECK(argmax_mean(v) == 2);
  CHECK(argmax_mean(trajectory_of({6.0, 7.2, 7.1})) == 1);
}

TEST_CASE("argmax ignores dimension order and lower new entries") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> tenths(0, 100);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PerformanceVector> v(1 + trial % 8);
    for (auto& p : v)
      for (auto& c : p.components) c = tenths(rng) / 10.0;
    const auto best = argmax_mean(v);
    auto permuted = v;
    for (auto& p : permuted) std::shuffle(p.components.begin(), p.components.end(), rng);
    CHECK(argmax_mean(permuted) == best);
    auto lower = v;
    lower.push_back(constant_vector(std::max(0.0, v[best].mean() - 0.1)));
    if (v[best].mean() > 0.0) CHECK(argmax_mean(lower) == best);
  }
}

TEST_CASE("a single entry needs no model call") {
  int calls = 0;
  auto chat = replying({"version: 3"}, calls);
  const auto s = select_best_version(*chat, {}, trajectory_of({5.0}));
  CHECK(s.index == 0);
  CHECK(calls == 0);
}

TEST_CASE("the scripted selector picks the peak version") {
  int calls = 0;
  auto chat = replying({"version 5 \xE2\x80\x94 best balance of peak score and stability"}, calls);
  const auto tr = trajectory_of({5, 6, 6.5, 7, 7.4, 7.8, 7.6, 7.5, 7.7, 7.6});
  const auto s = select_best_version(*chat, {}, tr);
  CHECK(s.index == 5);
  CHECK(s.policy == Policy::llm);
  CHECK(s.justification.find("best balance") != std::string::npos);
  CHECK(calls == 1);
}

TEST_CASE("an out-of-range answer re-prompts, then falls back to argmax") {
  int calls = 0;
  auto chat = replying({"version 99"}, calls);
  const auto tr = trajectory_of({5, 6, 6.5, 7, 7.4, 7.8, 7.6, 7.5, 7.7, 7.6});
  const auto s = select_best_version(*chat, {}, tr);
  CHECK(calls == 2);
  CHECK(s.policy == Policy::argmax_mean);
  CHECK(s.index == 5);
  CHECK_FALSE(s.justification.empty());
}

TEST_CASE("a provider failure also falls back") {
  auto chat = std::make_shared<ScriptedChatBackend>(
      [](const ChatRequest&) -> std::optional<std::string> { throw ProviderError("down"); });
  const auto s = select_best_version(*chat, {}, trajectory_of({5, 8, 6}));
  CHECK(s.policy == Policy::argmax_mean);
  CHECK(s.index == 1);
}

TEST_CASE("selector replies") {
  auto s = parse_selection_reply("**Version:** 2\nJustification: steady gains", 4);
  REQUIRE(s);
  CHECK(s->index == 2);
  CHECK(s->justification.find("steady gains") != std::string::npos);
  CHECK(parse_selection_reply("Version #0 is best", 1)->index == 0);
  CHECK_FALSE(parse_selection_reply("version 4", 4).has_value());
  CHECK_FALSE(parse_selection_reply("the third one", 4).has_value());
}

TEST_CASE("selection prompt shows every version with an excerpt") {
  const auto tr = trajectory_of({5, 6, 7});
  const auto prompt = render_selection_prompt(tr);
  for (int t = 0; t < 3; ++t) CHECK(prompt.find("Body of version " + std::to_string(t)) != std::string::npos);
  CHECK(prompt.find("Suggestion applied for version 2") != std::string::npos);
  CHECK(prompt.find(std::string(kExcerptChars, 'x')) == std::string::npos);
}

TEST_CASE("excerpts never split a multi-byte character") {
  refine::Trajectory tr = trajectory_of({5, 6});
  std::string body;
  while (body.size() < 2 * kExcerptChars) body += "\xC3\xA9";  // é
  tr.entries[1].document.body = "a" + body;
  const auto prompt = render_selection_prompt(tr);
  CHECK(prompt.find("a\xC3\xA9") != std::string::npos);
  // every lead byte keeps its continuation byte
  for (std::size_t i = 0; i + 1 < prompt.size(); ++i) {
    if (static_cast<unsigned char>(prompt[i]) == 0xC3) CHECK(static_cast<unsigned char>(prompt[i + 1]) == 0xA9);
  }
}

TEST_CASE("no-selector mode returns the final iteration") {
  const auto s = select_final_iteration(trajectory_of({5, 9, 6}));
  CHECK(s.index == 2);
  CHECK(s.policy == Policy::final_iteration);
}

TEST_CASE("selection json round-trips") {
  Selection s{3, "why", Policy::llm};
  const auto j = selection_to_json(s);
  CHECK(j.at("schema") == "gseo/v1");
  CHECK(j.at("policy") == "llm");
  const auto back = selection_from_json(j);
  CHECK(back.index == 3);
  CHECK(back.policy == Policy::llm);
  CHECK(back.justification == "why");
}

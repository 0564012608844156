#include <doctest.h>

#include <random>

#include "pattern_pilot/context_match.hpp"
#include "pattern_pilot/error.hpp"
#include "support/fixtures.hpp"

using namespace pilot;

namespace {

const std::vector<std::string> kDims{"participants", "tool", "data", "mode"};

ActivityTemplate template_with(std::map<std::string, ValueCounts> profile) {
  ActivityTemplate t;
  t.activity = "partner selection";
  t.profile = std::move(profile);
  return t;
}

InternalContext ctx(std::map<std::string, ValueSet> dims) { return InternalContext{std::move(dims)}; }

ActivityPattern pattern_of(const std::vector<std::string>& names) {
  ActivityPattern p;
  p.external_context_id = "c1";
  p.support = 3;
  for (const auto& n : names) p.templates.push_back(ActivityTemplate{n, {}});
  return p;
}

std::vector<Step> steps_of(const std::vector<std::string>& names) {
  std::vector<Step> steps;
  for (const auto& n : names) steps.push_back(Step{n, {}, steps.size() + 1, {}});
  return steps;
}

const ActivityPattern& find_pattern(const PatternRepository& repo, const std::vector<std::string>& names) {
  for (const auto& p : repo.patterns) {
    if (p.activities() == names) return p;
  }
  FAIL("pattern not mined");
  throw std::logic_error("unreachable");
}

}  // namespace

TEST_SUITE("context_match") {
  TEST_CASE("external_similarity") {
    ExternalContext c1{"c1", {{"k1", "v1"}}};
    CHECK(external_similarity(c1, c1) == 1.0);

    ExternalContext a{"a", {{"k1", "v1"}, {"k2", "v2"}, {"k3", "v3"}, {"k4", "v4"}}};
    ExternalContext b{"b", {{"k1", "v1"}, {"k2", "v2"}, {"k3", "v3"}, {"k4", "other"}}};
    CHECK(external_similarity(a, b) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(external_similarity(a, b) == external_similarity(b, a));

    ExternalContext disjoint{"d", {{"x", "y"}}};
    CHECK(external_similarity(a, disjoint) == 0.0);
    CHECK(external_similarity(ExternalContext{"p", {}}, ExternalContext{"q", {}}) == 0.0);
    ExternalContext twin{"twin", a.attributes};
    CHECK(external_similarity(a, twin) == 1.0);

    auto catalog = fixtures::contexts();
    CHECK(external_similarity(fixtures::c2_like_context(), catalog.at("c2")) == 0.75);
    CHECK(external_similarity(fixtures::c2_like_context(), catalog.at("c1")) == 0.0);
  }

  TEST_CASE("internal_similarity") {
    auto tmpl = template_with({{"participants", {{"P2", 3}}},
                               {"tool", {{"search engine", 3}}},
                               {"data", {{"localization criteria", 3}}},
                               {"mode", {{"manual", 3}}}});
    auto full = ctx({{"participants", {"P2"}}, {"tool", {"search engine"}}, {"data", {"localization criteria"}},
                     {"mode", {"manual"}}});
    CHECK(internal_similarity(full, tmpl, kDims) == 1.0);

    auto email = full;
    email.dimensions["mode"] = {"email"};
    CHECK(internal_similarity(email, tmpl, kDims) == 0.75);

    CHECK(internal_similarity(InternalContext{}, ActivityTemplate{}, kDims) == 1.0);
    CHECK_THROWS_AS(internal_similarity(full, tmpl, std::vector<std::string>{}), Error);

    // present on one side only counts as a mismatch
    auto no_mode = full;
    no_mode.dimensions.erase("mode");
    CHECK(internal_similarity(no_mode, tmpl, kDims) == 0.75);
    // out-of-scope dimensions are ignored
    std::vector<std::string> three{"participants", "tool", "data"};
    CHECK(internal_similarity(email, tmpl, three) == 1.0);
    // ties: any modal value matches
    auto tied = template_with({{"mode", {{"email", 3}, {"manual", 3}}}});
    CHECK(internal_similarity(ctx({{"mode", {"manual"}}}), tied, kDims) == 1.0);
    auto minority = template_with({{"participants", {{"P2", 2}, {"P4", 1}}}});
    CHECK(internal_similarity(ctx({{"participants", {"P4"}}}), minority, kDims) == 0.0);
  }

  TEST_CASE("anchor_match") {
    auto c = pattern_of(fixtures::kPatternC);
    CHECK(anchor_match(steps_of({"partner selection"}), c) == Anchor{1, 1});
    CHECK(anchor_match(steps_of({"discussion", "partner selection"}), c) == Anchor{1, 1});
    CHECK(anchor_match(steps_of({"partner search", "partner selection"}), c) == Anchor{2, 0});
    CHECK_FALSE(anchor_match({}, c));
    CHECK_FALSE(anchor_match(steps_of({"contract signing"}), c));
    CHECK_FALSE(anchor_match(steps_of({"something else"}), c));

    // earliest position wins among equal lengths
    auto loop = pattern_of({"A", "B", "A", "B", "C"});
    CHECK(anchor_match(steps_of({"A"}), loop) == Anchor{1, 0});
    CHECK(anchor_match(steps_of({"B", "A", "B"}), loop) == Anchor{3, 1});
    // anchor may not consume the last template
    auto a = pattern_of(fixtures::kPatternA);
    CHECK_FALSE(anchor_match(steps_of({"partner search", "partner selection"}), a));
    CHECK(anchor_match(steps_of({"partner search"}), a) == Anchor{1, 0});
  }

  TEST_CASE("confidence on the c1 repository") {
    auto repo = fixtures::combined_repository();
    auto trace = fixtures::email_trace();
    const auto& b = find_pattern(repo, fixtures::kPatternB);
    const auto& c = find_pattern(repo, fixtures::kPatternC);
    const auto c1 = repo.contexts.at("c1");
    Preferences prefs;

    auto on_c = confidence(trace, c1, c1, c, *anchor_match(trace, c), prefs);
    CHECK(on_c.confidence == 1.0);
    CHECK(on_c.external_score == 1.0);
    CHECK(on_c.internal_score == 1.0);

    auto on_b = confidence(trace, c1, c1, b, *anchor_match(trace, b), prefs);
    CHECK(on_b.confidence == 0.75);
    CHECK(on_b.external_score == 1.0);
    CHECK(on_b.internal_score == 0.75);
    CHECK(on_b.per_dimension.at("mode") == DimensionTally{0, 2});
    CHECK(on_b.per_dimension.at("participants") == DimensionTally{2, 2});

    // a single email-mode selection step anchors at (1, 1) with the same scores
    std::vector<Step> selection{trace.back()};
    auto anchor = anchor_match(selection, b);
    REQUIRE(anchor);
    CHECK(*anchor == Anchor{1, 1});
    CHECK(confidence(selection, c1, c1, b, *anchor, prefs).confidence == 0.75);

    SUBCASE("lambda = 1 with an absent requester zeroes confidence") {
      prefs.user_crowd_lambda = 1.0;
      CHECK(confidence(trace, c1, c1, c, *anchor_match(trace, c), prefs, std::string("P9")).confidence == 0.0);
      CHECK(confidence(trace, c1, c1, c, *anchor_match(trace, c), prefs, std::string("P3")).confidence == 1.0);
    }
    SUBCASE("lambda = 0.5 halves the gap for an absent requester") {
      prefs.user_crowd_lambda = 0.5;
      CHECK(confidence(trace, c1, c1, c, *anchor_match(trace, c), prefs, std::string("P9")).confidence == 0.5);
    }
  }

  TEST_CASE("confidence rejects anchors that do not fit") {
    auto p = pattern_of({"A", "B"});
    CHECK_THROWS_AS(confidence(steps_of({"A"}), {}, {}, p, Anchor{2, 0}, Preferences{}), Error);
  }

  TEST_CASE("scores stay in [0,1] and more matching dimensions never lower confidence") {
    std::mt19937_64 rng(19);
    auto coin = [&] { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; };
    auto tmpl = template_with({{"participants", {{"P2", 3}}},
                               {"tool", {{"Z", 3}}},
                               {"data", {{"Terms for X", 3}}},
                               {"mode", {{"manual", 3}}}});
    const std::map<std::string, std::string> match{
        {"participants", "P2"}, {"tool", "Z"}, {"data", "Terms for X"}, {"mode", "manual"}};
    for (int round = 0; round < 300; ++round) {
      InternalContext q;
      for (const auto& [dim, value] : match) q.dimensions[dim] = {coin() ? value : std::string("other")};
      const double before = internal_similarity(q, tmpl, kDims);
      CHECK(before >= 0.0);
      CHECK(before <= 1.0);
      for (const auto& [dim, value] : match) {
        if (*q.dimensions[dim].begin() == value) continue;
        auto better = q;
        better.dimensions[dim] = {value};
        CHECK(internal_similarity(better, tmpl, kDims) >= before);
        break;
      }
    }
  }

  TEST_CASE("breakdown JSON") {
    MatchBreakdown b;
    b.anchor_length = 2;
    b.confidence = 0.75;
    b.per_dimension["mode"] = DimensionTally{0, 2};
    auto j = to_json(b);
    CHECK(j.at("anchor_length") == 2);
    CHECK(j.at("confidence") == 0.75);
    CHECK(j.at("per_dimension").at("mode").at("total") == 2);
  }
}

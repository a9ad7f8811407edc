#include <random>
#include <set>

#include "doctest.h"
#include "morphocv/geometry.hpp"
#include "morphocv/segmentation.hpp"
#include "test_support.hpp"

using namespace morphocv;
using namespace morphocv::testing;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::kIo;
}

}  // namespace

TEST_CASE("parse_sidecar") {
  const Sidecar s = parse_sidecar(R"({"instances":[{"id":1,"label":"pig","score":0.97},{"id":4}]})");
  REQUIRE(s.size() == 2);
  CHECK(s[0].id == 1);
  CHECK(s[0].label == "pig");
  CHECK(s[0].score == 0.97);
  CHECK(s[1].id == 4);
  CHECK_FALSE(s[1].label.has_value());
  CHECK_FALSE(s[1].score.has_value());
  CHECK(parse_sidecar(R"({"instances":[]})").empty());

  for (const char* bad : {"", "{", "[]", R"({"x":1})", R"({"instances":{}})",
                          R"({"instances":[{"label":"a"}]})", R"({"instances":[{"id":0}]})",
                          R"({"instances":[{"id":1.5}]})", R"({"instances":[{"id":1,"score":1.2}]})",
                          R"({"instances":[{"id":1,"label":3}]})",
                          R"({"instances":[{"id":2},{"id":2}]})"}) {
    CAPTURE(bad);
    CHECK(code_of([&] { parse_sidecar(bad); }) == Errc::kBadSidecar);
  }
}

TEST_CASE("sidecar round trip") {
  const std::vector<InstanceMeta> metas{{3, "cow", 0.25}, {7, "pig \"big\"", 1.0}};
  const Sidecar s = parse_sidecar(write_sidecar(metas));
  REQUIRE(s.size() == 2);
  CHECK(s[0].id == 3);
  CHECK(*s[0].label == "cow");
  CHECK(*s[0].score == 0.25);
  CHECK(*s[1].label == "pig \"big\"");
}

TEST_CASE("load_external") {
  LabelGrid labels(4, 4);
  labels(0, 0) = 2;
  labels(3, 3) = 1;
  labels(2, 1) = 1;

  SUBCASE("no sidecar uses defaults") {
    const InstanceSet set = load_external(labels, std::nullopt);
    REQUIRE(set.metas.size() == 2);
    CHECK(set.metas[0] == InstanceMeta{1, "object", 1.0});
    CHECK(set.metas[1] == InstanceMeta{2, "object", 1.0});
    CHECK(set.areas() == std::vector<std::size_t>{2, 1});
  }
  SUBCASE("partial sidecar") {
    const InstanceSet set = load_external(labels, Sidecar{{1, "pig", 0.9}});
    CHECK(set.metas[0] == InstanceMeta{1, "pig", 0.9});
    CHECK(set.metas[1] == InstanceMeta{2, "object", 1.0});
  }
  SUBCASE("label only or score only") {
    const InstanceSet set = load_external(labels, Sidecar{{1, "pig", std::nullopt}, {2, std::nullopt, 0.3}});
    CHECK(set.metas[0] == InstanceMeta{1, "pig", 1.0});
    CHECK(set.metas[1] == InstanceMeta{2, "object", 0.3});
  }
  SUBCASE("unknown id") {
    CHECK(code_of([&] { load_external(labels, Sidecar{{9, "pig", 0.5}}); }) == Errc::kUnknownSidecarId);
  }
  SUBCASE("empty grid has no instances") {
    CHECK(load_external(LabelGrid(3, 3), std::nullopt).metas.empty());
  }
}

TEST_CASE("sorted_by_area") {
  LabelGrid labels(3, 4);
  labels(0, 0) = 5;
  labels(1, 0) = labels(1, 1) = labels(1, 2) = 2;
  labels(2, 0) = labels(2, 1) = labels(2, 2) = 9;
  const InstanceSet set = sorted_by_area(load_external(labels, std::nullopt));
  REQUIRE(set.metas.size() == 3);
  CHECK(set.metas[0].id == 2);
  CHECK(set.metas[1].id == 9);
  CHECK(set.metas[2].id == 5);
}

TEST_CASE("segment_depth_threshold examples") {
  const ThresholdParams params;
  SUBCASE("plateau is one instance") {
    const InstanceSet set = segment_depth_threshold(plateau_scene(), params);
    REQUIRE(set.metas.size() == 1);
    CHECK(set.metas[0] == InstanceMeta{1, "object", 1.0});
    CHECK(set.mask(1) == block_mask(20, 20, 5, 5, 10, 10));
  }
  SUBCASE("isolated pixel is filtered by area") {
    DepthGrid scene = plateau_scene();
    scene(0, 19) = 1.5;
    const InstanceSet set = segment_depth_threshold(scene, params);
    REQUIRE(set.metas.size() == 1);
    CHECK(set.labels(0, 19) == 0);
  }
  SUBCASE("all ground gives nothing") {
    CHECK(segment_depth_threshold(DepthGrid(10, 10, 2.5), params).metas.empty());
  }
  SUBCASE("missing readings are never foreground") {
    CHECK(segment_depth_threshold(DepthGrid(10, 10, 0.0), params).metas.empty());
  }
  SUBCASE("height exactly at the threshold is excluded") {
    // 2.5 - 2.25 is exactly 0.25
    ThresholdParams p;
    p.min_height_m = 0.25;
    p.min_area_px = 1;
    CHECK(segment_depth_threshold(DepthGrid(4, 4, 2.25), p).metas.empty());
    CHECK(segment_depth_threshold(DepthGrid(4, 4, 2.0), p).metas.size() == 1);
  }
  SUBCASE("diagonal neighbours join") {
    ThresholdParams p;
    p.min_area_px = 1;
    DepthGrid scene(4, 4, 2.5);
    scene(0, 0) = scene(1, 1) = scene(2, 2) = 1.0;
    scene(0, 3) = 1.0;
    const InstanceSet set = segment_depth_threshold(scene, p);
    REQUIRE(set.metas.size() == 2);
    CHECK(set.labels(0, 0) == 1);
    CHECK(set.labels(2, 2) == 1);
    CHECK(set.labels(0, 3) == 2);
  }
  SUBCASE("invalid params") {
    ThresholdParams p;
    p.min_height_m = 0.0;
    CHECK_THROWS_AS(segment_depth_threshold(plateau_scene(), p), Error);
    p = {};
    p.min_area_px = 0;
    CHECK_THROWS_AS(segment_depth_threshold(plateau_scene(), p), Error);
  }
}

TEST_CASE("threshold masks are disjoint and cover the filtered foreground") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> d(1.0, 2.6);
  std::bernoulli_distribution hole(0.05);
  for (int trial = 0; trial < 25; ++trial) {
    DepthGrid scene(30, 30, 2.5);
    for (int b = 0; b < 4; ++b) {
      const BinaryMask blob = random_blob(rng, 30, 30);
      for (std::size_t i = 0; i < blob.size(); ++i)
        if (blob.values()[i]) scene.values()[i] = d(rng);
    }
    for (double& v : scene.values())
      if (hole(rng)) v = 0.0;
    ThresholdParams p;
    p.min_area_px = 1 + trial;
    const InstanceSet set = segment_depth_threshold(scene, p);

    // oracle: threshold, then independent component labeling, then area filter
    BinaryMask fg(30, 30);
    for (std::size_t i = 0; i < fg.size(); ++i) {
      const double v = scene.values()[i];
      fg.values()[i] = v > 0.0 && (2.5 - v) > p.min_height_m;
    }
    BinaryMask expected(30, 30);
    std::size_t kept = 0;
    for (const auto& comp : connected_components(fg)) {
      if (popcount(comp) < p.min_area_px) continue;
      ++kept;
      for (std::size_t i = 0; i < comp.size(); ++i) expected.values()[i] |= comp.values()[i];
    }
    CHECK(set.metas.size() == kept);
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK((set.labels.values()[i] != 0) == (expected.values()[i] != 0));
    }
    std::set<std::uint32_t> ids;
    for (std::uint32_t v : set.labels.values())
      if (v) ids.insert(v);
    CHECK(ids.size() == kept);
    for (std::size_t k = 0; k < set.metas.size(); ++k) CHECK(set.metas[k].id == k + 1);
  }
}

TEST_CASE("instance masks reconstruct the label grid") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> id(0, 6);
  for (int trial = 0; trial < 20; ++trial) {
    LabelGrid labels(12, 9);
    for (auto& v : labels.values()) v = static_cast<std::uint32_t>(id(rng) * 3);
    const InstanceSet set = load_external(labels, std::nullopt);
    LabelGrid rebuilt(12, 9);
    for (const auto& m : set.metas) {
      const BinaryMask mask = set.mask(m.id);
      for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask.values()[i]) {
          CHECK(rebuilt.values()[i] == 0);
          rebuilt.values()[i] = m.id;
        }
    }
    CHECK(rebuilt == labels);
  }
}

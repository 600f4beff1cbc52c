#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "store.hpp"

using namespace prefbench;

namespace {

const std::vector<Sample>& store() {
  static const std::vector<Sample> s = testing::canonical_store();
  return s;
}

int positives(const Sample& s) {
  const auto g = s.label_grid();
  return static_cast<int>(std::count(g.begin(), g.end(), 1.0));
}

}  // namespace

TEST_CASE("each sample has exactly one positive and matches its event") {
  REQUIRE(store().size() == 480);
  for (const auto& s : store()) {
    CHECK(positives(s) == 1);
    CHECK(s.label_grid().size() == 560);
    CHECK(s.features.values.size() == 560u * 18u);
    CHECK(s.meta.aug == Transform::Identity);
  }
}

TEST_CASE("augment moves the label with the grid") {
  Sample s = store()[0];
  s.label_index = 0;
  const Sample r = augment(s, Transform::Rot180);
  CHECK(r.label_index == 27 * 20 + 19);
  CHECK(r.meta.aug == Transform::Rot180);
  CHECK(positives(r) == 1);
  CHECK(augment(augment(s, Transform::HFlip), Transform::HFlip) == s);
  CHECK(augment(augment(s, Transform::HFlip), Transform::VFlip) == augment(s, Transform::Rot180));
  CHECK(augment(augment(s, Transform::HFlip), Transform::VFlip).meta.aug == Transform::Rot180);
}

TEST_CASE("augmentation permutes feature vectors without changing them") {
  const Sample& s = store()[17];
  for (Transform t : kTransforms) {
    const Sample a = augment(s, t);
    std::multiset<std::vector<double>> x, y;
    for (int i = 0; i < 560; ++i) {
      const auto c = s.features.cell(i), d = a.features.cell(i);
      x.insert({c.begin(), c.end()});
      y.insert({d.begin(), d.end()});
    }
    CHECK(x == y);
    CHECK(positives(a) == 1);
  }
}

TEST_CASE("expansion makes four tagged copies") {
  const std::vector<Sample> few(store().begin(), store().begin() + 5);
  const auto all = expand_augmented(few);
  REQUIRE(all.size() == 20);
  std::map<Transform, int> tags;
  for (const auto& s : all) {
    ++tags[s.meta.aug];
    CHECK(positives(s) == 1);
  }
  for (Transform t : kTransforms) CHECK(tags[t] == 5);
}

TEST_CASE("fold arithmetic and hygiene") {
  const auto folds = build_folds(store(), 0.2, 7);
  REQUIRE(folds.size() == 4);
  std::multiset<std::size_t> tested;
  std::set<int> test_layouts;
  for (const auto& f : folds) {
    CHECK(f.train.size() == 1152);
    CHECK(f.val.size() == 72);
    CHECK(f.test.size() == 120);
    test_layouts.insert(f.plan.test_layout);
    std::vector<int> expected;
    for (int l = 1; l <= 4; ++l)
      if (l != f.plan.test_layout) expected.push_back(l);
    CHECK(f.plan.train_layouts == expected);

    std::set<std::size_t> train_base, val_base;
    std::map<std::size_t, std::set<Transform>> tags;
    for (const auto& r : f.train) {
      train_base.insert(r.index);
      tags[r.index].insert(r.aug);
      CHECK(store()[r.index].meta.layout_id != f.plan.test_layout);
    }
    for (const auto& [i, t] : tags) CHECK(t.size() == 4);
    for (const auto& r : f.val) {
      CHECK(r.aug == Transform::Identity);
      CHECK(store()[r.index].meta.layout_id != f.plan.test_layout);
      CHECK(train_base.count(r.index) == 0);
      val_base.insert(r.index);
    }
    CHECK(train_base.size() == 288);
    CHECK(val_base.size() == 72);
    // 8 validation samples for every (layout, agent) pair
    std::map<std::pair<int, std::string>, int> strata;
    for (std::size_t i : val_base) ++strata[{store()[i].meta.layout_id, store()[i].meta.agent_id}];
    CHECK(strata.size() == 9);
    for (const auto& [k, n] : strata) CHECK(n == 8);
    for (const auto& r : f.test) {
      CHECK(r.aug == Transform::Identity);
      CHECK(store()[r.index].meta.layout_id == f.plan.test_layout);
      tested.insert(r.index);
    }
    for (const auto& s : Fold::materialize(store(), f.train)) CHECK(positives(s) == 1);
  }
  CHECK(test_layouts == std::set<int>{1, 2, 3, 4});
  CHECK(tested.size() == store().size());
  CHECK(std::set<std::size_t>(tested.begin(), tested.end()).size() == store().size());
  CHECK(build_folds(store(), 0.2, 7)[2].val == folds[2].val);
  CHECK(build_folds(store(), 0.2, 8)[2].val != folds[2].val);
}

TEST_CASE("fold construction rejects bad input") {
  CHECK_THROWS_AS(build_folds(store(), 0.0, 1), DatasetError);
  CHECK_THROWS_AS(build_folds(store(), 1.0, 1), DatasetError);
  std::vector<Sample> aug{store()[0], augment(store()[200], Transform::HFlip)};
  CHECK_THROWS_AS(build_folds(aug, 0.2, 1), DatasetError);
  std::vector<Sample> one(store().begin(), store().begin() + 10);
  CHECK_THROWS_AS(build_folds(one, 0.2, 1), DatasetError);
}

TEST_CASE("dataset files round-trip") {
  std::stringstream a;
  write_dataset(a, store());
  const std::string text = a.str();
  const auto back = read_dataset(a);
  REQUIRE(back.size() == store().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].meta == store()[i].meta);
    CHECK(back[i].label_index == store()[i].label_index);
    CHECK(back[i].activity == store()[i].activity);
    REQUIRE(back[i].features.values.size() == store()[i].features.values.size());
    for (std::size_t k = 0; k < back[i].features.values.size(); ++k) {
      CHECK(std::abs(back[i].features.values[k] - store()[i].features.values[k]) <= 1e-12);
    }
  }
  std::stringstream b;
  write_dataset(b, back);
  CHECK(b.str() == text);
}

TEST_CASE("malformed lines report their line number") {
  std::stringstream a;
  write_dataset(a, std::vector<Sample>(store().begin(), store().begin() + 3));
  std::string text = a.str();
  const auto second = text.find('\n') + 1;
  const auto third = text.find('\n', second);
  text = text.substr(0, second) + text.substr(second, (third - second) / 2) + text.substr(third);
  std::stringstream in(text);
  try {
    (void)read_dataset(in);
    FAIL("expected a parse error");
  } catch (const DatasetError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::stringstream bad_label(R"({"layout_id":1,"agent_id":"A","hour":8,"activity":"Sit","aug":"Identity","rows":1,"cols":2,"F":18,"features":[],"label_index":0})");
  CHECK_THROWS_AS(read_dataset(bad_label), DatasetError);
}

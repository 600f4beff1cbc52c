#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "prefbench/metrics.hpp"
#include "prefbench/rng.hpp"

using namespace prefbench;

namespace {

// Thresholds at every distinct score, highest first; precision and recall of
// "score >= threshold" at each.
double ap_oracle(const std::vector<double>& s, const std::vector<double>& y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  double P = 0;
  for (double v : y) P += v;
  double prev = 0.0, ap = 0.0;
  for (double th : thresholds) {
    double tp = 0, k = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= th) {
        ++k;
        tp += y[i];
      }
    ap += (tp / P - prev) * (tp / k);
    prev = tp / P;
  }
  return ap;
}

double auc_oracle(const std::vector<double>& s, const std::vector<double>& y) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        den += 1;
        num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return num / den;
}

}  // namespace

TEST_CASE("metric examples") {
  CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.7, 0.6}, std::vector<double>{1, 0, 1, 0}) == 0.75);
  CHECK(roc_auc(std::vector<double>{0.4, 0.4, 0.4}, std::vector<double>{1, 0, 0}) == 0.5);
  CHECK(roc_auc(std::vector<double>{0.9, 0.1}, std::vector<double>{1, 0}) == 1.0);
  CHECK(auprc(std::vector<double>{0.9, 0.2, 0.1}, std::vector<double>{1, 0, 0}) == 1.0);
  CHECK(auprc(std::vector<double>{0.9, 0.1}, std::vector<double>{0, 1}) == 0.5);
  CHECK_THROWS_AS(auprc(std::vector<double>{0.1, 0.2}, std::vector<double>{0, 0}), MetricError);
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 1}), MetricError);
  CHECK_THROWS_AS(auprc(std::vector<double>{0.1}, std::vector<double>{1, 0}), std::invalid_argument);
}

TEST_CASE("exhaustive oracle comparison on length-8 sets") {
  Rng rng(12);
  int checked = 0;
  for (int pattern = 1; pattern < 256; ++pattern) {
    std::vector<double> y(8);
    for (int b = 0; b < 8; ++b) y[static_cast<std::size_t>(b)] = (pattern >> b) & 1;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> s(8);
      // a third of the vectors are coarse so that ties occur
      for (auto& v : s) v = trial % 3 == 0 ? static_cast<double>(rng.below(3)) : rng.uniform();
      CHECK(std::abs(auprc(s, y) - ap_oracle(s, y)) <= 1e-12);
      if (pattern != 255) CHECK(std::abs(roc_auc(s, y) - auc_oracle(s, y)) <= 1e-12);
      ++checked;
    }
  }
  CHECK(checked == 255 * 50);
}

TEST_CASE("random scorer on one positive in 560 averages H_560 / 560") {
  Rng rng(13);
  const int trials = 10000;
  std::vector<double> s(560), y(560, 0.0);
  double sum = 0, sq = 0;
  for (int t = 0; t < trials; ++t) {
    std::fill(y.begin(), y.end(), 0.0);
    y[rng.below(560)] = 1.0;
    for (auto& v : s) v = rng.uniform();
    const double a = auprc(s, y);
    sum += a;
    sq += a * a;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sq / trials - mean * mean) / trials);
  // AP is 1/rank and the rank is uniform
  double harmonic = 0;
  for (int k = 1; k <= 560; ++k) harmonic += 1.0 / k;
  CHECK(std::abs(mean - harmonic / 560) <= 3 * se);
}

TEST_CASE("strictly monotone transforms leave both metrics unchanged") {
  Rng rng(14);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(30), y(30), z(30);
    for (auto& v : y) v = rng.below(4) == 0 ? 1.0 : 0.0;
    y[0] = 1.0;
    y[1] = 0.0;
    for (auto& v : s) v = rng.uniform(-2, 2);
    for (std::size_t i = 0; i < s.size(); ++i) z[i] = std::exp(3 * s[i]) + 7;
    CHECK(auprc(s, y) == auprc(z, y));
    CHECK(roc_auc(s, y) == roc_auc(z, y));
  }
}

TEST_CASE("dropping the lowest-scored negative never lowers AUPRC") {
  Rng rng(15);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> s(20), y(20);
    for (auto& v : s) v = rng.uniform();
    for (auto& v : y) v = rng.below(3) == 0 ? 1.0 : 0.0;
    y[0] = 1;
    std::size_t low = 20;
    for (std::size_t i = 0; i < 20; ++i)
      if (y[i] == 0 && (low == 20 || s[i] < s[low])) low = i;
    if (low == 20) continue;
    auto s2 = s, y2 = y;
    s2.erase(s2.begin() + static_cast<long>(low));
    y2.erase(y2.begin() + static_cast<long>(low));
    CHECK(auprc(s2, y2) >= auprc(s, y));
  }
}

TEST_CASE("generalizability score") {
  CHECK(generalizability_score(0.5, 0.5) == 1.0);
  CHECK(generalizability_score(0.55, 0.5) == doctest::Approx(1.1));
  CHECK(generalizability_score(0.1, 0.5) == doctest::Approx(0.2));
  CHECK(generalizability_score(0.545, 0.5) > 1.0);
  CHECK_THROWS_AS(generalizability_score(0.3, 0.0), MetricError);
}

TEST_CASE("summaries average agents first, then folds, and mark gaps") {
  const std::vector<std::string> models{"GNN", "MLP"}, agents{"A", "B"};
  const std::vector<std::pair<int, int>> folds{{1, 1}, {2, 2}};
  std::vector<RunScore> runs;
  auto add = [&](std::string m, int f, std::string a, double gs, bool ok = true) {
    runs.push_back({m, f, f, a, ok, 0, 0, gs});
  };
  add("GNN", 1, "A", 1.0);
  add("GNN", 1, "B", 0.5);
  add("GNN", 2, "A", 0.2);
  add("GNN", 2, "B", 0.4);
  add("MLP", 1, "A", 0.9);
  add("MLP", 1, "B", 9.0, false);
  const auto s = summarize_gs(runs, models, folds, agents);
  const ModelGs* g = s.find("GNN");
  REQUIRE(g);
  CHECK(*g->folds[0].gs == doctest::Approx(0.75));
  CHECK(*g->folds[1].gs == doctest::Approx(0.3));
  CHECK(*g->overall_avg == doctest::Approx(0.525));
  CHECK(g->complete);
  const ModelGs* m = s.find("MLP");
  REQUIRE(m);
  CHECK(*m->folds[0].gs == doctest::Approx(0.9));
  CHECK(m->folds[0].agents_finished == 1);
  CHECK_FALSE(m->folds[1].gs.has_value());
  CHECK(*m->overall_avg == doctest::Approx(0.9));
  CHECK_FALSE(m->complete);
  CHECK(s.find("CNN1D") == nullptr);
}

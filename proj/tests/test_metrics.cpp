#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "specaudit/metrics.hpp"
#include "specaudit/rng.hpp"

using namespace specaudit;
using namespace specaudit::metrics;
using nn::Label;

namespace {

constexpr Label G = Label::Genuine;
constexpr Label S = Label::Synthesized;

/// Fraction of (positive, negative) pairs ranked correctly, ties counting
/// one half: the Mann-Whitney statistic, evaluated by brute force.
double mann_whitney(const std::vector<scalar_t>& scores,
                    const std::vector<Label>& truth) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (truth[i] != G) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (truth[j] != S) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("confusion counts the four hand-enumerated cases") {
  const auto c = confusion({G, G, S, S}, {G, S, S, S}, G);
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 2);
  CHECK(c.fp == 0);
  CHECK(c.total() == 4);
}

TEST_CASE("confusion on perfect predictions has no errors") {
  const auto c = confusion({G, S, G, S}, {G, S, G, S});
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);
  CHECK(c.tp == 2);
  CHECK(c.tn == 2);
}

TEST_CASE("fully flipped predictions on a balanced set give accuracy zero") {
  const auto report = compute_report({0.9, 0.8, 0.2, 0.1}, {G, G, S, S}, {S, S, G, G});
  CHECK(report.accuracy == 0.0);
}

TEST_CASE("confusion rejects mismatched and empty inputs") {
  CHECK_THROWS_WITH_AS(confusion({G, S}, {G}), doctest::Contains("LengthMismatch"),
                       Error);
  CHECK_THROWS_WITH_AS(confusion({}, {}), doctest::Contains("Empty"), Error);
}

TEST_CASE("per-class and macro precision/recall/f1 match the hand oracle") {
  const auto c = confusion({G, G, S, S}, {G, S, S, S}, G);

  const ClassPrf pos = prf_of_positive(c);
  CHECK(pos.precision == 1.0);
  CHECK(pos.recall == 0.5);
  CHECK(pos.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  const ClassPrf neg = prf_of_positive(swap_classes(c));
  CHECK(neg.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(neg.recall == 1.0);
  CHECK(neg.f1 == doctest::Approx(0.8).epsilon(1e-15));

  const ClassPrf macro = prf1(c);
  CHECK(macro.f1 == doctest::Approx(11.0 / 15.0).epsilon(1e-15));
  CHECK(macro.precision == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(macro.recall == 0.75);
  CHECK_FALSE(macro.degenerate);
}

TEST_CASE("perfect classifier scores ones across the board") {
  const auto macro = prf1(confusion({G, S}, {G, S}));
  CHECK(macro.precision == 1.0);
  CHECK(macro.recall == 1.0);
  CHECK(macro.f1 == 1.0);
}

TEST_CASE("a classifier that never predicts positive gets precision 0 by convention") {
  const auto c = confusion({G, S}, {S, S}, G);
  const ClassPrf pos = prf_of_positive(c);
  CHECK(pos.precision == 0.0);
  CHECK(pos.degenerate);
  CHECK(prf1(c).degenerate);
}

TEST_CASE("macro f1 is symmetric under a simultaneous class swap") {
  SeededRng rng(21);
  std::vector<Label> truth, pred, truth_swapped, pred_swapped;
  for (int i = 0; i < 40; ++i) {
    truth.push_back(rng.below(2) == 0 ? G : S);
    pred.push_back(rng.below(2) == 0 ? G : S);
    truth_swapped.push_back(truth.back() == G ? S : G);
    pred_swapped.push_back(pred.back() == G ? S : G);
  }
  const ClassPrf a = prf1(confusion(truth, pred));
  const ClassPrf b = prf1(confusion(truth_swapped, pred_swapped));
  CHECK(a.precision == doctest::Approx(b.precision).epsilon(1e-15));
  CHECK(a.recall == doctest::Approx(b.recall).epsilon(1e-15));
  CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-15));
}

TEST_CASE("roc curve matches the four-threshold hand enumeration") {
  const auto curve = roc_curve({0.9, 0.8, 0.3, 0.1}, {G, S, G, S}, G);
  REQUIRE(curve.size() == 5);
  const std::vector<scalar_t> want_x{0.0, 0.0, 0.5, 0.5, 1.0};
  const std::vector<scalar_t> want_y{0.0, 0.5, 0.5, 1.0, 1.0};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(curve.x[i] == want_x[i]);
    CHECK(curve.y[i] == want_y[i]);
  }
  CHECK(std::isinf(curve.threshold[0]));
  CHECK(curve.threshold[1] == 0.9);
  CHECK(curve.threshold[4] == 0.1);
  CHECK(auc_trapezoid(curve) == 0.75);
}

TEST_CASE("roc endpoints are present and x never decreases") {
  SeededRng rng(5);
  std::vector<scalar_t> scores;
  std::vector<Label> truth;
  for (int i = 0; i < 31; ++i) {
    scores.push_back(rng.uniform01());
    truth.push_back(rng.below(2) == 0 ? G : S);
  }
  const auto curve = roc_curve(scores, truth);
  CHECK(curve.x.front() == 0.0);
  CHECK(curve.y.front() == 0.0);
  CHECK(curve.x.back() == 1.0);
  CHECK(curve.y.back() == 1.0);
  CHECK(std::is_sorted(curve.x.begin(), curve.x.end()));
  for (scalar_t v : curve.x) CHECK((0.0 <= v && v <= 1.0));
  for (scalar_t v : curve.y) CHECK((0.0 <= v && v <= 1.0));
}

TEST_CASE("perfectly separated scores pass through (0,1) and reach auc 1") {
  const auto curve = roc_curve({0.9, 0.8, 0.2, 0.1}, {G, G, S, S});
  bool hits_corner = false;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.x[i] == 0.0 && curve.y[i] == 1.0) hits_corner = true;
  }
  CHECK(hits_corner);
  CHECK(auc_trapezoid(curve) == 1.0);
}

TEST_CASE("identical scores collapse to the endpoints with auc one half") {
  const auto curve = roc_curve({0.4, 0.4, 0.4, 0.4}, {G, S, G, S});
  REQUIRE(curve.size() == 2);
  CHECK(curve.x[0] == 0.0);
  CHECK(curve.y[0] == 0.0);
  CHECK(curve.x[1] == 1.0);
  CHECK(curve.y[1] == 1.0);
  CHECK(auc_trapezoid(curve) == 0.5);

  // The PR sweep sees one distinct threshold: a single point whose area is
  // undefined, reported as NaN by the aggregate path.
  const auto pr = pr_curve({0.4, 0.4, 0.4, 0.4}, {G, S, G, S}, G);
  REQUIRE(pr.size() == 1);
  CHECK(pr.x[0] == 1.0);
  CHECK(pr.y[0] == 0.5);
  const auto report =
      compute_report({0.4, 0.4, 0.4, 0.4}, {G, S, G, S}, {G, G, S, S}, G);
  CHECK(report.curves_valid);
  CHECK(report.roc_auc == 0.5);
  CHECK(std::isnan(report.pr_auc));
}

TEST_CASE("single-class ground truth is rejected for both curves") {
  CHECK_THROWS_WITH_AS(roc_curve({0.1, 0.2}, {G, G}), doctest::Contains("SingleClass"),
                       Error);
  CHECK_THROWS_WITH_AS(pr_curve({0.1, 0.2}, {S, S}), doctest::Contains("SingleClass"),
                       Error);
}

TEST_CASE("pr curve matches the four-point hand enumeration") {
  const auto curve = pr_curve({0.9, 0.8, 0.3, 0.1}, {G, S, G, S}, G);
  REQUIRE(curve.size() == 4);
  CHECK(curve.x[0] == 0.5);
  CHECK(curve.y[0] == 1.0);
  CHECK(curve.x[1] == 0.5);
  CHECK(curve.y[1] == 0.5);
  CHECK(curve.x[2] == 1.0);
  CHECK(curve.y[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(curve.x[3] == 1.0);
  CHECK(curve.y[3] == 0.5);
  CHECK(curve.x.back() == 1.0);
}

TEST_CASE("pr curve under perfect separation holds precision 1 until recall 1") {
  const auto curve = pr_curve({0.9, 0.8, 0.2, 0.1}, {G, G, S, S});
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.x[i] < 1.0) CHECK(curve.y[i] == 1.0);
  }
  CHECK(curve.y[std::find(curve.x.begin(), curve.x.end(), 1.0) - curve.x.begin()] ==
        1.0);
}

TEST_CASE("pr auc of uniform random scores approaches the prevalence") {
  SeededRng rng(99);
  std::vector<scalar_t> scores;
  std::vector<Label> truth;
  for (int i = 0; i < 5000; ++i) {
    scores.push_back(rng.uniform01());
    truth.push_back(rng.uniform01() < 0.1 ? G : S);
  }
  const scalar_t auc = auc_trapezoid(pr_curve(scores, truth));
  CHECK(auc == doctest::Approx(0.1).epsilon(0.35));
}

TEST_CASE("auc_trapezoid handles the trivial segments exactly") {
  CurvePoints diag;
  diag.x = {0.0, 1.0};
  diag.y = {0.0, 1.0};
  diag.threshold = {1.0, 0.0};
  CHECK(auc_trapezoid(diag) == 0.5);

  CurvePoints top;
  top.x = {0.0, 1.0};
  top.y = {1.0, 1.0};
  top.threshold = {1.0, 0.0};
  CHECK(auc_trapezoid(top) == 1.0);
}

TEST_CASE("auc_trapezoid rejects degenerate curves") {
  CurvePoints one;
  one.x = {0.5};
  one.y = {0.5};
  one.threshold = {0.5};
  CHECK_THROWS_WITH_AS(auc_trapezoid(one), doctest::Contains("TooFewPoints"), Error);

  CurvePoints unsorted;
  unsorted.x = {0.0, 0.6, 0.4};
  unsorted.y = {0.0, 0.5, 1.0};
  unsorted.threshold = {1.0, 0.5, 0.2};
  CHECK_THROWS_WITH_AS(auc_trapezoid(unsorted), doctest::Contains("UnsortedX"), Error);
}

TEST_CASE("roc auc equals brute-force mann-whitney pairing on random fixtures") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    SeededRng rng(1000 + trial);
    std::vector<scalar_t> scores;
    std::vector<Label> truth;
    bool seen_g = false, seen_s = false;
    for (int i = 0; i < 50; ++i) {
      // Half the trials use quantized scores so tie handling is exercised.
      const scalar_t raw = rng.uniform01();
      scores.push_back(trial % 2 == 0 ? raw : std::round(raw * 10.0) / 10.0);
      const Label l = rng.below(2) == 0 ? G : S;
      truth.push_back(l);
      (l == G ? seen_g : seen_s) = true;
    }
    if (!seen_g || !seen_s) continue;
    const scalar_t auc = auc_trapezoid(roc_curve(scores, truth));
    CHECK(auc == doctest::Approx(mann_whitney(scores, truth)).epsilon(1e-12));
  }
}

TEST_CASE("roc auc is invariant under strictly monotone score transforms") {
  SeededRng rng(77);
  std::vector<scalar_t> scores, cubed;
  std::vector<Label> truth;
  for (int i = 0; i < 40; ++i) {
    const scalar_t s = rng.uniform01();
    scores.push_back(s);
    cubed.push_back(s * s * s);
    truth.push_back(rng.below(2) == 0 ? G : S);
  }
  CHECK(auc_trapezoid(roc_curve(scores, truth)) ==
        doctest::Approx(auc_trapezoid(roc_curve(cubed, truth))).epsilon(1e-15));
}

TEST_CASE("compute_report assembles counts, rates, and areas coherently") {
  const auto report =
      compute_report({0.9, 0.8, 0.3, 0.1}, {G, S, G, S}, {G, G, S, S});
  CHECK(report.accuracy == 0.5);
  CHECK(report.n_genuine == 2);
  CHECK(report.n_synthesized == 2);
  CHECK(report.confusion.total() == 4);
  CHECK(report.curves_valid);
  CHECK(report.roc_auc == 0.75);
  CHECK((0.0 <= report.pr_auc && report.pr_auc <= 1.0));
  CHECK((0.0 <= report.f1 && report.f1 <= 1.0));
  CHECK(report.positive_class == G);
}

TEST_CASE("compute_report survives single-class truth without curves") {
  const auto report = compute_report({0.9, 0.8}, {G, G}, {G, G});
  CHECK(report.accuracy == 1.0);
  CHECK_FALSE(report.curves_valid);
  CHECK(report.roc.size() == 0);
  CHECK(std::isnan(report.roc_auc));
  CHECK(std::isnan(report.pr_auc));
}

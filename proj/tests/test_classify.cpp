#include <doctest.h>

#include <cmath>

#include "fconn/classify.hpp"
#include "fconn/rng.hpp"
#include "test_helpers.hpp"

using namespace fconn;

namespace {

LabeledDataset random_dataset(std::size_t n, std::size_t p, std::uint64_t seed,
                              double signal = 0.0) {
  LabeledDataset ds;
  Rng rng(seed);
  for (std::size_t j = 0; j < p; ++j) {
    ds.feature_names.push_back("f" + std::to_string(j));
  }
  ds.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i < n / 2 ? 0 : 1;
    ds.subject_ids.push_back("s" + std::to_string(i));
    ds.labels.push_back(label);
    for (std::size_t j = 0; j < p; ++j) {
      ds.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rng.gaussian() + signal * (label ? 1.0 : -1.0) * (j % 3 == 0);
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("gradient checks pass on seeded random problems") {
  // 20 problems split between the two linear models
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed * 31 + 7);
    const auto n = 6 + rng.below(12);
    const auto p = 2 + rng.below(6);
    Eigen::MatrixXd x(n, p);
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            rng.gaussian();
      }
      y.push_back(static_cast<int>(rng.below(2)));
    }
    if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
    if (std::count(y.begin(), y.end(), 0) == 0) y[0] = 0;
    Eigen::VectorXd w(p);
    for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = rng.gaussian() * 0.5;
    const double b = rng.gaussian() * 0.5;
    const double lambda = rng.uniform(0.0, 0.1);
    const double h = 1e-5;

    SUBCASE("logistic") {
      Eigen::VectorXd grad_w;
      double grad_b = 0.0;
      logreg_gradient(x, y, w, b, lambda, grad_w, grad_b);
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        Eigen::VectorXd wp = w, wm = w;
        wp(j) += h;
        wm(j) -= h;
        const double fd = (logreg_loss(x, y, wp, b, lambda) -
                           logreg_loss(x, y, wm, b, lambda)) /
                          (2 * h);
        CHECK(std::abs(grad_w(j) - fd) / std::max(1.0, std::abs(fd)) < 1e-5);
      }
    }
    SUBCASE("svm away from kinks") {
      bool kink_free = true;
      for (std::size_t i = 0; i < n; ++i) {
        const double ypm = y[i] ? 1.0 : -1.0;
        const double margin =
            ypm * (x.row(static_cast<Eigen::Index>(i)).dot(w) + b);
        if (std::abs(1.0 - margin) <= 1e-3) kink_free = false;
      }
      if (!kink_free) continue;  // resampling handled by other seeds
      Eigen::VectorXd grad_w;
      double grad_b = 0.0;
      svm_subgradient(x, y, w, b, lambda, grad_w, grad_b);
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        Eigen::VectorXd wp = w, wm = w;
        wp(j) += h;
        wm(j) -= h;
        const double fd =
            (svm_loss(x, y, wp, b, lambda) - svm_loss(x, y, wm, b, lambda)) /
            (2 * h);
        CHECK(std::abs(grad_w(j) - fd) / std::max(1.0, std::abs(fd)) < 1e-5);
      }
    }
  }
}

TEST_CASE("training diverges loudly when the loss explodes") {
  Eigen::MatrixXd x(4, 1);
  x << 1e8, -1e8, 2e8, -3e8;
  const std::vector<int> y{1, 0, 1, 0};
  ClassifierConfig cfg;
  cfg.learning_rate = 1e30;
  cfg.epochs = 50;
  cfg.l2_lambda = 1e20;
  try {
    train_logreg(x, y, cfg);
    // some escapes are fine as long as the result is finite
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::diverged_loss);
  }
}

TEST_CASE("LOOCV report is deterministic, fold hygiene holds") {
  const auto ds = random_dataset(10, 6, 42, 1.0);

  for (ClassifierKind kind :
       {ClassifierKind::logistic_regression, ClassifierKind::linear_svm,
        ClassifierKind::random_forest}) {
    ClassifierConfig cfg;
    cfg.kind = kind;
    cfg.epochs = 80;
    cfg.trees = 15;
    cfg.rng_seed = 9;

    SUBCASE("determinism and jobs-independence") {
      const auto a = loocv(ds, cfg, {0.1, 0.2}, 1);
      const auto b = loocv(ds, cfg, {0.1, 0.2}, 4);
      REQUIRE(a.per_subject.size() == b.per_subject.size());
      for (std::size_t i = 0; i < a.per_subject.size(); ++i) {
        CHECK(a.per_subject[i].score == b.per_subject[i].score);
        CHECK(a.per_subject[i].predicted == b.per_subject[i].predicted);
      }
      CHECK(a.accuracy == b.accuracy);
    }

    SUBCASE("mutating the held-out row never changes the fold model") {
      Rng rng(1234);
      for (int fold = 0; fold < 5; ++fold) {
        const auto held_out =
            static_cast<std::size_t>(rng.below(ds.subjects()));
        const auto model_before = fit_fold(ds, held_out, cfg);

        auto mutated = ds;
        for (Eigen::Index j = 0; j < mutated.matrix.cols(); ++j) {
          mutated.matrix(static_cast<Eigen::Index>(held_out), j) =
              rng.gaussian() * 100.0;
        }
        const auto model_after = fit_fold(mutated, held_out, cfg);
        CHECK(model_before.serialize() == model_after.serialize());

        // identical predictions on every other subject
        for (std::size_t i = 0; i < ds.subjects(); ++i) {
          if (i == held_out) continue;
          const Eigen::VectorXd row =
              ds.matrix.row(static_cast<Eigen::Index>(i)).transpose();
          CHECK(predict_score(model_before, row) ==
                predict_score(model_after, row));
        }
      }
    }
  }
}

TEST_CASE("linear predictions are invariant to positive affine rescaling") {
  const auto ds = random_dataset(12, 5, 77, 0.8);
  auto rescaled = ds;
  Rng rng(5);
  for (Eigen::Index j = 0; j < rescaled.matrix.cols(); ++j) {
    const double a = rng.uniform(0.2, 5.0);
    const double b = rng.uniform(-10.0, 10.0);
    rescaled.matrix.col(j) = a * rescaled.matrix.col(j).array() + b;
  }
  for (ClassifierKind kind :
       {ClassifierKind::logistic_regression, ClassifierKind::linear_svm}) {
    ClassifierConfig cfg;
    cfg.kind = kind;
    cfg.epochs = 120;
    const auto a = loocv(ds, cfg);
    const auto b = loocv(rescaled, cfg);
    for (std::size_t i = 0; i < a.per_subject.size(); ++i) {
      CHECK(a.per_subject[i].predicted == b.per_subject[i].predicted);
      CHECK(std::abs(a.per_subject[i].score - b.per_subject[i].score) < 1e-9);
    }
  }
}

TEST_CASE("ROC is monotone and tpr_at_fpr is monotone in the target") {
  Rng rng(300);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 4 + rng.below(20);
    std::vector<int> labels;
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(static_cast<int>(rng.below(2)));
      scores.push_back(rng.below(4) == 0 ? 0.5 : rng.uniform());  // force ties
    }
    if (std::count(labels.begin(), labels.end(), 1) == 0) labels[0] = 1;
    if (std::count(labels.begin(), labels.end(), 0) == 0) labels[0] = 0;

    const auto roc = roc_points(labels, scores);
    for (std::size_t k = 1; k < roc.size(); ++k) {
      CHECK(roc[k].fpr >= roc[k - 1].fpr);
      CHECK(roc[k].tpr >= roc[k - 1].tpr);
    }
    CHECK(roc.front().fpr == 0.0);
    CHECK(roc.front().tpr == 0.0);
    CHECK(roc.back().fpr == 1.0);
    CHECK(roc.back().tpr == 1.0);

    const auto table = tpr_at_fpr(roc, {0.0, 0.1, 0.25, 0.5, 0.9, 1.0});
    double previous = -1.0;
    for (const auto& [target, tpr] : table) {
      CHECK(tpr >= previous);
      previous = tpr;
    }
  }
}

TEST_CASE("roc_points requires both classes") {
  try {
    roc_points({1, 1, 1}, {0.1, 0.2, 0.3});
    FAIL("expected SingleClassLabels");
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::single_class_labels);
  }
}

TEST_CASE("loocv rejects cohorts a fold would break") {
  auto ds = random_dataset(4, 3, 1);
  ds.labels = {0, 0, 0, 1};
  try {
    loocv(ds, {});
    FAIL("expected ClassUnderpopulated");
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::class_underpopulated);
  }
}

TEST_CASE("predict_score rejects dimension mismatches") {
  Eigen::MatrixXd x(4, 2);
  x << -1, 0, -2, 1, 1, 0, 2, 1;
  const auto model = train_logreg(x, {0, 0, 1, 1}, {});
  Eigen::VectorXd wrong(3);
  wrong << 1, 2, 3;
  try {
    predict_score(model, wrong);
    FAIL("expected DimensionMismatch");
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::dimension_mismatch);
  }
}

TEST_CASE("forest respects max_depth and purity stopping") {
  Eigen::MatrixXd x(8, 1);
  x << 1, 2, 3, 4, 5, 6, 7, 8;
  const std::vector<int> y{0, 1, 0, 1, 0, 1, 0, 1};
  ClassifierConfig cfg;
  cfg.kind = ClassifierKind::random_forest;
  cfg.trees = 3;
  cfg.max_depth = 1;
  cfg.rng_seed = 4;
  const auto model = train_random_forest(x, y, cfg);
  for (const auto& tree : model.trees) {
    // depth - 1 split means at most 3 nodes
    CHECK(tree.nodes.size() <= 3);
  }
}

TEST_CASE("forest score is the fraction of trees voting class 1") {
  const auto ds = random_dataset(12, 4, 50, 1.2);
  ClassifierConfig cfg;
  cfg.kind = ClassifierKind::random_forest;
  cfg.trees = 7;
  cfg.rng_seed = 3;
  std::vector<int> y = ds.labels;
  const auto model = train_random_forest(ds.matrix, y, cfg);
  for (std::size_t i = 0; i < ds.subjects(); ++i) {
    const Eigen::VectorXd row =
        ds.matrix.row(static_cast<Eigen::Index>(i)).transpose();
    const double score = predict_score(model, row);
    int votes = 0;
    for (const auto& tree : model.trees) votes += tree.leaf_vote(row);
    CHECK(score == doctest::Approx(double(votes) / 7.0));
  }
}

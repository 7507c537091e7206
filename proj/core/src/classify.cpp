#include "fconn/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fconn/parallel.hpp"
#include "fconn/rng.hpp"

namespace fconn {

using json = nlohmann::json;

std::string_view classifier_kind_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::logistic_regression: return "logistic_regression";
    case ClassifierKind::linear_svm: return "linear_svm";
    case ClassifierKind::random_forest: return "random_forest";
  }
  return "unknown";
}

ClassifierKind classifier_kind_from_name(std::string_view name) {
  if (name == "logistic_regression" || name == "logreg" || name == "lr") {
    return ClassifierKind::logistic_regression;
  }
  if (name == "linear_svm" || name == "svm") return ClassifierKind::linear_svm;
  if (name == "random_forest" || name == "rf") {
    return ClassifierKind::random_forest;
  }
  throw Error(ErrorCode::spec_invalid,
              "unknown classifier '" + std::string(name) + "'");
}

namespace {

void require_both_classes(const std::vector<int>& y) {
  const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
  if (!has0 || !has1) {
    throw Error(ErrorCode::single_class_training,
                "training labels contain a single class");
  }
}

double sigmoid(double f) { return 1.0 / (1.0 + std::exp(-f)); }

// log(1 + exp(-|f|)) + max(f, 0) - f*y, the overflow-safe log-loss term
double logloss_term(double f, int y) {
  return std::log1p(std::exp(-std::abs(f))) + std::max(f, 0.0) - f * double(y);
}

}  // namespace

Standardizer standardize_fit(const Eigen::MatrixXd& train_matrix) {
  const auto n = train_matrix.rows();
  const auto p = train_matrix.cols();
  Standardizer s;
  s.mean = train_matrix.colwise().mean();
  s.std_dev.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double ss = (train_matrix.col(j).array() - s.mean(j)).square().sum();
    const double sd = std::sqrt(ss / double(n - 1));
    s.std_dev(j) = std::max(sd, 1e-12);
  }
  return s;
}

double logreg_loss(const Eigen::MatrixXd& x, const std::vector<int>& y,
                   const Eigen::VectorXd& w, double b, double lambda) {
  const auto n = x.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    total += logloss_term(x.row(i).dot(w) + b, y[static_cast<std::size_t>(i)]);
  }
  return total / double(n) + 0.5 * lambda * w.squaredNorm();
}

void logreg_gradient(const Eigen::MatrixXd& x, const std::vector<int>& y,
                     const Eigen::VectorXd& w, double b, double lambda,
                     Eigen::VectorXd& grad_w, double& grad_b) {
  const auto n = x.rows();
  grad_w = Eigen::VectorXd::Zero(w.size());
  grad_b = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double err =
        sigmoid(x.row(i).dot(w) + b) - double(y[static_cast<std::size_t>(i)]);
    grad_w += err * x.row(i).transpose();
    grad_b += err;
  }
  grad_w /= double(n);
  grad_b /= double(n);
  grad_w += lambda * w;
}

double svm_loss(const Eigen::MatrixXd& x, const std::vector<int>& y,
                const Eigen::VectorXd& w, double b, double lambda) {
  const auto n = x.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ypm = y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    total += std::max(0.0, 1.0 - ypm * (x.row(i).dot(w) + b));
  }
  return total / double(n) + 0.5 * lambda * w.squaredNorm();
}

void svm_subgradient(const Eigen::MatrixXd& x, const std::vector<int>& y,
                     const Eigen::VectorXd& w, double b, double lambda,
                     Eigen::VectorXd& grad_w, double& grad_b) {
  const auto n = x.rows();
  grad_w = Eigen::VectorXd::Zero(w.size());
  grad_b = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ypm = y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    const double margin = ypm * (x.row(i).dot(w) + b);
    if (margin < 1.0) {  // strictly inside: the kink itself contributes zero
      grad_w -= ypm * x.row(i).transpose();
      grad_b -= ypm;
    }
  }
  grad_w /= double(n);
  grad_b /= double(n);
  grad_w += lambda * w;
}

namespace {

template <typename LossFn, typename GradFn>
TrainedModel train_linear(const Eigen::MatrixXd& x, const std::vector<int>& y,
                          const ClassifierConfig& cfg, ClassifierKind kind,
                          LossFn loss_fn, GradFn grad_fn) {
  require_both_classes(y);
  if (x.rows() != static_cast<Eigen::Index>(y.size())) {
    throw Error(ErrorCode::dimension_mismatch, "rows of X != labels");
  }
  TrainedModel model;
  model.kind = kind;
  model.n_features = x.cols();
  model.scaler = standardize_fit(x);

  Eigen::MatrixXd xs(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    xs.row(i) = model.scaler.apply(x.row(i).transpose()).transpose();
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  Eigen::VectorXd grad_w;
  double grad_b = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    grad_fn(xs, y, w, b, cfg.l2_lambda, grad_w, grad_b);
    w -= cfg.learning_rate * grad_w;
    b -= cfg.learning_rate * grad_b;
    if (!w.allFinite() || !std::isfinite(b)) {
      throw Error(ErrorCode::diverged_loss,
                  "weights became non-finite at epoch " + std::to_string(epoch));
    }
  }
  const double final_loss = loss_fn(xs, y, w, b, cfg.l2_lambda);
  if (!std::isfinite(final_loss)) {
    throw Error(ErrorCode::diverged_loss, "final loss is non-finite");
  }
  model.weights = std::move(w);
  model.bias = b;
  return model;
}

}  // namespace

TrainedModel train_logreg(const Eigen::MatrixXd& x, const std::vector<int>& y,
                          const ClassifierConfig& cfg) {
  return train_linear(x, y, cfg, ClassifierKind::logistic_regression,
                      logreg_loss, logreg_gradient);
}

TrainedModel train_linear_svm(const Eigen::MatrixXd& x,
                              const std::vector<int>& y,
                              const ClassifierConfig& cfg) {
  return train_linear(x, y, cfg, ClassifierKind::linear_svm, svm_loss,
                      svm_subgradient);
}

double gini_impurity(std::int64_t count0, std::int64_t count1) {
  const double total = double(count0 + count1);
  if (total <= 0.0) return 0.0;
  const double p0 = double(count0) / total;
  const double p1 = double(count1) / total;
  return 1.0 - p0 * p0 - p1 * p1;
}

namespace {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
};

// Best (weighted-Gini-minimizing) split over the candidate features for the
// sample rows in `rows`. Ties prefer the lower feature index, then the lower
// threshold; candidates are scanned in ascending feature order so a strict
// comparison implements exactly that.
SplitChoice best_split(const Eigen::MatrixXd& x, const std::vector<int>& y,
                       const std::vector<int>& rows,
                       std::vector<int> candidate_features) {
  std::sort(candidate_features.begin(), candidate_features.end());
  SplitChoice best;

  std::vector<std::pair<double, int>> ordered;  // (value, label)
  for (const int feature : candidate_features) {
    ordered.clear();
    for (const int row : rows) {
      ordered.emplace_back(x(row, feature), y[static_cast<std::size_t>(row)]);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::int64_t left[2] = {0, 0};
    std::int64_t right[2] = {0, 0};
    for (const auto& [value, label] : ordered) ++right[label];
    const auto total = static_cast<std::int64_t>(ordered.size());

    for (std::size_t k = 0; k + 1 < ordered.size(); ++k) {
      ++left[ordered[k].second];
      --right[ordered[k].second];
      if (ordered[k].first == ordered[k + 1].first) continue;  // no cut here
      const double threshold = 0.5 * (ordered[k].first + ordered[k + 1].first);
      const auto n_left = static_cast<std::int64_t>(k + 1);
      const auto n_right = total - n_left;
      const double score = (double(n_left) * gini_impurity(left[0], left[1]) +
                            double(n_right) * gini_impurity(right[0], right[1])) /
                           double(total);
      if (score < best.score) {
        best = {true, feature, threshold, score};
      }
    }
  }
  return best;
}

int grow_tree(const Eigen::MatrixXd& x, const std::vector<int>& y,
              const std::vector<int>& rows, int depth,
              const ClassifierConfig& cfg, int feature_subset, Rng& rng,
              DecisionTree& tree) {
  TreeNode node;
  for (const int row : rows) ++node.counts[y[static_cast<std::size_t>(row)]];

  const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
  const bool depth_capped = cfg.max_depth > 0 && depth >= cfg.max_depth;
  if (pure || rows.size() < 2 || depth_capped) {
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size() - 1);
  }

  // seeded feature subset: partial Fisher-Yates over the feature indices
  const int p = static_cast<int>(x.cols());
  std::vector<int> all_features(p);
  std::iota(all_features.begin(), all_features.end(), 0);
  for (int k = 0; k < feature_subset; ++k) {
    const auto pick =
        k + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - k)));
    std::swap(all_features[k], all_features[pick]);
  }
  all_features.resize(feature_subset);

  const SplitChoice split = best_split(x, y, rows, all_features);
  if (!split.found) {  // all candidate features constant in this node
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size() - 1);
  }

  std::vector<int> left_rows, right_rows;
  for (const int row : rows) {
    if (x(row, split.feature) <= split.threshold) {
      left_rows.push_back(row);
    } else {
      right_rows.push_back(row);
    }
  }

  node.feature = split.feature;
  node.threshold = split.threshold;
  const auto index = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(node);
  const int left = grow_tree(x, y, left_rows, depth + 1, cfg, feature_subset,
                             rng, tree);
  const int right = grow_tree(x, y, right_rows, depth + 1, cfg, feature_subset,
                              rng, tree);
  tree.nodes[static_cast<std::size_t>(index)].left = left;
  tree.nodes[static_cast<std::size_t>(index)].right = right;
  return index;
}

}  // namespace

int DecisionTree::leaf_vote(const Eigen::VectorXd& x) const {
  int at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(at)];
    at = x(node.feature) <= node.threshold ? node.left : node.right;
  }
  const auto& leaf = nodes[static_cast<std::size_t>(at)];
  return leaf.counts[1] > leaf.counts[0] ? 1 : 0;
}

TrainedModel train_random_forest(const Eigen::MatrixXd& x,
                                 const std::vector<int>& y,
                                 const ClassifierConfig& cfg) {
  require_both_classes(y);
  if (x.rows() != static_cast<Eigen::Index>(y.size())) {
    throw Error(ErrorCode::dimension_mismatch, "rows of X != labels");
  }
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const int subset =
      cfg.features_per_split > 0
          ? std::min(cfg.features_per_split, p)
          : static_cast<int>(std::ceil(std::sqrt(double(p))));

  TrainedModel model;
  model.kind = ClassifierKind::random_forest;
  model.n_features = x.cols();
  model.trees.resize(static_cast<std::size_t>(cfg.trees));
  for (int t = 0; t < cfg.trees; ++t) {
    // per-tree subseed = seed + tree index
    Rng rng(cfg.rng_seed + static_cast<std::uint64_t>(t));
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (auto& row : rows) {
      row = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    }
    grow_tree(x, y, rows, 0, cfg, subset, rng,
              model.trees[static_cast<std::size_t>(t)]);
  }
  return model;
}

TrainedModel train(const Eigen::MatrixXd& x, const std::vector<int>& y,
                   const ClassifierConfig& cfg) {
  switch (cfg.kind) {
    case ClassifierKind::logistic_regression: return train_logreg(x, y, cfg);
    case ClassifierKind::linear_svm: return train_linear_svm(x, y, cfg);
    case ClassifierKind::random_forest: return train_random_forest(x, y, cfg);
  }
  throw Error(ErrorCode::spec_invalid, "bad classifier kind");
}

double predict_score(const TrainedModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.n_features) {
    throw Error(ErrorCode::dimension_mismatch,
                "input has " + std::to_string(x.size()) + " features, model " +
                    std::to_string(model.n_features));
  }
  if (model.kind == ClassifierKind::random_forest) {
    std::size_t votes = 0;
    for (const auto& tree : model.trees) {
      votes += static_cast<std::size_t>(tree.leaf_vote(x));
    }
    return model.trees.empty() ? 0.0 : double(votes) / double(model.trees.size());
  }
  const double f = model.weights.dot(model.scaler.apply(x)) + model.bias;
  return model.kind == ClassifierKind::logistic_regression ? sigmoid(f) : f;
}

int predict_label(const TrainedModel& model, double score) {
  const double decision_point =
      model.kind == ClassifierKind::linear_svm ? 0.0 : 0.5;
  return score > decision_point ? 1 : 0;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

std::string TrainedModel::serialize() const {
  json doc;
  doc["kind"] = std::string(classifier_kind_name(kind));
  doc["n_features"] = n_features;
  if (kind == ClassifierKind::random_forest) {
    json forest = json::array();
    for (const auto& tree : trees) {
      json nodes = json::array();
      for (const auto& node : tree.nodes) {
        nodes.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right},
                         {"counts", {node.counts[0], node.counts[1]}}});
      }
      forest.push_back(std::move(nodes));
    }
    doc["trees"] = std::move(forest);
  } else {
    doc["weights"] = vector_to_json(weights);
    doc["bias"] = bias;
    doc["mean"] = vector_to_json(scaler.mean);
    doc["std"] = vector_to_json(scaler.std_dev);
  }
  return doc.dump();
}

std::vector<RocPoint> roc_points(const std::vector<int>& labels,
                                 const std::vector<double>& scores) {
  std::size_t positives = 0, negatives = 0;
  for (const int label : labels) (label ? positives : negatives)++;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::single_class_labels,
                "ROC needs both classes among the labels");
  }

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::vector<RocPoint> roc;
  roc.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  std::size_t k = 0;
  while (k < order.size()) {
    // group tied scores at one threshold
    const double threshold = scores[order[k]];
    while (k < order.size() && scores[order[k]] == threshold) {
      (labels[order[k]] ? tp : fp)++;
      ++k;
    }
    roc.push_back({double(fp) / double(negatives), double(tp) / double(positives)});
  }
  if (roc.back().fpr != 1.0 || roc.back().tpr != 1.0) {
    roc.push_back({1.0, 1.0});
  }
  // collapse consecutive duplicates
  roc.erase(std::unique(roc.begin(), roc.end(),
                        [](const RocPoint& a, const RocPoint& b) {
                          return a.fpr == b.fpr && a.tpr == b.tpr;
                        }),
            roc.end());
  return roc;
}

std::map<double, double> tpr_at_fpr(const std::vector<RocPoint>& roc,
                                    const std::vector<double>& targets) {
  std::map<double, double> out;
  for (const double target : targets) {
    double best = 0.0;
    for (const auto& point : roc) {
      if (point.fpr <= target) best = std::max(best, point.tpr);
    }
    out[target] = best;
  }
  return out;
}

CvReport make_report(const std::vector<SubjectResult>& per_subject,
                     const std::vector<double>& fpr_targets) {
  CvReport report;
  report.per_subject = per_subject;
  const auto n = per_subject.size();
  std::size_t correct = 0;
  std::vector<int> labels;
  std::vector<double> scores;
  labels.reserve(n);
  scores.reserve(n);
  for (const auto& row : per_subject) {
    correct += static_cast<std::size_t>(row.predicted == row.true_label);
    labels.push_back(row.true_label);
    scores.push_back(row.score);
  }
  report.accuracy = n == 0 ? 0.0 : double(correct) / double(n);
  report.accuracy_dispersion =
      n == 0 ? 0.0
             : std::sqrt(report.accuracy * (1.0 - report.accuracy) / double(n));
  report.roc = roc_points(labels, scores);
  report.tpr_at_fpr = tpr_at_fpr(report.roc, fpr_targets);
  return report;
}

TrainedModel fit_fold(const LabeledDataset& ds, std::size_t held_out,
                      const ClassifierConfig& cfg) {
  const auto n = ds.subjects();
  const auto p = static_cast<std::size_t>(ds.matrix.cols());
  Eigen::MatrixXd x(n - 1, p);
  std::vector<int> y;
  y.reserve(n - 1);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == held_out) continue;
    x.row(row++) = ds.matrix.row(static_cast<Eigen::Index>(i));
    y.push_back(ds.labels[i]);
  }
  return train(x, y, cfg);
}

CvReport loocv(const LabeledDataset& ds, const ClassifierConfig& cfg,
               const std::vector<double>& fpr_targets, int jobs) {
  const auto n = ds.subjects();
  std::size_t counts[2] = {0, 0};
  for (const int label : ds.labels) ++counts[label];
  if (n < 4 || counts[0] < 2 || counts[1] < 2) {
    throw Error(ErrorCode::class_underpopulated,
                "LOOCV needs >= 4 subjects and >= 2 per class; have " +
                    std::to_string(counts[0]) + "/" + std::to_string(counts[1]));
  }

  std::vector<SubjectResult> results(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const TrainedModel model = fit_fold(ds, i, cfg);
    const double score =
        predict_score(model, ds.matrix.row(static_cast<Eigen::Index>(i)).transpose());
    results[i] = {ds.subject_ids[i], ds.labels[i], score,
                  predict_label(model, score)};
  });
  return make_report(results, fpr_targets);
}

}  // namespace fconn

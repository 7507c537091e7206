// Two-group classification under leave-one-out cross-validation: L2 logistic
// regression and linear SVM trained by deterministic full-batch (sub)gradient
// descent, and a seeded random forest with Gini splits. Standardization is
// fit inside each training fold so the held-out subject never leaks into the
// model.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fconn/error.hpp"
#include "fconn/features.hpp"

namespace fconn {

enum class ClassifierKind { logistic_regression, linear_svm, random_forest };

std::string_view classifier_kind_name(ClassifierKind kind);
ClassifierKind classifier_kind_from_name(std::string_view name);

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::logistic_regression;
  double l2_lambda = 1e-2;      // linear models
  int epochs = 500;             // gradient steps
  double learning_rate = 0.1;
  int trees = 100;              // forest
  int max_depth = 0;            // 0 = unlimited
  int features_per_split = 0;   // 0 = ceil(sqrt(P))
  std::uint64_t rng_seed = 0;
};

/// Per-feature training mean and standard deviation; std is floored at 1e-12
/// so constant features standardize to zero instead of blowing up.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_dev;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return (x - mean).cwiseQuotient(std_dev);
  }
};

Standardizer standardize_fit(const Eigen::MatrixXd& train_matrix);

/// Axis-aligned decision tree stored as a flat node array; leaves carry class
/// counts from the bootstrap sample that reached them.
struct TreeNode {
  int feature = -1;            // -1 marks a leaf
  double threshold = 0.0;      // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  std::int64_t counts[2] = {0, 0};
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  int leaf_vote(const Eigen::VectorXd& x) const;  // ties vote class 0
};

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::logistic_regression;
  Eigen::Index n_features = 0;
  Standardizer scaler;           // linear models only
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::vector<DecisionTree> trees;

  /// Canonical JSON text; byte-equal iff the models are identical.
  std::string serialize() const;
};

// ---- loss/gradient surfaces (exposed for finite-difference verification) ----

/// Mean log-loss + (lambda/2)||w||^2 for labels in {0,1}.
double logreg_loss(const Eigen::MatrixXd& x, const std::vector<int>& y,
                   const Eigen::VectorXd& w, double b, double lambda);
void logreg_gradient(const Eigen::MatrixXd& x, const std::vector<int>& y,
                     const Eigen::VectorXd& w, double b, double lambda,
                     Eigen::VectorXd& grad_w, double& grad_b);

/// Mean hinge loss + (lambda/2)||w||^2 for labels in {0,1} (mapped to +-1);
/// the hinge kink contributes zero subgradient.
double svm_loss(const Eigen::MatrixXd& x, const std::vector<int>& y,
                const Eigen::VectorXd& w, double b, double lambda);
void svm_subgradient(const Eigen::MatrixXd& x, const std::vector<int>& y,
                     const Eigen::VectorXd& w, double b, double lambda,
                     Eigen::VectorXd& grad_w, double& grad_b);

// ---- training ----

TrainedModel train_logreg(const Eigen::MatrixXd& x, const std::vector<int>& y,
                          const ClassifierConfig& cfg);
TrainedModel train_linear_svm(const Eigen::MatrixXd& x,
                              const std::vector<int>& y,
                              const ClassifierConfig& cfg);
TrainedModel train_random_forest(const Eigen::MatrixXd& x,
                                 const std::vector<int>& y,
                                 const ClassifierConfig& cfg);
/// Dispatch on cfg.kind.
TrainedModel train(const Eigen::MatrixXd& x, const std::vector<int>& y,
                   const ClassifierConfig& cfg);

/// Continuous score: sigmoid(w.x+b) for logistic, raw margin for SVM,
/// fraction of trees voting class 1 for the forest. Linear models apply the
/// stored standardization first. Throws DimensionMismatch.
double predict_score(const TrainedModel& model, const Eigen::VectorXd& x);

/// Score strictly above the decision point (0.5 for logistic/forest, 0 for
/// the SVM margin) predicts class 1; ties go to class 0.
int predict_label(const TrainedModel& model, double score);

/// Gini impurity of a two-class count pair.
double gini_impurity(std::int64_t count0, std::int64_t count1);

// ---- evaluation ----

struct SubjectResult {
  std::string subject_id;
  int true_label = 0;
  double score = 0.0;
  int predicted = 0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct CvReport {
  std::vector<SubjectResult> per_subject;
  double accuracy = 0.0;
  double accuracy_dispersion = 0.0;  // binomial standard error
  std::vector<RocPoint> roc;
  std::map<double, double> tpr_at_fpr;
};

/// Threshold sweep over descending unique scores with endpoints (0,0) and
/// (1,1); tied scores collapse to one threshold. Throws SingleClassLabels.
std::vector<RocPoint> roc_points(const std::vector<int>& labels,
                                 const std::vector<double>& scores);

/// Step-function read-off: for each target, the maximum TPR among ROC points
/// with fpr <= target.
std::map<double, double> tpr_at_fpr(const std::vector<RocPoint>& roc,
                                    const std::vector<double>& targets);

/// Aggregate out-of-fold scores into a CvReport (accuracy, binomial SE, ROC,
/// TPR table). Decision point depends on the classifier kind.
CvReport make_report(const std::vector<SubjectResult>& per_subject,
                     const std::vector<double>& fpr_targets);

/// Train on every row except held_out; used by loocv and directly testable
/// for fold hygiene.
TrainedModel fit_fold(const LabeledDataset& ds, std::size_t held_out,
                      const ClassifierConfig& cfg);

/// Leave-one-out cross-validation. Requires N >= 4 with >= 2 subjects per
/// class so every training fold keeps both classes. Deterministic given the
/// dataset and config; independent of jobs.
CvReport loocv(const LabeledDataset& ds, const ClassifierConfig& cfg,
               const std::vector<double>& fpr_targets = {0.1, 0.15, 0.2, 0.3},
               int jobs = 1);

}  // namespace fconn

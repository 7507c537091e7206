// Typed error conditions raised across the pipeline. Every condition a caller
// might want to branch on carries its own code; the message names the
// offending file/subject/region where applicable.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fconn {

enum class ErrorCode {
  // ingest
  missing_file,
  ragged_rows,
  non_numeric_cell,
  duplicate_region_label,
  too_few_rows,
  duplicate_subject,
  unknown_label,
  class_underpopulated,
  region_mismatch,
  tr_mismatch,
  // denoise
  order_too_high,
  band_out_of_range,
  rank_deficient_design,
  length_mismatch,
  // connectivity
  zero_variance_region,
  tau_out_of_range,
  density_out_of_range,
  // features
  missing_subject_vector,
  feature_name_mismatch,
  // classify
  single_class_training,
  diverged_loss,
  dimension_mismatch,
  single_class_labels,
  // simulate / cli
  spec_invalid,
  malformed_report,
  io_error,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::missing_file: return "MissingFile";
    case ErrorCode::ragged_rows: return "RaggedRows";
    case ErrorCode::non_numeric_cell: return "NonNumericCell";
    case ErrorCode::duplicate_region_label: return "DuplicateRegionLabel";
    case ErrorCode::too_few_rows: return "TooFewRows";
    case ErrorCode::duplicate_subject: return "DuplicateSubject";
    case ErrorCode::unknown_label: return "UnknownLabel";
    case ErrorCode::class_underpopulated: return "ClassUnderpopulated";
    case ErrorCode::region_mismatch: return "RegionMismatch";
    case ErrorCode::tr_mismatch: return "TrMismatch";
    case ErrorCode::order_too_high: return "OrderTooHigh";
    case ErrorCode::band_out_of_range: return "BandOutOfRange";
    case ErrorCode::rank_deficient_design: return "RankDeficientDesign";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::zero_variance_region: return "ZeroVarianceRegion";
    case ErrorCode::tau_out_of_range: return "TauOutOfRange";
    case ErrorCode::density_out_of_range: return "DensityOutOfRange";
    case ErrorCode::missing_subject_vector: return "MissingSubjectVector";
    case ErrorCode::feature_name_mismatch: return "FeatureNameMismatch";
    case ErrorCode::single_class_training: return "SingleClassTraining";
    case ErrorCode::diverged_loss: return "DivergedLoss";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::single_class_labels: return "SingleClassLabels";
    case ErrorCode::spec_invalid: return "SpecInvalid";
    case ErrorCode::malformed_report: return "MalformedReport";
    case ErrorCode::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace fconn

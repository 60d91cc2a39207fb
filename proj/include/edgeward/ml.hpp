#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace edgeward::ml {

constexpr int kFeatureCount = 8;

struct PatientRecord {
  std::array<double, kFeatureCount> features{};  // Pregnancies .. Age, CSV column order
  int outcome = 0;

  double pregnancies() const { return features[0]; }
  double glucose() const { return features[1]; }
  double diastolic_bp() const { return features[2]; }
  double skin_thickness_mm() const { return features[3]; }
  double insulin() const { return features[4]; }
  double bmi() const { return features[5]; }
  double pedigree() const { return features[6]; }
  double age_years() const { return features[7]; }
};

extern const std::array<const char*, kFeatureCount + 1> kColumnNames;

// Nine comma-separated columns, header row required. Throws ParseError with
// the offending line number.
std::vector<PatientRecord> parse_csv(std::string_view text);
// Throws DatasetMissing if the file cannot be opened.
std::vector<PatientRecord> load_csv(const std::filesystem::path& path);

// Lower-case hex SHA-256 of the file contents.
std::string file_sha256(const std::filesystem::path& path);

struct PreprocessSummary {
  std::size_t total = 0;
  std::size_t totalDiabetic = 0;
  std::size_t totalNonDiabetic = 0;
  std::size_t kept = 0;
  std::size_t diabetic = 0;
  std::size_t nonDiabetic = 0;
};

struct Preprocessed {
  std::vector<PatientRecord> records;
  PreprocessSummary summary;
};

// A zero diastolic BP, skin thickness or BMI marks a missing value; such rows
// are dropped. Input order is preserved.
Preprocessed preprocess(const std::vector<PatientRecord>& records);

struct Split {
  std::vector<PatientRecord> train;
  std::vector<PatientRecord> validation;
};

Split split(std::vector<PatientRecord> records, double trainFraction, std::uint64_t seed);

// Shannon entropy in bits; throws AllZero when every count is zero.
double entropy(const std::vector<std::size_t>& classCounts);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<std::size_t, 2> counts{};
};

struct Tree {
  std::vector<TreeNode> nodes;  // preorder, root at 0
  int depth() const;
};

struct ForestParams {
  int nTrees = 100;
  int maxDepth = 5;
  int tieClass = 1;
};

struct ForestModel {
  ForestParams params;
  std::uint64_t trainSeed = 0;
  std::vector<Tree> trees;
};

ForestModel train_forest(const std::vector<PatientRecord>& train, const ForestParams& params, std::uint64_t seed);

struct Prediction {
  int cls = 0;
  double voteFraction = 0.0;
};

int tree_predict(const Tree& tree, const PatientRecord& r, int tieClass);
Prediction predict(const ForestModel& model, const PatientRecord& r);

struct EvalReport {
  double accuracy = 0.0;
  std::array<std::array<std::size_t, 2>, 2> confusion{};  // [true][predicted]
  std::size_t nTrain = 0;
  std::size_t nValidation = 0;
};

EvalReport evaluate(const ForestModel& model, const std::vector<PatientRecord>& validation, std::size_t nTrain = 0);
std::string report_csv(const EvalReport& r);
std::string report_text(const EvalReport& r);

std::string serialize(const ForestModel& model);
ForestModel deserialize(std::string_view text);

}  // namespace edgeward::ml

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "glap/dataset.hpp"
#include "glap/model.hpp"
#include "glap/prototype.hpp"
#include "glap/synth.hpp"
#include "glap/transfer.hpp"

namespace glap::io {

// CSV: comma separated, '.' decimal point, no header, '#' lines and blank
// lines ignored. Parse errors throw InputError naming file and line.

/// One instance per row; returned transposed (d x N).
FeatureMatrix read_features(const std::filesystem::path& path);
LabelVector read_labels(const std::filesystem::path& path);
/// Rows: class_id, v_1, ..., v_a.
SemanticTable read_semantic_table(const std::filesystem::path& path);
/// Rows of a values, one per instance; returned a x N.
Eigen::MatrixXd read_matrix_rows(const std::filesystem::path& path);

FeatureMatrix parse_features(std::istream& in, const std::string& name);
LabelVector parse_labels(std::istream& in, const std::string& name);
SemanticTable parse_semantic_table(std::istream& in, const std::string& name);

/// Shortest decimal string that round-trips to `v`.
std::string format_double(double v);

/// Writes columns of `m` as rows.
void write_columns(std::ostream& out, const Eigen::MatrixXd& m);
void write_labels(std::ostream& out, const LabelVector& labels);
/// Rows: instance_index, predicted_class_id, one score per candidate.
void write_predictions(std::ostream& out, const Prediction& prediction);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const GlapModel& model);
GlapModel model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TransferReport& report);
nlohmann::json to_json(const SyntheticConfig& cfg);
nlohmann::json to_json(const StrategyConfig& cfg);
nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const TrialsReport& report);

/// Columns: npc, strategy, mean_accuracy, std_accuracy.
void write_npc_series(std::ostream& out, const std::vector<NpcPoint>& sweep);

/// Sorted keys, two-space indent, trailing LF.
std::string dump(const nlohmann::json& j);

/// Writes `content` in binary mode; throws InputError if the file cannot be opened.
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace glap::io

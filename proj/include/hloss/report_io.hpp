#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hloss/metrics.hpp"
#include "hloss/objective.hpp"
#include "hloss/trainer.hpp"

namespace hloss {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance echoed as the first line of every file the CLI writes.
struct RunManifest {
    std::string subcommand;
    std::map<std::string, std::string> inputs;
    std::map<std::string, std::string> hyperparameters;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> outputs;
    std::string tool_version = kToolVersion;
};

/// `# manifest {...}` with keys in sorted order, newline-terminated.
std::string manifest_line(const RunManifest& manifest);

/// Drops leading lines that start with `#`.
std::string_view skip_header_lines(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// CSV with header `f_1,...,f_m,label`; labels are class ids.
std::string format_dataset_csv(const Dataset& data, bool full_precision);
/// Parses the CSV form; labels may be class ids or leaf names / original ids
/// from the tree.
Dataset parse_dataset_csv(std::string_view text, const Hierarchy& h);

/// JSON checkpoint: dims, seed, config echo and row-major parameters at full
/// precision.
std::string format_checkpoint(const LinearModel& model, const TrainConfig& config);
LinearModel parse_checkpoint(std::string_view text);

/// Single JSON object mirroring EvaluationReport.
std::string format_report(const EvaluationReport& report, bool full_precision);

/// `tau,group_count,accuracy` rows.
std::string format_curve_csv(const CoarseningCurve& curve, bool full_precision);

/// Tab-separated sample_id, label, loss, predicted, correct.
std::string format_loss_report(const Objective& objective, const Eigen::MatrixXd& logits,
                               std::span<const NodeId> labels, bool full_precision,
                               int threads = 1);

} // namespace hloss

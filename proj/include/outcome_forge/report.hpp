#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "outcome_forge/eval.hpp"

namespace outcome_forge {

/// One row of the per-class layout (classifier, class, precision, recall, f1, accuracy).
struct ClassRow {
    std::string classifier;
    Label cls = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;  // percent
    bool converged = true;

    friend bool operator==(const ClassRow&, const ClassRow&) = default;
};

/// One row of the k-fold layout (classifier, mean, std, best, worst), all in percent.
struct SummaryRow {
    std::string classifier;
    double mean = 0.0;
    double std = 0.0;
    double best = 0.0;
    double worst = 0.0;
    bool converged = true;

    friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

enum class ReportLayout { per_class, kfold_summary };

/// Leave-one-out runs fill `class_rows`; k-fold runs fill `summary_rows`.
struct ReportTable {
    ReportLayout layout = ReportLayout::per_class;
    std::vector<ClassRow> class_rows;
    std::vector<SummaryRow> summary_rows;

    friend bool operator==(const ReportTable&, const ReportTable&) = default;
};

enum class ReportFormat { csv, markdown };
std::optional<ReportFormat> parse_report_format(std::string_view name);

ReportTable make_report(const ExperimentReport& report);

/// Metrics with 2 decimals, per-class accuracy in percent with 1 decimal,
/// k-fold statistics in percent with 2 decimals.
void write_report_csv(std::ostream& out, const ReportTable& table);
ReportTable read_report_csv(std::istream& in);

/// Column headers of the published tables; classifiers under their long names.
void write_report_markdown(std::ostream& out, const ReportTable& table);

void write_report(std::ostream& out, const ReportTable& table, ReportFormat format);

void write_subgroup_csv(std::ostream& out, std::span<const SubgroupReport> reports);
void write_subset_csv(std::ostream& out, std::span<const SubsetScore> scores);

/// Renders `content` into a sibling temporary file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace outcome_forge

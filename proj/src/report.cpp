#include "outcome_forge/report.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "outcome_forge/errors.hpp"

namespace outcome_forge {

namespace {

constexpr std::string_view kClassHeader = "classifier,class,precision,recall,f1,accuracy,converged";
constexpr std::string_view kSummaryHeader = "classifier,mean,std,best,worst,converged";

double round_to(double x, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(x * scale) / scale;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double to_double(const std::string& text, std::size_t row) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw ParseError(row, "'" + text + "' is not a number");
    return value;
}

bool to_bool(const std::string& text, std::size_t row) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ParseError(row, "'" + text + "' is not true/false");
}

std::string long_name(const std::string& id) {
    try {
        return std::string(display_name(id));
    } catch (const ConfigError&) {
        return id;
    }
}

std::string flagged(const std::string& id, bool converged) { return long_name(id) + (converged ? "" : " †"); }

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "markdown" || name == "md") return ReportFormat::markdown;
    return std::nullopt;
}

ReportTable make_report(const ExperimentReport& report) {
    ReportTable table;
    table.layout = report.cv == CvMode::kfold ? ReportLayout::kfold_summary : ReportLayout::per_class;
    for (const auto& model : report.models) {
        if (table.layout == ReportLayout::per_class) {
            const double accuracy = round_to(100.0 * model.metrics.accuracy, 1);
            for (Label c : {0, 1}) {
                table.class_rows.push_back({model.id, c, round_to(model.metrics.precision[c], 2),
                                            round_to(model.metrics.recall[c], 2), round_to(model.metrics.f1[c], 2),
                                            accuracy, model.converged});
            }
        } else {
            const KFoldSummary s = model.summary.value_or(KFoldSummary{});
            table.summary_rows.push_back({model.id, round_to(s.mean, 2), round_to(s.std, 2), round_to(s.best, 2),
                                          round_to(s.worst, 2), model.converged});
        }
    }
    return table;
}

void write_report_csv(std::ostream& out, const ReportTable& table) {
    if (table.layout == ReportLayout::per_class) {
        out << kClassHeader << '\n';
        for (const auto& r : table.class_rows) {
            out << fmt::format("{},{},{:.2f},{:.2f},{:.2f},{:.1f},{}\n", r.classifier, r.cls, r.precision, r.recall,
                               r.f1, r.accuracy, r.converged ? "true" : "false");
        }
    } else {
        out << kSummaryHeader << '\n';
        for (const auto& r : table.summary_rows) {
            out << fmt::format("{},{:.2f},{:.2f},{:.2f},{:.2f},{}\n", r.classifier, r.mean, r.std, r.best, r.worst,
                               r.converged ? "true" : "false");
        }
    }
}

ReportTable read_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("report is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    ReportTable table;
    if (line == kClassHeader) {
        table.layout = ReportLayout::per_class;
    } else if (line == kSummaryHeader) {
        table.layout = ReportLayout::kfold_summary;
    } else {
        throw SchemaError("unrecognised report header '" + line + "'");
    }

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto f = split(line);
        if (table.layout == ReportLayout::per_class) {
            if (f.size() != 7) throw ParseError(row, "expected 7 fields");
            const double cls = to_double(f[1], row);
            if (cls != 0.0 && cls != 1.0) throw ParseError(row, "class must be 0 or 1");
            table.class_rows.push_back({f[0], static_cast<Label>(cls), to_double(f[2], row), to_double(f[3], row),
                                        to_double(f[4], row), to_double(f[5], row), to_bool(f[6], row)});
        } else {
            if (f.size() != 6) throw ParseError(row, "expected 6 fields");
            table.summary_rows.push_back({f[0], to_double(f[1], row), to_double(f[2], row), to_double(f[3], row),
                                          to_double(f[4], row), to_bool(f[5], row)});
        }
    }
    return table;
}

void write_report_markdown(std::ostream& out, const ReportTable& table) {
    bool any_flag = false;
    if (table.layout == ReportLayout::per_class) {
        out << "| Classifier | Class | Precision | Recall | F1-score | Accuracy |\n";
        out << "|---|---|---|---|---|---|\n";
        for (std::size_t i = 0; i < table.class_rows.size(); ++i) {
            const auto& r = table.class_rows[i];
            const bool first = i == 0 || table.class_rows[i - 1].classifier != r.classifier;
            any_flag = any_flag || !r.converged;
            out << fmt::format("| {} | {} | {:.2f} | {:.2f} | {:.2f} | {} |\n",
                               first ? flagged(r.classifier, r.converged) : "", r.cls, r.precision, r.recall, r.f1,
                               first ? fmt::format("{:.1f}%", r.accuracy) : "");
        }
    } else {
        out << "| Classifier | Mean | Standard Deviation | Best | Worst |\n";
        out << "|---|---|---|---|---|\n";
        for (const auto& r : table.summary_rows) {
            any_flag = any_flag || !r.converged;
            out << fmt::format("| {} | {:.2f}% | {:.2f} | {:.2f}% | {:.2f}% |\n", flagged(r.classifier, r.converged),
                               r.mean, r.std, r.best, r.worst);
        }
    }
    if (any_flag) out << "\n† solver stopped at its iteration cap (converged=false)\n";
}

void write_report(std::ostream& out, const ReportTable& table, ReportFormat format) {
    if (format == ReportFormat::csv) {
        write_report_csv(out, table);
    } else {
        write_report_markdown(out, table);
    }
}

void write_subgroup_csv(std::ostream& out, std::span<const SubgroupReport> reports) {
    out << "classifier,group,rows,class,precision,recall,f1,accuracy\n";
    for (const auto& report : reports) {
        for (const auto& g : report.groups) {
            for (Label c : {0, 1}) {
                out << fmt::format("{},{},{},{},{:.2f},{:.2f},{:.2f},{:.1f}\n", report.model, g.group, g.rows, c,
                                   g.metrics.precision[c], g.metrics.recall[c], g.metrics.f1[c],
                                   100.0 * g.metrics.accuracy);
            }
        }
    }
}

void write_subset_csv(std::ostream& out, std::span<const SubsetScore> scores) {
    out << "rank,subset,size,accuracy,step\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::string subset;
        for (Feature f : scores[i].features) {
            if (!subset.empty()) subset += '+';
            subset += feature_name(f);
        }
        out << fmt::format("{},{},{},{:.1f},{}\n", i + 1, subset, scores[i].features.size(),
                           100.0 * scores[i].accuracy, scores[i].step);
    }
}

void write_file_atomically(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::random_device rd;
    const fs::path tmp = dir / fmt::format(".{}.{:08x}.tmp", path.filename().string(), rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw Error("write to '" + path.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot replace '" + path.string() + "'");
    }
}

}  // namespace outcome_forge

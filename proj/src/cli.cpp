#include "outcome_forge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "outcome_forge/errors.hpp"
#include "outcome_forge/eval.hpp"
#include "outcome_forge/random.hpp"
#include "outcome_forge/report.hpp"

namespace outcome_forge {

namespace {

// Thrown for argument combinations CLI11 cannot express.
struct UsageError : Error {
    using Error::Error;
};

struct SynthArgs {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string out;
    bool no_association = false;
};

struct RunArgs {
    std::string data;
    std::optional<std::size_t> synth_n;
    std::vector<std::string> models{"all"};
    std::string cv = "loocv";
    std::size_t k = 8;
    bool stratified = false;
    std::string resample = "random";
    std::optional<std::string> leakage;
    std::optional<std::string> group_by;
    std::string group_out;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::string> format;
};

struct SubsetArgs {
    std::string data;
    std::optional<std::size_t> synth_n;
    std::string model = "knn";
    std::size_t max_size = 3;
    std::string strategy = "exhaustive";
    std::string cv = "loocv";
    std::size_t k = 8;
    std::optional<std::uint64_t> seed;
    std::string out;
};

template <class T, class Parse>
T parse_choice(const std::string& value, Parse parse, const char* what) {
    const auto parsed = parse(value);
    if (!parsed) throw UsageError(std::string("unknown ") + what + " '" + value + "'");
    return *parsed;
}

bool stochastic_model(const std::string& id) { return id == "forest" || id == "mlp" || id == "gboost"; }

void require_seed(const std::optional<std::uint64_t>& seed, bool stochastic) {
    if (stochastic && !seed) throw UsageError("--seed is required for synthesis, resampling, k-fold plans and randomised models");
}

std::vector<PatientRecord> load_dataset(const std::string& data, std::optional<std::size_t> synth_n,
                                        std::uint64_t seed) {
    if (synth_n) {
        if (*synth_n == 0) throw UsageError("--synth-n must be at least 1");
        return synthesize_cohort(CohortSpec::published(), *synth_n, derive_seed(seed, hash_tag("synth")));
    }
    return load_csv(data);
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        write_file_atomically(path, content);
    }
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    if (a.n == 0) throw UsageError("--n must be at least 1");
    CohortSpec spec = CohortSpec::published();
    if (a.no_association) spec.association.reset();
    const auto records = synthesize_cohort(spec, a.n, a.seed);
    std::ostringstream csv;
    write_csv(csv, records);
    write_file_atomically(a.out, csv.str());
    for (const auto& [label, count] : class_counts(records)) out << "class " << label << ": " << count << '\n';
    return exit_ok;
}

int cmd_run(const RunArgs& a, std::ostream& out) {
    ExperimentConfig cfg;
    cfg.models = named_models(a.models);
    cfg.cv = parse_choice<CvMode>(a.cv, parse_cv_mode, "cv mode");
    cfg.k = a.k;
    cfg.stratified = a.stratified;
    if (a.resample != "none") {
        ResampleConfig rc;
        rc.method = parse_choice<ResampleMethod>(a.resample, parse_resample_method, "resample method");
        cfg.resample = rc;
    }
    if (a.leakage) {
        if (!cfg.resample) throw UsageError("--leakage needs a resample method");
        cfg.leakage = parse_choice<LeakageMode>(*a.leakage, parse_leakage_mode, "leakage mode");
    }
    std::optional<Feature> group_by;
    if (a.group_by) group_by = parse_choice<Feature>(*a.group_by, parse_feature, "feature");

    ReportFormat format = ReportFormat::csv;
    if (a.format) {
        format = parse_choice<ReportFormat>(*a.format, parse_report_format, "format");
    } else if (a.out.ends_with(".md")) {
        format = ReportFormat::markdown;
    }

    const bool stochastic = a.synth_n || cfg.resample || cfg.cv == CvMode::kfold ||
                            std::any_of(cfg.models.begin(), cfg.models.end(),
                                        [](const NamedModel& m) { return stochastic_model(m.id); });
    require_seed(a.seed, stochastic);
    cfg.seed = a.seed.value_or(0);
    cfg.validate();

    const auto dataset = load_dataset(a.data, a.synth_n, cfg.seed);
    const FeatureSchema& schema = FeatureSchema::clinical();
    const ExperimentReport report = run_experiment(dataset, schema, cfg);

    std::ostringstream table;
    write_report(table, make_report(report), format);
    emit(a.out, table.str(), out);

    if (group_by) {
        const auto groups = subgroup_report(report, schema, *group_by);
        std::ostringstream csv;
        write_subgroup_csv(csv, groups);
        std::string path = a.group_out;
        if (path.empty() && !a.out.empty() && a.out != "-") path = a.out + ".groups.csv";
        emit(path, csv.str(), out);
    }
    return exit_ok;
}

int cmd_subset(const SubsetArgs& a, std::ostream& out) {
    SubsetSearchConfig cfg;
    const std::vector<std::string> ids{a.model};
    cfg.model = named_models(ids).at(0);
    cfg.max_size = a.max_size;
    cfg.strategy = parse_choice<SearchStrategy>(a.strategy, parse_search_strategy, "search strategy");
    cfg.cv = parse_choice<CvMode>(a.cv, parse_cv_mode, "cv mode");
    cfg.k = a.k;
    require_seed(a.seed, a.synth_n || cfg.cv == CvMode::kfold || stochastic_model(a.model));
    cfg.seed = a.seed.value_or(0);

    const auto dataset = load_dataset(a.data, a.synth_n, cfg.seed);
    const auto scores = feature_subset_search(dataset, FeatureSchema::clinical(), cfg);
    std::ostringstream csv;
    write_subset_csv(csv, scores);
    emit(a.out, csv.str(), out);
    return exit_ok;
}

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
}

// Splices `key = value` lines of a --config file in as flags, skipping keys given on the
// command line. "true"/"false" values toggle switches.
std::vector<std::string> expand_config(std::span<const std::string> args) {
    std::vector<std::string> out(args.begin(), args.end());
    std::string path;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] == "--config") {
            if (i + 1 >= out.size()) throw UsageError("--config needs a file");
            path = out[i + 1];
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(i), out.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (out[i].starts_with("--config=")) {
            path = out[i].substr(9);
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty() || out.empty()) return out;

    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    std::vector<std::string> injected;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        if (given(out, flag)) continue;
        if (value == "true") {
            injected.push_back(flag);
        } else if (value != "false") {
            injected.push_back(flag);
            injected.push_back(value);
        }
    }
    out.insert(out.begin() + 1, injected.begin(), injected.end());
    return out;
}

void add_source(CLI::App& cmd, std::string& data, std::optional<std::size_t>& synth_n) {
    auto* d = cmd.add_option("--data", data, "cohort CSV");
    auto* s = cmd.add_option("--synth-n", synth_n, "synthesise a cohort of this size instead of reading --data");
    d->excludes(s);
    s->excludes(d);
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Surgical outcome prediction pipeline"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic cohort CSV");
    synth_cmd->add_option("--n", synth.n, "number of patients")->required();
    synth_cmd->add_option("--seed", synth.seed, "random seed")->required();
    synth_cmd->add_option("--out", synth.out, "output CSV")->required();
    synth_cmd->add_flag("--no-association", synth.no_association, "draw labels independently of the features");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "cross-validate models and write a report");
    std::string config_path;
    run_cmd->add_option("--config", config_path, "key = value file; flags take precedence");
    add_source(*run_cmd, run.data, run.synth_n);
    run_cmd->add_option("--models", run.models, "model ids or 'all'")->delimiter(',');
    run_cmd->add_option("--cv", run.cv, "loocv or kfold");
    run_cmd->add_option("--k", run.k, "folds for kfold");
    run_cmd->add_flag("--stratified", run.stratified, "stratify k-fold plans by label");
    run_cmd->add_option("--resample", run.resample, "none, random, smote, borderline_smote, svm_smote, adasyn");
    run_cmd->add_option("--leakage", run.leakage, "before_split or within_fold");
    run_cmd->add_option("--group-by", run.group_by, "categorical feature for a subgroup report");
    run_cmd->add_option("--group-out", run.group_out, "subgroup report CSV");
    run_cmd->add_option("--seed", run.seed, "master seed");
    run_cmd->add_option("--out", run.out, "report path ('-' or omitted: stdout)");
    run_cmd->add_option("--format", run.format, "csv or markdown");

    SubsetArgs subset;
    auto* subset_cmd = app.add_subcommand("subset", "rank feature subsets by cross-validated accuracy");
    subset_cmd->add_option("--config", config_path, "key = value file; flags take precedence");
    add_source(*subset_cmd, subset.data, subset.synth_n);
    subset_cmd->add_option("--model", subset.model, "model id");
    subset_cmd->add_option("--max-size", subset.max_size, "largest subset size");
    subset_cmd->add_option("--strategy", subset.strategy, "exhaustive or greedy_forward");
    subset_cmd->add_option("--cv", subset.cv, "loocv or kfold");
    subset_cmd->add_option("--k", subset.k, "folds for kfold");
    subset_cmd->add_option("--seed", subset.seed, "master seed");
    subset_cmd->add_option("--out", subset.out, "ranking CSV ('-' or omitted: stdout)");

    std::vector<std::string> expanded;
    try {
        expanded = expand_config(args);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    try {
        std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth, out);
        if (run_cmd->parsed()) {
            if (run.data.empty() && !run.synth_n) throw UsageError("one of --data or --synth-n is required");
            return cmd_run(run, out);
        }
        if (subset.data.empty() && !subset.synth_n) throw UsageError("one of --data or --synth-n is required");
        return cmd_subset(subset, out);
    } catch (const InfeasibleError& e) {
        err << "error: " << e.what() << '\n';
        return exit_infeasible;
    } catch (const ImbalanceError& e) {
        err << "error: " << e.what() << '\n';
        return exit_infeasible;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

}  // namespace outcome_forge

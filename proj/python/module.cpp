#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "outcome_forge/cli.hpp"
#include "outcome_forge/outcome_forge.hpp"

namespace py = pybind11;
using namespace outcome_forge;

namespace {

py::dict to_dict(const PatientRecord& r) {
    const auto& schema = FeatureSchema::clinical();
    py::dict d;
    for (const auto& col : schema.columns()) {
        if (col.kind == FeatureKind::numeric) {
            d[py::str(col.name)] = numeric_value(r, col.feature);
        } else {
            d[py::str(col.name)] = col.values[static_cast<std::size_t>(category_code(r, col.feature))];
        }
    }
    d[py::str(schema.label_name())] = r.seizure_free;
    return d;
}

PatientRecord from_dict(const py::dict& d) {
    const auto& schema = FeatureSchema::clinical();
    PatientRecord r;
    for (const auto& col : schema.columns()) {
        if (!d.contains(col.name)) throw SchemaError("record is missing column '" + col.name + "'");
        const py::handle value = d[py::str(col.name)];
        if (col.kind == FeatureKind::numeric) {
            set_numeric_value(r, col.feature, value.cast<double>());
            continue;
        }
        int code = -1;
        if (py::isinstance<py::str>(value)) {
            const auto text = value.cast<std::string>();
            const auto it = std::find(col.values.begin(), col.values.end(), text);
            if (it == col.values.end()) throw DataError("unknown value '" + text + "' for column '" + col.name + "'");
            code = static_cast<int>(it - col.values.begin());
        } else {
            code = value.cast<int>();
            if (code < 0 || static_cast<std::size_t>(code) >= col.values.size()) {
                throw DataError("code out of range for column '" + col.name + "'");
            }
        }
        set_category_code(r, col.feature, code);
    }
    if (!d.contains(schema.label_name())) throw SchemaError("record is missing the label column");
    r.seizure_free = d[py::str(schema.label_name())].cast<int>();
    validate(r);
    return r;
}

std::vector<PatientRecord> records_of(const py::iterable& items) {
    std::vector<PatientRecord> out;
    for (const auto& item : items) out.push_back(from_dict(item.cast<py::dict>()));
    return out;
}

py::list dicts_of(const std::vector<PatientRecord>& records) {
    py::list out;
    for (const auto& r : records) out.append(to_dict(r));
    return out;
}

template <class T, class Parse>
T parse_or_throw(const std::string& text, Parse parse, const char* what) {
    const auto v = parse(text);
    if (!v) throw ConfigError(std::string("unknown ") + what + " '" + text + "'");
    return *v;
}

py::tuple oversample_arrays(const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                            const py::array_t<int, py::array::c_style | py::array::forcecast>& y,
                            const std::string& method, std::uint64_t seed, std::size_t k_neighbors,
                            std::size_t m_neighbors, double beta) {
    if (x.ndim() != 2 || y.ndim() != 1 || x.shape(0) != y.shape(0)) {
        throw ShapeError("expected X of shape (n, p) and y of shape (n,)");
    }
    const auto n = static_cast<std::size_t>(x.shape(0));
    const auto p = static_cast<std::size_t>(x.shape(1));
    std::vector<std::vector<double>> rows(n, std::vector<double>(p));
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(x.data() + i * p, p, rows[i].begin());
        labels[i] = y.data()[i];
    }
    ResampleConfig cfg;
    cfg.method = parse_or_throw<ResampleMethod>(method, parse_resample_method, "resample method");
    cfg.seed = seed;
    cfg.k_neighbors = k_neighbors;
    cfg.m_neighbors = m_neighbors;
    cfg.adasyn_beta = beta;
    const auto r = oversample(EncodedMatrix::from_rows(rows, labels), cfg);

    const auto total = r.matrix.rows();
    py::array_t<double> xo({total, p});
    py::array_t<int> yo(total);
    auto xm = xo.mutable_unchecked<2>();
    auto ym = yo.mutable_unchecked<1>();
    for (std::size_t i = 0; i < total; ++i) {
        const auto row = r.matrix.row(i);
        for (std::size_t j = 0; j < p; ++j) xm(i, j) = row[j];
        ym(i) = r.matrix.labels()[i];
    }
    return py::make_tuple(xo, yo, r.synthetic_count);
}

py::dict run(const py::iterable& records, const std::vector<std::string>& models, const std::string& cv,
             std::size_t k, bool stratified, const std::optional<std::string>& resample,
             const std::optional<std::string>& leakage, std::uint64_t seed, std::size_t threads) {
    const auto dataset = records_of(records);
    ExperimentConfig cfg;
    cfg.models = named_models(models);
    cfg.cv = parse_or_throw<CvMode>(cv, parse_cv_mode, "cv mode");
    cfg.k = k;
    cfg.stratified = stratified;
    if (resample && *resample != "none") {
        ResampleConfig rc;
        rc.method = parse_or_throw<ResampleMethod>(*resample, parse_resample_method, "resample method");
        cfg.resample = rc;
    }
    if (leakage && !cfg.resample) throw ConfigError("leakage needs a resample method");
    if (leakage) cfg.leakage = parse_or_throw<LeakageMode>(*leakage, parse_leakage_mode, "leakage mode");
    cfg.seed = seed;
    cfg.threads = threads;

    const auto report = run_experiment(dataset, FeatureSchema::clinical(), cfg);
    py::list results;
    for (const auto& m : report.models) {
        py::dict d;
        d["id"] = m.id;
        d["accuracy"] = m.metrics.accuracy;
        d["precision"] = py::make_tuple(m.metrics.precision[0], m.metrics.precision[1]);
        d["recall"] = py::make_tuple(m.metrics.recall[0], m.metrics.recall[1]);
        d["f1"] = py::make_tuple(m.metrics.f1[0], m.metrics.f1[1]);
        d["confusion"] = py::make_tuple(py::make_tuple(m.pooled.counts[0][0], m.pooled.counts[0][1]),
                                        py::make_tuple(m.pooled.counts[1][0], m.pooled.counts[1][1]));
        d["converged"] = m.converged;
        d["skipped_folds"] = m.skipped_folds;
        d["fold_accuracies"] = m.fold_accuracies;
        if (m.summary) {
            py::dict s;
            s["mean"] = m.summary->mean;
            s["std"] = m.summary->std;
            s["best"] = m.summary->best;
            s["worst"] = m.summary->worst;
            d["summary"] = s;
        } else {
            d["summary"] = py::none();
        }
        results.append(d);
    }
    const auto table = make_report(report);
    std::ostringstream csv, md;
    write_report_csv(csv, table);
    write_report_markdown(md, table);
    py::dict out;
    out["models"] = results;
    out["csv"] = csv.str();
    out["markdown"] = md.str();
    return out;
}

py::list subset_search(const py::iterable& records, const std::string& model, std::size_t max_size,
                       const std::string& strategy, const std::string& cv, std::size_t k, std::uint64_t seed,
                       std::size_t threads) {
    const auto dataset = records_of(records);
    SubsetSearchConfig cfg;
    cfg.model = named_models(std::vector<std::string>{model}).at(0);
    cfg.max_size = max_size;
    cfg.strategy = parse_or_throw<SearchStrategy>(strategy, parse_search_strategy, "search strategy");
    cfg.cv = parse_or_throw<CvMode>(cv, parse_cv_mode, "cv mode");
    cfg.k = k;
    cfg.seed = seed;
    cfg.threads = threads;
    py::list out;
    for (const auto& s : feature_subset_search(dataset, FeatureSchema::clinical(), cfg)) {
        py::list names;
        for (Feature f : s.features) names.append(std::string(feature_name(f)));
        out.append(py::make_tuple(names, s.accuracy, s.step));
    }
    return out;
}

py::tuple cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_outcome_forge, m) {
    m.doc() = "Surgical outcome prediction on tabular epilepsy cohorts";

    static py::exception<Error> error(m, "Error", PyExc_ValueError);
    static py::exception<InfeasibleError> infeasible(m, "InfeasibleError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InfeasibleError& e) {
            py::set_error(infeasible, e.what());
        } catch (const ImbalanceError& e) {
            py::set_error(infeasible, e.what());
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def("model_ids", [] {
        std::vector<std::string> ids;
        for (auto id : model_ids()) ids.emplace_back(id);
        return ids;
    });
    m.def("columns", [] { return FeatureSchema::clinical().header(); });
    m.def(
        "synthesize",
        [](std::size_t n, std::uint64_t seed, bool association) {
            auto spec = CohortSpec::published();
            if (!association) spec.association.reset();
            return dicts_of(synthesize_cohort(spec, n, seed));
        },
        py::arg("n"), py::arg("seed"), py::arg("association") = true);
    m.def(
        "read_csv", [](const std::string& path) { return dicts_of(load_csv(path)); }, py::arg("path"));
    m.def(
        "write_csv", [](const std::string& path, const py::iterable& records) { save_csv(path, records_of(records)); },
        py::arg("path"), py::arg("records"));
    m.def("oversample", &oversample_arrays, py::arg("X"), py::arg("y"), py::arg("method") = "smote",
          py::arg("seed") = 0, py::arg("k_neighbors") = 5, py::arg("m_neighbors") = 10, py::arg("beta") = 1.0);
    m.def("run", &run, py::arg("records"), py::arg("models") = std::vector<std::string>{"all"},
          py::arg("cv") = "loocv", py::arg("k") = 8, py::arg("stratified") = false, py::arg("resample") = py::none(),
          py::arg("leakage") = py::none(), py::arg("seed") = 0, py::arg("threads") = 0);
    m.def("subset_search", &subset_search, py::arg("records"), py::arg("model") = "knn", py::arg("max_size") = 3,
          py::arg("strategy") = "exhaustive", py::arg("cv") = "loocv", py::arg("k") = 8, py::arg("seed") = 0,
          py::arg("threads") = 0);
    m.def("cli", &cli, py::arg("args"));
}

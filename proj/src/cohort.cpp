#include "outcome_forge/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "outcome_forge/errors.hpp"
#include "outcome_forge/random.hpp"

namespace outcome_forge {

namespace {

const std::vector<std::string> kYesNo = {"No", "Yes"};

std::vector<ColumnDescriptor> clinical_columns() {
    auto binary = [](Feature f) { return ColumnDescriptor{f, std::string(feature_name(f)), FeatureKind::binary, kYesNo}; };
    auto numeric = [](Feature f) { return ColumnDescriptor{f, std::string(feature_name(f)), FeatureKind::numeric, {}}; };
    auto nominal = [](Feature f, std::vector<std::string> values) {
        return ColumnDescriptor{f, std::string(feature_name(f)), FeatureKind::nominal, std::move(values)};
    };
    return {
        binary(Feature::febrile_seizure),
        binary(Feature::family_history),
        binary(Feature::head_trauma),
        nominal(Feature::seizure_frequency, {"Daily", "Weekly", "Monthly", "Yearly", "Seasonal"}),
        binary(Feature::focal_to_bilateral),
        binary(Feature::aura),
        nominal(Feature::lesion_location, {"Temporal", "Extra-Temporal"}),
        binary(Feature::ecog),
        nominal(Feature::mri_findings, {"Mesial temporal sclerosis", "Focal cortical dysplasia", "Gliosis", "Tumor",
                                        "Cavernous Angioma"}),
        numeric(Feature::age_surgery),
        numeric(Feature::age_onset),
        numeric(Feature::duration),
    };
}

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "febrile_seizure", "family_history", "head_trauma", "seizure_frequency", "focal_to_bilateral", "aura",
    "lesion_location", "ecog",           "mri_findings", "age_surgery",      "age_onset",          "duration",
};

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return value;
}

std::string format_double(double value) {
    std::array<char, 32> buffer{};
    auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), ptr);
}

bool is_schema_encoded(const ColumnOrigin& o) { return o.feature.has_value(); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct Moments {
    double mean;
    double std;
};

Moments truncated_moments(double mu, double sigma, double lo, double hi) {
    const double a = (lo - mu) / sigma;
    const double b = (hi - mu) / sigma;
    const double z = std::max(normal_cdf(b) - normal_cdf(a), 1e-300);
    const double pa = normal_pdf(a);
    const double pb = normal_pdf(b);
    const double shift = (pa - pb) / z;
    const double var = 1.0 + (a * pa - b * pb) / z - shift * shift;
    return {mu + sigma * shift, sigma * std::sqrt(std::max(var, 1e-12))};
}

// Latent normal parameters whose truncation to [min, max] has the requested mean and std.
std::pair<double, double> latent_normal(const NumericMarginal& m) {
    double mu = m.mean;
    double sigma = m.std;
    for (int it = 0; it < 500; ++it) {
        const Moments got = truncated_moments(mu, sigma, m.min, m.max);
        const double dm = m.mean - got.mean;
        const double ratio = m.std / got.std;
        mu += dm;
        sigma *= ratio;
        if (std::abs(dm) < 1e-10 && std::abs(ratio - 1.0) < 1e-10) break;
    }
    return {mu, sigma};
}

// Mean of the onset draw after it is conditioned on not exceeding the surgery age.
double conditioned_onset_mean(double mu, double sigma, const NumericMarginal& onset, double s_mu, double s_sigma,
                              const NumericMarginal& surgery) {
    constexpr int kSteps = 2000;
    const double h = (surgery.max - surgery.min) / kSteps;
    double mass = 0.0;
    double total = 0.0;
    for (int i = 0; i <= kSteps; ++i) {
        const double s = surgery.min + h * i;
        const double w = normal_pdf((s - s_mu) / s_sigma) * ((i == 0 || i == kSteps) ? 0.5 : 1.0);
        const double hi = std::min(onset.max, s);
        const double value = hi <= onset.min ? hi : truncated_moments(mu, sigma, onset.min, hi).mean;
        mass += w;
        total += w * value;
    }
    return total / mass;
}

std::pair<double, double> latent_onset(const NumericMarginal& onset, std::pair<double, double> onset_latent,
                                       const NumericMarginal& surgery, std::pair<double, double> surgery_latent) {
    auto [mu, sigma] = onset_latent;
    for (int it = 0; it < 200; ++it) {
        const double got =
            conditioned_onset_mean(mu, sigma, onset, surgery_latent.first, surgery_latent.second, surgery);
        const double dm = onset.mean - got;
        mu += dm;
        if (std::abs(dm) < 1e-9) break;
    }
    return {mu, sigma};
}

double draw_truncated(Rng& rng, double mu, double sigma, double lo, double hi) {
    std::normal_distribution<double> normal(mu, sigma);
    constexpr int kMaxAttempts = 1000;
    double x = mu;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        x = normal(rng);
        if (x >= lo && x <= hi) return x;
    }
    return std::clamp(x, lo, hi);
}

int draw_category(Rng& rng, std::span<const double> probabilities) {
    const double u = uniform01(rng);
    double cumulative = 0.0;
    for (std::size_t c = 0; c < probabilities.size(); ++c) {
        cumulative += probabilities[c];
        if (u < cumulative) return static_cast<int>(c);
    }
    return static_cast<int>(probabilities.size()) - 1;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double association_input(const PatientRecord& r, Feature f) {
    const auto& column = FeatureSchema::clinical().column(f);
    if (column.kind == FeatureKind::numeric) return numeric_value(r, f);
    return static_cast<double>(category_code(r, f));
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view feature_name(Feature f) { return kFeatureNames.at(index_of(f)); }

std::optional<Feature> parse_feature(std::string_view name) {
    for (Feature f : kAllFeatures) {
        if (feature_name(f) == name) return f;
    }
    return std::nullopt;
}

int category_code(const PatientRecord& r, Feature f) {
    switch (f) {
        case Feature::febrile_seizure: return r.febrile_seizure ? 1 : 0;
        case Feature::family_history: return r.family_history ? 1 : 0;
        case Feature::head_trauma: return r.head_trauma ? 1 : 0;
        case Feature::seizure_frequency: return static_cast<int>(r.seizure_frequency);
        case Feature::focal_to_bilateral: return r.focal_to_bilateral ? 1 : 0;
        case Feature::aura: return r.aura ? 1 : 0;
        case Feature::lesion_location: return static_cast<int>(r.lesion_location);
        case Feature::ecog: return r.ecog ? 1 : 0;
        case Feature::mri_findings: return static_cast<int>(r.mri_findings);
        default: throw SchemaError("feature '" + std::string(feature_name(f)) + "' is not categorical");
    }
}

void set_category_code(PatientRecord& r, Feature f, int code) {
    switch (f) {
        case Feature::febrile_seizure: r.febrile_seizure = code != 0; break;
        case Feature::family_history: r.family_history = code != 0; break;
        case Feature::head_trauma: r.head_trauma = code != 0; break;
        case Feature::seizure_frequency: r.seizure_frequency = static_cast<SeizureFrequency>(code); break;
        case Feature::focal_to_bilateral: r.focal_to_bilateral = code != 0; break;
        case Feature::aura: r.aura = code != 0; break;
        case Feature::lesion_location: r.lesion_location = static_cast<LesionLocation>(code); break;
        case Feature::ecog: r.ecog = code != 0; break;
        case Feature::mri_findings: r.mri_findings = static_cast<MriFinding>(code); break;
        default: throw SchemaError("feature '" + std::string(feature_name(f)) + "' is not categorical");
    }
}

double numeric_value(const PatientRecord& r, Feature f) {
    switch (f) {
        case Feature::age_surgery: return r.age_surgery;
        case Feature::age_onset: return r.age_onset;
        case Feature::duration: return r.duration;
        default: throw SchemaError("feature '" + std::string(feature_name(f)) + "' is not numeric");
    }
}

void set_numeric_value(PatientRecord& r, Feature f, double value) {
    switch (f) {
        case Feature::age_surgery: r.age_surgery = value; break;
        case Feature::age_onset: r.age_onset = value; break;
        case Feature::duration: r.duration = value; break;
        default: throw SchemaError("feature '" + std::string(feature_name(f)) + "' is not numeric");
    }
}

void validate(const PatientRecord& r) {
    const auto& schema = FeatureSchema::clinical();
    for (const auto& column : schema.columns()) {
        if (column.kind == FeatureKind::numeric) {
            const double v = numeric_value(r, column.feature);
            if (!std::isfinite(v) || v < 0.0) throw DataError(column.name + " must be finite and non-negative");
        } else {
            const int code = category_code(r, column.feature);
            if (code < 0 || code >= static_cast<int>(column.values.size())) {
                throw DataError(column.name + " has an out-of-range category code");
            }
        }
    }
    if (r.age_onset > r.age_surgery) throw DataError("age_onset exceeds age_surgery");
    if (r.seizure_free != 0 && r.seizure_free != 1) throw DataError("seizure_free must be 0 or 1");
}

// ---------------------------------------------------------------------------

const FeatureSchema& FeatureSchema::clinical() {
    static const FeatureSchema schema(clinical_columns(), "seizure_free");
    return schema;
}

FeatureSchema::FeatureSchema(std::vector<ColumnDescriptor> columns, std::string label_name)
    : columns_(std::move(columns)), label_name_(std::move(label_name)) {
    if (columns_.size() != kFeatureCount) {
        throw SchemaError("schema must have exactly " + std::to_string(kFeatureCount) + " feature columns");
    }
    for (const auto& column : columns_) {
        if (column.kind == FeatureKind::numeric) continue;
        if (column.values.empty()) throw SchemaError("column '" + column.name + "' has an empty value set");
        std::vector<std::string> sorted = column.values;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw SchemaError("column '" + column.name + "' has duplicate values");
        }
        if (column.kind == FeatureKind::binary && column.values.size() != 2) {
            throw SchemaError("binary column '" + column.name + "' needs exactly two values");
        }
    }
}

const ColumnDescriptor& FeatureSchema::column(Feature f) const {
    for (const auto& column : columns_) {
        if (column.feature == f) return column;
    }
    throw SchemaError("feature '" + std::string(feature_name(f)) + "' is not in the schema");
}

std::vector<std::string> FeatureSchema::header() const {
    std::vector<std::string> names;
    for (const auto& column : columns_) names.push_back(column.name);
    names.push_back(label_name_);
    return names;
}

std::optional<Feature> FeatureSchema::find(std::string_view name) const {
    for (const auto& column : columns_) {
        if (column.name == name) return column.feature;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

std::vector<PatientRecord> read_csv(std::istream& in, const FeatureSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("missing header row");

    const auto expected = schema.header();
    std::vector<std::string> got;
    for (auto field : split_line(line)) got.emplace_back(trim(field));
    if (!got.empty() && got.front().starts_with("\xEF\xBB\xBF")) got.front().erase(0, 3);

    for (const auto& name : expected) {
        if (std::find(got.begin(), got.end(), name) == got.end()) throw SchemaError("missing column '" + name + "'");
    }
    for (const auto& name : got) {
        if (std::find(expected.begin(), expected.end(), name) == expected.end()) {
            throw SchemaError("unexpected column '" + name + "'");
        }
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (got.size() != expected.size() || got[i] != expected[i]) {
            throw SchemaError("column '" + expected[i] + "' is out of canonical order");
        }
    }

    std::vector<PatientRecord> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = split_line(line);
        if (fields.size() != expected.size()) {
            throw ParseError(row, "expected " + std::to_string(expected.size()) + " fields, found " +
                                      std::to_string(fields.size()));
        }
        PatientRecord r;
        const auto columns = schema.columns();
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto& column = columns[c];
            const std::string_view value = trim(fields[c]);
            if (column.kind == FeatureKind::numeric) {
                const auto parsed = parse_double(value);
                if (!parsed || !std::isfinite(*parsed)) {
                    throw ParseError(row, "column '" + column.name + "': '" + std::string(value) + "' is not a number");
                }
                set_numeric_value(r, column.feature, *parsed);
            } else {
                const auto it = std::find(column.values.begin(), column.values.end(), value);
                if (it == column.values.end()) {
                    throw ParseError(row, "column '" + column.name + "': unknown value '" + std::string(value) + "'");
                }
                set_category_code(r, column.feature, static_cast<int>(it - column.values.begin()));
            }
        }
        const std::string_view label = trim(fields.back());
        if (label == "1") {
            r.seizure_free = 1;
        } else if (label == "0") {
            r.seizure_free = 0;
        } else {
            throw ParseError(row, "label must be 0 or 1, got '" + std::string(label) + "'");
        }
        try {
            validate(r);
        } catch (const DataError& e) {
            throw ParseError(row, e.what());
        }
        records.push_back(r);
    }
    return records;
}

std::vector<PatientRecord> load_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return read_csv(in, schema);
}

void write_csv(std::ostream& out, std::span<const PatientRecord> records, const FeatureSchema& schema) {
    const auto header = schema.header();
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : records) {
        for (const auto& column : schema.columns()) {
            if (column.kind == FeatureKind::numeric) {
                out << format_double(numeric_value(r, column.feature));
            } else {
                out << column.values.at(static_cast<std::size_t>(category_code(r, column.feature)));
            }
            out << ',';
        }
        out << r.seizure_free << '\n';
    }
}

void save_csv(const std::filesystem::path& path, std::span<const PatientRecord> records, const FeatureSchema& schema) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_csv(out, records, schema);
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::map<Label, std::size_t> class_counts(std::span<const PatientRecord> records) {
    std::map<Label, std::size_t> counts;
    for (const auto& r : records) ++counts[r.seizure_free];
    return counts;
}

// ---------------------------------------------------------------------------

EncodedMatrix::EncodedMatrix(std::size_t rows, std::vector<double> values, std::vector<ColumnOrigin> origins,
                             std::vector<Label> labels)
    : rows_(rows),
      values_(std::move(values)),
      origins_(std::move(origins)),
      labels_(std::move(labels)),
      centers_(origins_.size(), 0.0),
      scales_(origins_.size(), 1.0) {
    if (values_.size() != rows_ * origins_.size()) throw ShapeError("value count does not match rows x cols");
    if (labels_.size() != rows_) throw ShapeError("label count does not match row count");
}

EncodedMatrix EncodedMatrix::from_rows(const std::vector<std::vector<double>>& rows, std::vector<Label> labels) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * cols);
    for (const auto& row : rows) {
        if (row.size() != cols) throw ShapeError("ragged rows");
        values.insert(values.end(), row.begin(), row.end());
    }
    return EncodedMatrix(rows.size(), std::move(values), std::vector<ColumnOrigin>(cols), std::move(labels));
}

EncodedMatrix EncodedMatrix::select_rows(std::span<const std::size_t> indices) const {
    EncodedMatrix out = *this;
    out.rows_ = indices.size();
    out.values_.resize(indices.size() * cols());
    out.labels_.resize(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto src = row(indices[r]);
        std::copy(src.begin(), src.end(), out.values_.begin() + static_cast<std::ptrdiff_t>(r * cols()));
        out.labels_[r] = labels_[indices[r]];
    }
    return out;
}

EncodedMatrix EncodedMatrix::select_features(std::span<const Feature> features) const {
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < cols(); ++j) {
        const auto& f = origins_[j].feature;
        if (f && std::find(features.begin(), features.end(), *f) != features.end()) keep.push_back(j);
    }
    EncodedMatrix out;
    out.rows_ = rows_;
    out.labels_ = labels_;
    out.values_.reserve(rows_ * keep.size());
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j : keep) out.values_.push_back(at(i, j));
    }
    for (std::size_t j : keep) {
        out.origins_.push_back(origins_[j]);
        out.centers_.push_back(centers_[j]);
        out.scales_.push_back(scales_[j]);
    }
    return out;
}

EncodedMatrix EncodedMatrix::with_appended(std::span<const double> extra_values,
                                           std::span<const Label> extra_labels) const {
    if (extra_values.size() != extra_labels.size() * cols()) throw ShapeError("appended block has the wrong width");
    EncodedMatrix out = *this;
    out.rows_ += extra_labels.size();
    out.values_.insert(out.values_.end(), extra_values.begin(), extra_values.end());
    out.labels_.insert(out.labels_.end(), extra_labels.begin(), extra_labels.end());
    return out;
}

EncodedMatrix EncodedMatrix::standardized(std::span<const std::size_t> fit_rows) const {
    if (fit_rows.empty()) throw DataError("standardizer needs at least one fit row");
    for (std::size_t i : fit_rows) {
        if (i >= rows_) throw DataError("standardizer fit row out of range");
    }
    EncodedMatrix out = *this;
    const double count = static_cast<double>(fit_rows.size());
    for (std::size_t j = 0; j < cols(); ++j) {
        if (origins_[j].role != ColumnRole::numeric) continue;
        double mean = 0.0;
        for (std::size_t i : fit_rows) mean += at(i, j);
        mean /= count;
        double var = 0.0;
        for (std::size_t i : fit_rows) {
            const double d = at(i, j) - mean;
            var += d * d;
        }
        double sd = std::sqrt(var / count);
        if (!(sd > 0.0)) sd = 1.0;
        for (std::size_t i = 0; i < rows_; ++i) out.values_[i * cols() + j] = (at(i, j) - mean) / sd;
        out.centers_[j] = centers_[j] + scales_[j] * mean;
        out.scales_[j] = scales_[j] * sd;
    }
    return out;
}

EncodedMatrix encode_raw(std::span<const PatientRecord> records, const FeatureSchema& schema) {
    std::vector<ColumnOrigin> origins;
    for (const auto& column : schema.columns()) {
        switch (column.kind) {
            case FeatureKind::binary: origins.push_back({column.feature, ColumnRole::binary, -1}); break;
            case FeatureKind::numeric: origins.push_back({column.feature, ColumnRole::numeric, -1}); break;
            case FeatureKind::nominal:
                for (std::size_t c = 0; c < column.values.size(); ++c) {
                    origins.push_back({column.feature, ColumnRole::one_hot, static_cast<int>(c)});
                }
                break;
        }
    }
    std::vector<double> values;
    values.reserve(records.size() * origins.size());
    std::vector<Label> labels;
    labels.reserve(records.size());
    for (const auto& r : records) {
        for (const auto& o : origins) {
            switch (o.role) {
                case ColumnRole::binary: values.push_back(category_code(r, *o.feature) ? 1.0 : 0.0); break;
                case ColumnRole::one_hot: values.push_back(category_code(r, *o.feature) == o.category ? 1.0 : 0.0); break;
                case ColumnRole::numeric: values.push_back(numeric_value(r, *o.feature)); break;
            }
        }
        labels.push_back(r.seizure_free);
    }
    return EncodedMatrix(records.size(), std::move(values), std::move(origins), std::move(labels));
}

EncodedMatrix encode(std::span<const PatientRecord> records, const FeatureSchema& schema,
                     std::span<const std::size_t> standardizer_fit_rows) {
    return encode_raw(records, schema).standardized(standardizer_fit_rows);
}

int decode_category(const EncodedMatrix& m, std::size_t i, Feature f) {
    int best = -1;
    double best_value = 0.0;
    const auto origins = m.origins();
    for (std::size_t j = 0; j < origins.size(); ++j) {
        if (origins[j].feature != f) continue;
        if (origins[j].role == ColumnRole::binary) return m.at(i, j) >= 0.5 ? 1 : 0;
        if (origins[j].role == ColumnRole::one_hot && (best < 0 || m.at(i, j) > best_value)) {
            best = origins[j].category;
            best_value = m.at(i, j);
        }
    }
    if (best < 0) throw SchemaError("feature '" + std::string(feature_name(f)) + "' is not encoded as a category");
    return best;
}

std::vector<PatientRecord> decode(const EncodedMatrix& m) {
    std::vector<PatientRecord> records(m.rows());
    const auto origins = m.origins();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        PatientRecord& r = records[i];
        for (std::size_t j = 0; j < origins.size(); ++j) {
            const auto& o = origins[j];
            if (!is_schema_encoded(o)) continue;
            if (o.role == ColumnRole::numeric) {
                set_numeric_value(r, *o.feature, m.at(i, j) * m.scales()[j] + m.centers()[j]);
            } else if (o.role == ColumnRole::binary || o.category == 0) {
                set_category_code(r, *o.feature, decode_category(m, i, *o.feature));
            }
        }
        r.seizure_free = m.labels()[i];
    }
    return records;
}

// ---------------------------------------------------------------------------

LabelAssociation LabelAssociation::clinical_default() {
    return {{{Feature::aura, 1.0}, {Feature::focal_to_bilateral, -1.0}, {Feature::duration, -0.05}}};
}

CohortSpec CohortSpec::published() {
    CohortSpec spec;
    spec.categorical = {
        {Feature::febrile_seizure, {128.0 / 176, 48.0 / 176}},
        {Feature::family_history, {143.0 / 176, 33.0 / 176}},
        {Feature::head_trauma, {135.0 / 176, 41.0 / 176}},
        {Feature::seizure_frequency, {56.0 / 176, 79.0 / 176, 29.0 / 176, 8.0 / 176, 4.0 / 176}},
        {Feature::focal_to_bilateral, {109.0 / 176, 67.0 / 176}},
        {Feature::aura, {64.0 / 176, 112.0 / 176}},
        {Feature::lesion_location, {140.0 / 176, 36.0 / 176}},
        {Feature::ecog, {154.0 / 176, 22.0 / 176}},
        {Feature::mri_findings, {100.0 / 176, 19.0 / 176, 29.0 / 176, 22.0 / 176, 6.0 / 176}},
    };
    spec.numeric = {
        {Feature::age_surgery, 30.54545455, 9.219122, 16.0, 56.0},
        {Feature::age_onset, 13.80208333, 8.605432, 0.5, 45.0},
        {Feature::duration, 16.65625, 9.773712, 0.0, 51.0},
    };
    spec.label_probability = 128.0 / 176;
    spec.association = LabelAssociation::clinical_default();
    return spec;
}

void CohortSpec::validate() const {
    const auto& schema = FeatureSchema::clinical();
    for (const auto& marginal : categorical) {
        const auto& column = schema.column(marginal.feature);
        if (column.kind == FeatureKind::numeric) throw ConfigError(column.name + " is not categorical");
        if (marginal.probabilities.size() != column.values.size()) {
            throw ConfigError(column.name + ": probability count does not match the value set");
        }
        double sum = 0.0;
        for (double p : marginal.probabilities) {
            if (p < 0.0) throw ConfigError(column.name + ": negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError(column.name + ": probabilities do not sum to 1");
    }
    for (const auto& m : numeric) {
        if (schema.column(m.feature).kind != FeatureKind::numeric) {
            throw ConfigError(std::string(feature_name(m.feature)) + " is not numeric");
        }
        if (!(m.min <= m.mean && m.mean <= m.max)) throw ConfigError("numeric marginal needs min <= mean <= max");
        if (!(m.std > 0.0)) throw ConfigError("numeric marginal needs std > 0");
    }
    if (!(label_probability >= 0.0 && label_probability <= 1.0)) throw ConfigError("label probability outside [0,1]");
    if (association && association->weights.size() > 3) throw ConfigError("label association takes at most 3 features");
}

std::vector<PatientRecord> synthesize_cohort(const CohortSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw ConfigError("cohort size must be at least 1");

    std::vector<std::pair<double, double>> latent;
    for (const auto& m : spec.numeric) latent.push_back(latent_normal(m));

    const auto age_surgery_it = std::find_if(spec.numeric.begin(), spec.numeric.end(),
                                             [](const NumericMarginal& m) { return m.feature == Feature::age_surgery; });
    if (age_surgery_it != spec.numeric.end()) {
        const auto s = static_cast<std::size_t>(age_surgery_it - spec.numeric.begin());
        for (std::size_t k = 0; k < spec.numeric.size(); ++k) {
            if (spec.numeric[k].feature == Feature::age_onset) {
                latent[k] = latent_onset(spec.numeric[k], latent[k], *age_surgery_it, latent[s]);
            }
        }
    }

    Rng rng(seed);
    std::vector<PatientRecord> records(n);
    for (auto& r : records) {
        for (const auto& marginal : spec.categorical) {
            set_category_code(r, marginal.feature, draw_category(rng, marginal.probabilities));
        }
        for (std::size_t k = 0; k < spec.numeric.size(); ++k) {
            const auto& m = spec.numeric[k];
            const auto [mu, sigma] = latent[k];
            double value = draw_truncated(rng, mu, sigma, m.min, m.max);
            if (m.feature == Feature::age_onset && age_surgery_it != spec.numeric.end()) {
                for (int attempt = 0; attempt < 1000 && value > r.age_surgery; ++attempt) {
                    value = draw_truncated(rng, mu, sigma, m.min, m.max);
                }
                value = std::min(value, r.age_surgery);
            }
            set_numeric_value(r, m.feature, value);
        }
    }

    if (!spec.association || spec.association->weights.empty()) {
        for (auto& r : records) r.seizure_free = uniform01(rng) < spec.label_probability ? 1 : 0;
        return records;
    }

    std::vector<double> link(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [feature, weight] : spec.association->weights) {
            link[i] += weight * association_input(records[i], feature);
        }
    }
    // Intercept such that the mean success probability equals the label prior.
    auto mean_probability = [&](double intercept) {
        double total = 0.0;
        for (double z : link) total += sigmoid(intercept + z);
        return total / static_cast<double>(n);
    };
    double lo = -60.0;
    double hi = 60.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_probability(mid) < spec.label_probability ? lo : hi) = mid;
    }
    const double intercept = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < n; ++i) {
        records[i].seizure_free = uniform01(rng) < sigmoid(intercept + link[i]) ? 1 : 0;
    }
    return records;
}

}  // namespace outcome_forge

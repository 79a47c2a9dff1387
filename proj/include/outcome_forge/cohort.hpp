#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace outcome_forge {

// ---------------------------------------------------------------------------
// Clinical data model
// ---------------------------------------------------------------------------

enum class Feature : std::uint8_t {
    febrile_seizure,
    family_history,
    head_trauma,
    seizure_frequency,
    focal_to_bilateral,
    aura,
    lesion_location,
    ecog,
    mri_findings,
    age_surgery,
    age_onset,
    duration,
};

inline constexpr std::size_t kFeatureCount = 12;

inline constexpr std::array<Feature, kFeatureCount> kAllFeatures = {
    Feature::febrile_seizure, Feature::family_history,     Feature::head_trauma,
    Feature::seizure_frequency, Feature::focal_to_bilateral, Feature::aura,
    Feature::lesion_location, Feature::ecog,               Feature::mri_findings,
    Feature::age_surgery,     Feature::age_onset,          Feature::duration,
};

constexpr std::size_t index_of(Feature f) noexcept { return static_cast<std::size_t>(f); }

enum class SeizureFrequency : std::uint8_t { daily, weekly, monthly, yearly, seasonal };
enum class LesionLocation : std::uint8_t { temporal, extra_temporal };
enum class MriFinding : std::uint8_t {
    mesial_temporal_sclerosis,
    focal_cortical_dysplasia,
    gliosis,
    tumor,
    cavernous_angioma,
};

/// Binary outcome: 1 = seizure free (Engel class I), 0 = unsuccessful.
using Label = int;

struct PatientRecord {
    bool febrile_seizure = false;
    bool family_history = false;
    bool head_trauma = false;
    SeizureFrequency seizure_frequency = SeizureFrequency::daily;
    bool focal_to_bilateral = false;
    bool aura = false;
    LesionLocation lesion_location = LesionLocation::temporal;
    bool ecog = false;
    MriFinding mri_findings = MriFinding::mesial_temporal_sclerosis;
    double age_surgery = 0.0;
    double age_onset = 0.0;
    double duration = 0.0;
    Label seizure_free = 0;

    friend bool operator==(const PatientRecord&, const PatientRecord&) = default;
};

/// Category code of a binary (0 = No, 1 = Yes) or nominal feature. Undefined for numerics.
int category_code(const PatientRecord& r, Feature f);
void set_category_code(PatientRecord& r, Feature f, int code);
double numeric_value(const PatientRecord& r, Feature f);
void set_numeric_value(PatientRecord& r, Feature f, double value);

/// Throws DataError when a record violates the age or value-set invariants.
void validate(const PatientRecord& r);

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

enum class FeatureKind : std::uint8_t { binary, nominal, numeric };

struct ColumnDescriptor {
    Feature feature;
    std::string name;
    FeatureKind kind;
    std::vector<std::string> values;  // category labels in code order; empty for numerics
};

class FeatureSchema {
public:
    /// The 12-feature clinical schema in canonical CSV order.
    static const FeatureSchema& clinical();

    explicit FeatureSchema(std::vector<ColumnDescriptor> columns, std::string label_name);

    std::span<const ColumnDescriptor> columns() const noexcept { return columns_; }
    const ColumnDescriptor& column(Feature f) const;
    const std::string& label_name() const noexcept { return label_name_; }

    /// Canonical header names: the feature columns followed by the label.
    std::vector<std::string> header() const;

    std::optional<Feature> find(std::string_view name) const;

private:
    std::vector<ColumnDescriptor> columns_;
    std::string label_name_;
};

std::string_view feature_name(Feature f);
std::optional<Feature> parse_feature(std::string_view name);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::vector<PatientRecord> read_csv(std::istream& in, const FeatureSchema& schema = FeatureSchema::clinical());
std::vector<PatientRecord> load_csv(const std::filesystem::path& path,
                                    const FeatureSchema& schema = FeatureSchema::clinical());

void write_csv(std::ostream& out, std::span<const PatientRecord> records,
               const FeatureSchema& schema = FeatureSchema::clinical());
void save_csv(const std::filesystem::path& path, std::span<const PatientRecord> records,
              const FeatureSchema& schema = FeatureSchema::clinical());

std::map<Label, std::size_t> class_counts(std::span<const PatientRecord> records);

// ---------------------------------------------------------------------------
// Encoded design matrix
// ---------------------------------------------------------------------------

enum class ColumnRole : std::uint8_t { binary, one_hot, numeric };

/// Where an encoded column came from. `feature` is empty for raw matrices built
/// directly from numbers (those columns are treated as numeric).
struct ColumnOrigin {
    std::optional<Feature> feature;
    ColumnRole role = ColumnRole::numeric;
    int category = -1;  // one-hot category code; -1 otherwise

    friend bool operator==(const ColumnOrigin&, const ColumnOrigin&) = default;
};

/// Row-major real matrix with column provenance, per-column scaling and labels.
class EncodedMatrix {
public:
    EncodedMatrix() = default;
    EncodedMatrix(std::size_t rows, std::vector<double> values, std::vector<ColumnOrigin> origins,
                  std::vector<Label> labels);

    /// Raw numeric matrix: every column is numeric and unscaled.
    static EncodedMatrix from_rows(const std::vector<std::vector<double>>& rows, std::vector<Label> labels);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return origins_.size(); }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols(), cols()}; }
    double at(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<const ColumnOrigin> origins() const noexcept { return origins_; }
    std::span<const Label> labels() const noexcept { return labels_; }

    /// Per-column affine scaling applied to numeric columns: encoded = (raw - center) / scale.
    std::span<const double> centers() const noexcept { return centers_; }
    std::span<const double> scales() const noexcept { return scales_; }

    EncodedMatrix select_rows(std::span<const std::size_t> indices) const;
    /// Keeps only the columns that derive from `features` (raw columns are dropped).
    EncodedMatrix select_features(std::span<const Feature> features) const;
    /// Appends rows (values row-major) with labels; scaling metadata is kept.
    EncodedMatrix with_appended(std::span<const double> extra_values, std::span<const Label> extra_labels) const;

    /// z-scores numeric columns with statistics from `fit_rows` (population std; 0 falls back to 1).
    /// Binary and one-hot columns are left untouched. Scaling composes with any existing one.
    EncodedMatrix standardized(std::span<const std::size_t> fit_rows) const;

    friend bool operator==(const EncodedMatrix&, const EncodedMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::vector<double> values_;
    std::vector<ColumnOrigin> origins_;
    std::vector<Label> labels_;
    std::vector<double> centers_;
    std::vector<double> scales_;
};

/// Encodes without scaling: binaries to {0,1}, nominals one-hot in schema order, numerics raw.
EncodedMatrix encode_raw(std::span<const PatientRecord> records,
                         const FeatureSchema& schema = FeatureSchema::clinical());

/// encode_raw followed by standardization fitted on `standardizer_fit_rows`.
EncodedMatrix encode(std::span<const PatientRecord> records, const FeatureSchema& schema,
                     std::span<const std::size_t> standardizer_fit_rows);

/// Category code of `f` on row `i`: the arg-max of its one-hot group (lowest code on ties)
/// or the binary column thresholded at 0.5. Works on fractional (synthetic) rows.
int decode_category(const EncodedMatrix& m, std::size_t i, Feature f);

/// Inverts the encoding of a schema-derived matrix (numerics un-scaled).
std::vector<PatientRecord> decode(const EncodedMatrix& m);

// ---------------------------------------------------------------------------
// Synthetic cohorts
// ---------------------------------------------------------------------------

struct CategoricalMarginal {
    Feature feature;
    std::vector<double> probabilities;  // indexed by category code
};

struct NumericMarginal {
    Feature feature;
    double mean;
    double std;
    double min;
    double max;
};

/// Logistic link from up to three features to the label. Binary features enter as
/// 0/1, numerics in raw units. The intercept is calibrated per cohort so that the
/// mean link probability equals the label prior.
struct LabelAssociation {
    std::vector<std::pair<Feature, double>> weights;

    /// (aura, focal_to_bilateral, duration) = (+1.0, -1.0, -0.05 per year).
    static LabelAssociation clinical_default();
};

struct CohortSpec {
    std::vector<CategoricalMarginal> categorical;
    std::vector<NumericMarginal> numeric;
    double label_probability = 0.5;
    std::optional<LabelAssociation> association;

    /// Marginals of the published 176-patient surgical cohort, with the default association.
    static CohortSpec published();

    /// Throws ConfigError if a distribution does not sum to 1 or a numeric range is invalid.
    void validate() const;
};

std::vector<PatientRecord> synthesize_cohort(const CohortSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace outcome_forge

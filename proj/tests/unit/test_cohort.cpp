#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "outcome_forge/outcome_forge.hpp"

using namespace outcome_forge;

namespace {

const std::string kHeader =
    "febrile_seizure,family_history,head_trauma,seizure_frequency,focal_to_bilateral,aura,lesion_location,ecog,"
    "mri_findings,age_surgery,age_onset,duration,seizure_free";

PatientRecord sample_record() {
    PatientRecord r;
    r.febrile_seizure = true;
    r.seizure_frequency = SeizureFrequency::monthly;
    r.aura = true;
    r.lesion_location = LesionLocation::extra_temporal;
    r.mri_findings = MriFinding::tumor;
    r.age_surgery = 31.5;
    r.age_onset = 12.25;
    r.duration = 19.25;
    r.seizure_free = 1;
    return r;
}

std::size_t column_of(const EncodedMatrix& m, Feature f, int category = -1) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const auto& o = m.origins()[j];
        if (o.feature == f && (category < 0 || o.category == category)) return j;
    }
    FAIL("column not found");
    return 0;
}

}  // namespace

TEST_SUITE("schema") {
    TEST_CASE("clinical schema has twelve features in canonical order") {
        const auto& schema = FeatureSchema::clinical();
        REQUIRE(schema.columns().size() == 12);
        std::string joined;
        for (const auto& name : schema.header()) joined += (joined.empty() ? "" : ",") + name;
        CHECK(joined == kHeader);
        CHECK(schema.column(Feature::mri_findings).values ==
              std::vector<std::string>{"Mesial temporal sclerosis", "Focal cortical dysplasia", "Gliosis", "Tumor",
                                       "Cavernous Angioma"});
        CHECK(schema.column(Feature::seizure_frequency).values.size() == 5);
        CHECK(schema.column(Feature::lesion_location).values ==
              std::vector<std::string>{"Temporal", "Extra-Temporal"});
        CHECK(schema.column(Feature::aura).values == std::vector<std::string>{"No", "Yes"});
        std::size_t categorical = 0;
        for (const auto& c : schema.columns()) categorical += c.kind != FeatureKind::numeric;
        CHECK(categorical == 9);
    }

    TEST_CASE("feature names round trip") {
        for (Feature f : kAllFeatures) CHECK(parse_feature(feature_name(f)) == f);
        CHECK_FALSE(parse_feature("cyst").has_value());
    }

    TEST_CASE("duplicate or empty value sets are rejected") {
        auto cols = std::vector<ColumnDescriptor>(FeatureSchema::clinical().columns().begin(),
                                                  FeatureSchema::clinical().columns().end());
        auto dup = cols;
        dup[index_of(Feature::mri_findings)].values.push_back("Tumor");
        CHECK_THROWS_AS(FeatureSchema(dup, "seizure_free"), SchemaError);
        auto empty = cols;
        empty[index_of(Feature::seizure_frequency)].values.clear();
        CHECK_THROWS_AS(FeatureSchema(empty, "seizure_free"), SchemaError);
        cols.pop_back();
        CHECK_THROWS_AS(FeatureSchema(cols, "seizure_free"), SchemaError);
    }

    TEST_CASE("record validation") {
        PatientRecord r = sample_record();
        CHECK_NOTHROW(validate(r));
        r.age_onset = 40.0;
        CHECK_THROWS_AS(validate(r), DataError);
        r = sample_record();
        r.duration = -1.0;
        CHECK_THROWS_AS(validate(r), DataError);
    }
}

TEST_SUITE("csv") {
    TEST_CASE("header-only file yields no records") {
        std::istringstream in(kHeader + "\n");
        CHECK(read_csv(in).empty());
    }

    TEST_CASE("a 48/128 file loads with matching class counts") {
        const auto cohort = fixtures::fixed_count_cohort(176, 48, 3);
        std::ostringstream out;
        write_csv(out, cohort);
        std::istringstream in(out.str());
        const auto loaded = read_csv(in);
        CHECK(loaded.size() == 176);
        const auto counts = class_counts(loaded);
        CHECK(counts.at(1) == 128);
        CHECK(counts.at(0) == 48);
    }

    TEST_CASE("write then read is the identity") {
        const auto cohort = synthesize_cohort(CohortSpec::published(), 300, 11);
        std::ostringstream out;
        write_csv(out, cohort);
        std::istringstream in(out.str());
        const auto loaded = read_csv(in);
        REQUIRE(loaded.size() == cohort.size());
        for (std::size_t i = 0; i < cohort.size(); ++i) CHECK(loaded[i] == cohort[i]);
    }

    TEST_CASE("file round trip through save and load") {
        const auto path = std::filesystem::temp_directory_path() / "outcome_forge_roundtrip.csv";
        const auto cohort = synthesize_cohort(CohortSpec::published(), 20, 5);
        save_csv(path, cohort);
        CHECK(load_csv(path) == cohort);
        std::filesystem::remove(path);
        CHECK_THROWS_AS(load_csv(path), Error);
    }

    TEST_CASE("unknown category is a parse error at its row") {
        std::istringstream in(kHeader +
                              "\nNo,No,No,Daily,No,Yes,Temporal,No,Tumor,30,10,20,1"
                              "\nNo,No,No,Daily,No,Yes,Temporal,No,Cyst,30,10,20,1\n");
        try {
            read_csv(in);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.row() == 2);
        }
    }

    TEST_CASE("non-numeric value in a numeric column") {
        std::istringstream in(kHeader + "\nNo,No,No,Daily,No,Yes,Temporal,No,Tumor,thirty,10,20,1\n");
        CHECK_THROWS_AS(read_csv(in), ParseError);
    }

    TEST_CASE("label outside 0/1") {
        std::istringstream in(kHeader + "\nNo,No,No,Daily,No,Yes,Temporal,No,Tumor,30,10,20,2\n");
        CHECK_THROWS_AS(read_csv(in), ParseError);
    }

    TEST_CASE("header problems name the column") {
        std::string missing = kHeader;
        missing.replace(missing.find("aura,"), 5, "");
        std::istringstream a(missing + "\n");
        CHECK_THROWS_WITH_AS(read_csv(a), doctest::Contains("aura"), SchemaError);

        std::istringstream b(kHeader + ",extra\n");
        CHECK_THROWS_WITH_AS(read_csv(b), doctest::Contains("extra"), SchemaError);

        std::string swapped = kHeader;
        swapped.replace(swapped.find("febrile_seizure,family_history"), 30, "family_history,febrile_seizure");
        std::istringstream c(swapped + "\n");
        CHECK_THROWS_AS(read_csv(c), SchemaError);
    }

    TEST_CASE("class counts") {
        CHECK(class_counts(std::vector<PatientRecord>{}).empty());
        PatientRecord r = sample_record();
        r.seizure_free = 0;
        const auto counts = class_counts(std::vector<PatientRecord>{r});
        CHECK(counts.size() == 1);
        CHECK(counts.at(0) == 1);
    }
}

TEST_SUITE("encoding") {
    TEST_CASE("binary and one-hot columns") {
        const std::vector<PatientRecord> records{sample_record()};
        const auto m = encode_raw(records);
        CHECK(m.cols() == 6 + 5 + 2 + 5 + 3);  // binaries, three one-hot groups, numerics
        CHECK(m.at(0, column_of(m, Feature::aura)) == 1.0);
        double mri_sum = 0.0;
        int mri_ones = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (m.origins()[j].feature == Feature::mri_findings) {
                mri_sum += m.at(0, j);
                mri_ones += m.at(0, j) == 1.0;
            }
        }
        CHECK(mri_sum == 1.0);
        CHECK(mri_ones == 1);
        CHECK(m.at(0, column_of(m, Feature::mri_findings, static_cast<int>(MriFinding::tumor))) == 1.0);
        CHECK(m.at(0, column_of(m, Feature::age_surgery)) == 31.5);
    }

    TEST_CASE("constant numeric column encodes to zero") {
        std::vector<PatientRecord> records(4, sample_record());
        records[1].aura = false;
        std::vector<std::size_t> fit{0, 1, 2, 3};
        const auto m = encode(records, FeatureSchema::clinical(), fit);
        for (std::size_t i = 0; i < 4; ++i) CHECK(m.at(i, column_of(m, Feature::age_surgery)) == 0.0);
    }

    TEST_CASE("standardized columns have zero mean and unit std over the fit rows") {
        const auto cohort = synthesize_cohort(CohortSpec::published(), 120, 4);
        std::vector<std::size_t> fit;
        for (std::size_t i = 0; i < 120; i += 3) fit.push_back(i);
        const auto m = encode(cohort, FeatureSchema::clinical(), fit);
        for (Feature f : {Feature::age_surgery, Feature::age_onset, Feature::duration}) {
            const std::size_t j = column_of(m, f);
            double mean = 0.0;
            for (std::size_t i : fit) mean += m.at(i, j);
            mean /= static_cast<double>(fit.size());
            double var = 0.0;
            for (std::size_t i : fit) var += (m.at(i, j) - mean) * (m.at(i, j) - mean);
            var /= static_cast<double>(fit.size());
            CHECK(std::abs(mean) <= 1e-9);
            CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-9);
        }
    }

    TEST_CASE("decode inverts encode") {
        const auto cohort = synthesize_cohort(CohortSpec::published(), 60, 8);
        std::vector<std::size_t> fit(60);
        std::iota(fit.begin(), fit.end(), 0);
        const auto m = encode(cohort, FeatureSchema::clinical(), fit);
        const auto back = decode(m);
        REQUIRE(back.size() == cohort.size());
        for (std::size_t i = 0; i < cohort.size(); ++i) {
            for (const auto& c : FeatureSchema::clinical().columns()) {
                if (c.kind == FeatureKind::numeric) {
                    CHECK(numeric_value(back[i], c.feature) ==
                          doctest::Approx(numeric_value(cohort[i], c.feature)).epsilon(1e-12));
                } else {
                    CHECK(category_code(back[i], c.feature) == category_code(cohort[i], c.feature));
                    CHECK(decode_category(m, i, c.feature) == category_code(cohort[i], c.feature));
                }
            }
            CHECK(back[i].seizure_free == cohort[i].seizure_free);
        }
    }

    TEST_CASE("row and feature selection keep provenance") {
        const auto cohort = synthesize_cohort(CohortSpec::published(), 10, 2);
        const auto m = encode_raw(cohort);
        const std::vector<Feature> keep{Feature::aura, Feature::mri_findings};
        const auto sub = m.select_features(keep);
        CHECK(sub.cols() == 6);
        const std::vector<std::size_t> rows{3, 1};
        const auto picked = m.select_rows(rows);
        CHECK(picked.rows() == 2);
        CHECK(picked.labels()[0] == cohort[3].seizure_free);
        CHECK(std::equal(picked.row(1).begin(), picked.row(1).end(), m.row(1).begin()));
    }
}

TEST_SUITE("synthesis") {
    TEST_CASE("published spec is a valid distribution") {
        const auto spec = CohortSpec::published();
        CHECK_NOTHROW(spec.validate());
        for (const auto& c : spec.categorical) {
            CHECK(std::accumulate(c.probabilities.begin(), c.probabilities.end(), 0.0) ==
                  doctest::Approx(1.0).epsilon(1e-9));
        }
        auto bad = spec;
        bad.categorical[0].probabilities[0] += 0.1;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    TEST_CASE("aura fraction at n=176 lies within the binomial band") {
        const auto cohort = synthesize_cohort(CohortSpec::published(), 176, 1);
        double aura = 0.0;
        for (const auto& r : cohort) aura += r.aura;
        CHECK(std::abs(aura / 176.0 - 0.636) <= 0.11);
    }

    TEST_CASE("label share at n=176 lies within the binomial band") {
        const auto cohort = synthesize_cohort(CohortSpec::published(), 176, 1);
        const auto counts = class_counts(cohort);
        CHECK(std::abs(static_cast<double>(counts.at(1)) / 176.0 - 0.727) <= 0.10);
    }

    TEST_CASE("every record is valid and surgery ages stay in range") {
        const auto cohort = synthesize_cohort(CohortSpec::published(), 2000, 9);
        for (const auto& r : cohort) {
            CHECK_NOTHROW(validate(r));
            CHECK(r.age_surgery >= 16.0);
            CHECK(r.age_surgery <= 56.0);
        }
    }

    TEST_CASE("same seed gives byte-identical cohorts") {
        std::ostringstream a, b;
        write_csv(a, synthesize_cohort(CohortSpec::published(), 176, 1));
        write_csv(b, synthesize_cohort(CohortSpec::published(), 176, 1));
        CHECK(a.str() == b.str());
        std::ostringstream c;
        write_csv(c, synthesize_cohort(CohortSpec::published(), 176, 2));
        CHECK(a.str() != c.str());
    }

    TEST_CASE("large cohorts reproduce the marginals") {
        const auto spec = CohortSpec::published();
        const auto cohort = synthesize_cohort(spec, 10000, 12);
        for (const auto& marginal : spec.categorical) {
            std::vector<double> freq(marginal.probabilities.size(), 0.0);
            for (const auto& r : cohort) freq[static_cast<std::size_t>(category_code(r, marginal.feature))] += 1.0;
            for (std::size_t c = 0; c < freq.size(); ++c) {
                CHECK(std::abs(freq[c] / 10000.0 - marginal.probabilities[c]) <= 0.02);
            }
        }
        for (const auto& marginal : spec.numeric) {
            double mean = 0.0;
            for (const auto& r : cohort) mean += numeric_value(r, marginal.feature);
            mean /= 10000.0;
            CHECK(std::abs(mean - marginal.mean) <= 0.5);
        }
        const auto counts = class_counts(cohort);
        CHECK(std::abs(static_cast<double>(counts.at(1)) / 10000.0 - spec.label_probability) <= 0.02);
    }

    TEST_CASE("default association makes aura raise the success rate") {
        const auto cohort = synthesize_cohort(CohortSpec::published(), 10000, 13);
        double with = 0, with_ok = 0, without = 0, without_ok = 0;
        for (const auto& r : cohort) {
            (r.aura ? with : without) += 1;
            (r.aura ? with_ok : without_ok) += r.seizure_free;
        }
        CHECK(with_ok / with > without_ok / without);
    }

    TEST_CASE("n = 0 is rejected") {
        CHECK_THROWS_AS(synthesize_cohort(CohortSpec::published(), 0, 1), ConfigError);
    }
}

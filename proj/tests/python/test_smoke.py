import numpy as np
import pytest

import outcome_forge as of


def test_schema_and_models():
    assert len(of.columns()) == 13
    assert of.columns()[-1] == "seizure_free"
    assert len(of.model_ids()) == 10


def test_synthesize_is_deterministic():
    a = of.synthesize(50, seed=3)
    assert len(a) == 50
    assert a == of.synthesize(50, seed=3)
    assert a != of.synthesize(50, seed=4)
    assert set(a[0]) == set(of.columns())
    assert {r["seizure_free"] for r in a} <= {0, 1}


def test_csv_round_trip(tmp_path):
    records = of.synthesize(20, seed=1)
    path = tmp_path / "cohort.csv"
    of.write_csv(str(path), records)
    assert of.read_csv(str(path)) == records


def test_bad_records_raise():
    record = of.synthesize(1, seed=1)[0]
    bad = dict(record, lesion_location="Occipital")
    with pytest.raises(of.Error):
        of.run([bad], models=["knn"])
    missing = {k: v for k, v in record.items() if k != "aura"}
    with pytest.raises(of.Error):
        of.run([missing], models=["knn"])


def test_oversample_balances_and_keeps_originals():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 3))
    y = np.array([1] * 8 + [0] * 22)
    for method in ["random", "smote", "borderline_smote", "svm_smote", "adasyn"]:
        Xo, yo, added = of.oversample(X, y, method=method, seed=2)
        assert added == 14
        assert Xo.shape == (44, 3)
        assert (yo == 1).sum() == (yo == 0).sum() == 22
        np.testing.assert_array_equal(Xo[:30], X)
        np.testing.assert_array_equal(yo[:30], y)
    with pytest.raises(of.Error):
        of.oversample(X, y, method="tomek")


def test_run_matches_cli(tmp_path):
    records = of.synthesize(40, seed=5)
    path = tmp_path / "cohort.csv"
    of.write_csv(str(path), records)
    result = of.run(records, models=["knn", "forest"], cv="kfold", k=4, resample="smote", seed=9)
    assert [m["id"] for m in result["models"]] == ["knn", "forest"]
    for m in result["models"]:
        assert 0.0 <= m["accuracy"] <= 1.0
        assert len(m["fold_accuracies"]) == 4
        assert m["summary"] is not None
    code, out, err = of.cli(["run", "--data", str(path), "--models", "knn,forest", "--cv", "kfold",
                             "--k", "4", "--resample", "smote", "--seed", "9"])
    assert code == 0, err
    assert out == result["csv"]
    assert result["markdown"].startswith("| Classifier | Mean |")


def test_single_class_is_infeasible():
    records = of.synthesize(12, seed=1)
    for r in records:
        r["seizure_free"] = 1
    with pytest.raises(of.InfeasibleError):
        of.run(records, models=["knn"])
    assert of.cli(["run", "--synth-n", "0", "--seed", "1"])[0] == 2


def test_subset_search_finds_planted_feature():
    records = of.synthesize(60, seed=2, association=False)
    for r in records:
        r["seizure_free"] = 1 if r["aura"] == "Yes" else 0
    scores = of.subset_search(records, model="knn", max_size=2)
    assert len(scores) == 12 + 66
    features, accuracy, step = scores[0]
    assert features == ["aura"]
    assert accuracy == 1.0
    assert step == 0

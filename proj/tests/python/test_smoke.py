import json
import random

import pytest

import fairprobe as fp

DOMAIN = """
name = x0
min = 0
max = 99
protected = false

name = x1
min = 0
max = 99
protected = false

name = g
min = 0
max = 1
protected = true
"""

BAND = "biased_param = g\nbiased_value = 1\nregion.x1 = 40..44\n"


@pytest.fixture
def domain():
    return fp.Domain.parse(DOMAIN)


def biased_rows(n=400, seed=5):
    rng = random.Random(seed)
    rows, labels = [], []
    for _ in range(n):
        x = [rng.randint(0, 99), rng.randint(0, 99), rng.randint(0, 1)]
        y = 1 if x[0] >= 50 else -1
        if x[2] == 1 and 40 <= x[1] <= 59:
            y = -1
        rows.append(x)
        labels.append(y)
    return rows, labels


def test_domain_round_trip(domain):
    assert len(domain) == 3
    assert domain.names == ["x0", "x1", "g"]
    assert domain.protected == [2]
    assert fp.Domain.parse(domain.format()) == domain
    assert all(domain.contains(x) for x in domain.sample(100, seed=1))
    assert domain.sample(5, seed=3) == domain.sample(5, seed=3)


def test_check_and_perturb(domain):
    model = fp.planted(domain, BAND)
    assert model.kind == "planted"
    assert fp.planted_fraction(domain, BAND) == pytest.approx(0.05)
    f = fp.check_discriminatory(model, [3, 42, 0], domain)
    assert f["witness"] == [3, 42, 1]
    assert f["label_input"] != f["label_witness"]
    assert fp.check_discriminatory(model, [3, 10, 0], domain) is None
    assert fp.perturb([0, 5, 1], 0, -1, domain) == [0, 5, 1]
    with pytest.raises(fp.ContractError):
        fp.perturb([0, 5, 1], 2, 1, domain)
    with pytest.raises(fp.BoundError):
        fp.check_discriminatory(model, [0, 100, 0], domain)


def test_audit_report(domain):
    model = fp.planted(domain, BAND)
    report = fp.audit(model, domain, global_trials=500, local_trials=100, seed=4)
    a = report["audit"]
    assert a["counters"]["discriminatory_count"] > 0
    for f in a["findings_sample"]:
        assert fp.check_discriminatory(model, f["input"], domain) is not None
    again = fp.audit(model, domain, global_trials=500, local_trials=100, seed=4)
    assert again["audit"] == a
    with pytest.raises(fp.UsageError):
        fp.audit(model, domain, strategy="annealing")


def test_estimate_and_detection(domain):
    model = fp.planted(domain, BAND)
    est = fp.estimate(model, domain, m=1000, K=50, seed=2)
    assert abs(est.point_estimate - 5.0) < 1.0
    assert est.ci_low <= est.point_estimate <= est.ci_high
    assert len(est.per_trial) == 50
    assert fp.detection_probability(0.01, 100) == pytest.approx(1 - 0.99**100)
    with pytest.raises(fp.ContractError):
        fp.estimate(model, domain, K=1)


def test_train_predict_and_persist(domain, tmp_path):
    rows, labels = biased_rows()
    for kind in ("tree", "logistic"):
        model = fp.train(domain, rows, labels, kind, seed=1)
        assert model.kind == kind
        preds = model.predict_batch(rows[:20])
        assert preds == [model.predict(r) for r in rows[:20]]
        model.save(tmp_path / f"{kind}.model")
        loaded = fp.load_model(tmp_path / f"{kind}.model", domain)
        assert loaded.digest() == model.digest()
    with pytest.raises(fp.UsageError):
        fp.train(domain, rows, labels, "planted")


def test_retrain_reduces_bias(domain):
    rows, labels = biased_rows()
    model = fp.train(domain, rows, labels, "tree")
    report = fp.audit(model, domain, global_trials=1000, local_trials=200, seed=3)
    found = report["audit"]["discriminatory_inputs"]
    assert found
    out = fp.retrain(domain, "tree", rows, labels, found, m=1000, K=50, seed=3)
    assert out["final_estimate"] <= out["initial_estimate"]
    assert len(out["iterations"]) <= 9
    assert out["model"].kind == "tree"


def test_file_commands(tmp_path):
    dom = tmp_path / "grid.domain"
    dom.write_text(DOMAIN)
    spec = tmp_path / "band.txt"
    spec.write_text(BAND)
    rows, labels = biased_rows()
    csv = tmp_path / "train.csv"
    csv.write_text("x0,x1,g,label\n" + "".join(f"{a},{b},{c},{y}\n" for (a, b, c), y in zip(rows, labels)))

    text = fp.cmd_train(dom, csv, "tree", tmp_path / "t.model")
    assert "fairprobe-model-v1" in text
    audit = fp.cmd_audit(dom, "model:" + str(tmp_path / "t.model"), seed=3, report_out=tmp_path / "a.json")
    assert json.loads((tmp_path / "a.json").read_text())["audit"] == audit["audit"]
    re = fp.cmd_retrain(dom, "tree", csv, tmp_path / "a.json", m=500, K=20, report_out=tmp_path / "r.json")
    assert re["retrain"]["final_estimate"] <= re["retrain"]["initial_estimate"]
    est = fp.cmd_estimate(dom, "planted:" + str(spec), m=500, K=20)
    assert est["estimation"]["trials"] == 20
    cmp = fp.cmd_compare(dom, "planted:" + str(spec), [1], budget=2000)
    assert [r["strategy"] for r in cmp["compare"]["rows"]] == list(fp.STRATEGIES)
    with pytest.raises(fp.SchemaError):
        fp.cmd_estimate(tmp_path / "missing.domain", "planted:" + str(spec))

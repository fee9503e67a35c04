"""Experiment drivers: claims data, provisioning, reports, and reproducibility."""
from __future__ import annotations

import csv
import io
import json
import math

import pytest

from chebrace.arithmetic import scenario_generator
from chebrace.characters import character_degree, character_ids
from chebrace.density import FOURIER, DensityEstimate
from chebrace.experiments import (
    EXACTLY_HALF,
    EXPERIMENT_IDS,
    EXTREME_TOWARD_0,
    EXTREME_TOWARD_1,
    MODERATE,
    MOD4_PUBLISHED_DELTA,
    TABLE_CLAIMS,
    TABLE_IDS,
    UNDETERMINED,
    ConfigError,
    ExperimentConfig,
    InternalInconsistencyError,
    _check_claim,
    class_tag,
    classify_pair,
    expected_row,
    horizontal_experiment,
    mod4_experiment,
    monotonicity_experiment,
    pair_tags,
    parse_class_label,
    provision_zero_sets,
    race_row,
    report_json,
    report_rows_csv,
    reproduce_table,
    run_race,
    sandwich_experiment,
    series_csv,
    tower_experiment,
    write_report,
    zero_count_model,
)
from chebrace.groups import (
    DIHEDRAL,
    FLIP_EVEN,
    FLIP_ODD,
    MINUS_ONE,
    ONE,
    QUATERNION,
    GroupKind,
    build_group,
    power,
)
from chebrace.races import RaceSpec
from chebrace.zeros import ZeroCountModel, ZeroSet, expected_zero_count, sample_zero_set

import numpy as np


# -- claims data ---------------------------------------------------------------


def test_class_tags_and_pair_ordering():
    assert class_tag(ONE) == "one"
    assert class_tag(MINUS_ONE) == "minus_one"
    assert class_tag(power(2)) == "power_even"
    assert class_tag(power(5)) == "power_odd"
    assert class_tag(FLIP_EVEN) == class_tag(FLIP_ODD) == "flip"
    assert pair_tags(FLIP_EVEN, ONE) == ("one", "flip")
    assert pair_tags(ONE, FLIP_EVEN) == ("one", "flip")
    assert pair_tags(power(3), power(2)) == ("power_even", "power_odd")


def test_claims_cover_every_class_pair():
    group = build_group(GroupKind(QUATERNION, 6))
    labels = group.class_labels()
    for family, w in ((DIHEDRAL, +1), (QUATERNION, +1), (QUATERNION, -1)):
        seen = set()
        for a in range(len(labels)):
            for b in range(a + 1, len(labels)):
                rec = expected_row(family, w, labels[a], labels[b])
                assert rec["class"] in (EXACTLY_HALF, EXTREME_TOWARD_0,
                                        EXTREME_TOWARD_1, MODERATE, UNDETERMINED)
                seen.add(rec["tags"])
        assert len(seen) == 13  # every published tag pair is exercised
    assert len(TABLE_CLAIMS) == 3
    for claims in TABLE_CLAIMS.values():
        assert len(claims) == 13


def test_expected_row_rejects_unknown_tag_pairs():
    with pytest.raises(InternalInconsistencyError):
        expected_row(QUATERNION, +1, ONE, ONE)


def test_dihedral_claims_ignore_w():
    assert expected_row(DIHEDRAL, -1, ONE, MINUS_ONE) == \
        expected_row(DIHEDRAL, +1, ONE, MINUS_ONE)


def test_classify_pair_edges():
    assert classify_pair(0, 5) == EXACTLY_HALF
    # level 4: cut = max(4, 2^3 - 2) = 6
    assert classify_pair(5, 4) == MODERATE
    assert classify_pair(6, 4) == EXTREME_TOWARD_1
    assert classify_pair(-6, 4) == EXTREME_TOWARD_0
    # level 3: cut = max(4, 2) = 4
    assert classify_pair(4, 3) == EXTREME_TOWARD_1
    assert classify_pair(-4, 3) == EXTREME_TOWARD_0
    assert classify_pair(3, 3) == MODERATE
    assert classify_pair(-1, 3) == MODERATE


# -- zero-set provisioning -------------------------------------------------------


def test_provisioning_is_deterministic_and_extension_stable():
    scen = scenario_generator(QUATERNION, 4, +1, seed=5)
    a = provision_zero_sets(scen, ["psi_1", "psi_3"], seed=9)
    b = provision_zero_sets(scen, ["psi_1", "psi_3"], seed=9)
    assert a == b
    # adding characters never reshuffles previously sampled sets
    c = provision_zero_sets(scen, ["psi_1", "psi_3", "chi1"], seed=9)
    assert c["psi_1"] == a["psi_1"]
    assert c["psi_3"] == a["psi_3"]
    d = provision_zero_sets(scen, ["psi_1"], seed=10)
    assert d["psi_1"] != a["psi_1"]


def test_provisioning_honors_min_count_and_t_max():
    scen = scenario_generator(QUATERNION, 4, +1, seed=5)
    sets = provision_zero_sets(scen, ["psi_1"], seed=0, min_count=200)
    model = zero_count_model(scen, "psi_1")
    assert expected_zero_count(model, sets["psi_1"].t_max) >= 200
    fixed = provision_zero_sets(scen, ["psi_1"], seed=0, t_max=48.0)
    assert fixed["psi_1"].t_max == 48.0
    assert model.log_conductor == scen.log_conductor("psi_1")
    assert model.degree_factor == character_degree("psi_1")


# -- report plumbing -------------------------------------------------------------


def test_report_json_converts_numpy_types():
    report = {
        "a": np.float64(1.5),
        "b": [np.int64(2), {"c": np.float32(0.25)}],
        "d": np.arange(3),
    }
    payload = json.loads(report_json(report))
    assert payload == {"a": 1.5, "b": [2, {"c": 0.25}], "d": [0, 1, 2]}


def test_report_rows_csv_flattens_with_stable_header():
    rows = [
        {"b": 1.5, "a": None, "flag": True},
        {"a": "x", "extra": {"k": [1, 2]}},
    ]
    text = report_rows_csv(rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == ["a", "b", "extra", "flag"]
    assert parsed[1] == ["", "1.5", "", "true"]
    assert parsed[2] == ["x", "", '{"k": [1, 2]}', ""]


def test_series_csv_shape():
    text = series_csv({"x": "f", "y": "gap", "points": [[1, 0.25], [2, 0.125]]})
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed == [["f", "gap"], ["1", "0.25"], ["2", "0.125"]]


def test_write_report_files(tmp_path):
    report = {"rows": [{"a": 1}], "series": {"x": "u", "y": "v",
                                             "points": [[1, 2]]}}
    out = tmp_path / "report.json"
    written = write_report(report, str(out), "json")
    assert written == [str(out), str(out) + ".series.csv"]
    assert json.loads(out.read_text())["rows"] == [{"a": 1}]
    assert (tmp_path / "report.json.series.csv").read_text() == "u,v\n1,2\n"
    out2 = tmp_path / "report.csv"
    write_report({"rows": [{"a": 1}]}, str(out2), "csv")
    assert out2.read_text() == "a\n1\n"
    with pytest.raises(ConfigError):
        write_report(report, str(out), "xml")


def test_parse_class_label():
    assert parse_class_label("one") == ONE
    assert parse_class_label(" minus_one ") == MINUS_ONE
    assert parse_class_label("power(3)") == power(3)
    assert parse_class_label("flip_odd") == FLIP_ODD
    for bad in ("power(0)", "power(x)", "rotation", "", "One"):
        with pytest.raises(ConfigError):
            parse_class_label(bad)


# -- race rows and the ad-hoc driver ----------------------------------------------


def test_race_row_fields_and_flags():
    scen = scenario_generator(QUATERNION, 3, -1, seed=11)
    spec = RaceSpec(scen, 3, ONE, MINUS_ONE)
    sets = provision_zero_sets(scen, ["psi_1"], seed=11)
    row = race_row(spec, sets, samples=10000, mc_seed=1)
    assert row["status"] == "match"
    assert row["mean_formula"] == row["mean_published"] == -4
    assert row["n_terms"] == len(sets["psi_1"])
    assert 0.0 <= row["delta_fourier"] <= 1.0
    assert row["q"] == 2.0  # top level, single weighted character
    assert row["truncation_shift_bound"] is not None
    assert row["flags"]["methods_agree"]["ok"]
    assert row["flags"]["side_matches_mean"]["ok"]
    assert row["pass"] is True


def test_race_row_undefined_and_half_pairs():
    scen = scenario_generator(DIHEDRAL, 4, +1, seed=3)
    below = race_row(RaceSpec(scen, 3, FLIP_EVEN, FLIP_ODD), {}, 10000, 0)
    assert below["status"] == "undefined"
    assert "reason" in below and "mean_formula" not in below
    spec = RaceSpec(scen, 4, FLIP_EVEN, FLIP_ODD)  # defined at the top, mean 0
    needed = ["chi1", "chi2", "chi3", "psi_1", "psi_3"]
    sets = provision_zero_sets(scen, needed, seed=3)
    row = race_row(spec, sets, 10000, 0)
    assert row["mean_formula"] == 0
    assert row["delta_fourier"] == 0.5
    assert row["delta_mc"] == 0.5
    assert row["flags"]["half_exact"]["ok"]


def test_race_row_file_backed_sets_have_no_truncation_bound(tmp_path):
    scen = scenario_generator(QUATERNION, 3, +1, seed=4)
    synthetic = provision_zero_sets(scen, ["psi_1"], seed=4)["psi_1"]
    file_like = ZeroSet("psi_1", synthetic.t_max, synthetic.ordinates,
                        source="file", log_conductor=None)
    row = race_row(RaceSpec(scen, 3, ONE, MINUS_ONE), {"psi_1": file_like},
                   10000, 2)
    assert row["truncation_shift_bound"] is None


def test_run_race_reports_are_reproducible():
    config = ExperimentConfig(
        family=QUATERNION, n=3, w_axiom=-1, seed=11, samples=10000,
        pairs=((ONE, MINUS_ONE), (power(1), FLIP_EVEN)))
    a = run_race(config)
    b = run_race(config)
    assert report_json(a) == report_json(b)
    assert a["level"] == 3
    assert a["w_axiom"] == -1
    assert [r["c1"] for r in a["rows"]] == ["one", "power(1)"]
    assert all(r["pass"] for r in a["rows"])


def test_run_race_default_pairs_include_the_undefined_row():
    config = ExperimentConfig(family=DIHEDRAL, n=4, w_axiom=+1, level=3,
                              seed=2, samples=10000)
    report = run_race(config)
    classes = (1 << (3 - 2)) + 3
    assert len(report["rows"]) == classes * (classes - 1) // 2
    undefined = [r for r in report["rows"] if r["status"] == "undefined"]
    assert len(undefined) == 1
    assert {undefined[0]["c1"], undefined[0]["c2"]} == {"flip_even", "flip_odd"}


def test_run_race_rejects_bad_pairs_and_uncovered_files(tmp_path):
    bad = ExperimentConfig(family=QUATERNION, n=3, samples=10000,
                           pairs=((ONE, power(2)),))  # out of range at level 3
    with pytest.raises(ConfigError):
        run_race(bad)
    same = ExperimentConfig(family=QUATERNION, n=3, samples=10000,
                            pairs=((ONE, ONE),))
    with pytest.raises(ConfigError):
        run_race(same)
    # a files run whose zero data does not cover the weighted characters
    zs = sample_zero_set(ZeroCountModel(4.0, 1), 32.0, 0, character_id="chi1")
    path = tmp_path / "chi1.txt"
    from chebrace.zeros import save_zero_file

    save_zero_file(zs, str(path))
    config = ExperimentConfig(family=QUATERNION, n=3, samples=10000,
                              zero_source="files", zero_files=(str(path),),
                              pairs=((ONE, MINUS_ONE),))
    with pytest.raises(ConfigError):
        run_race(config)  # needs psi_1, only chi1 was supplied


def test_load_zero_sets_rejects_duplicates(tmp_path):
    from chebrace.experiments import load_zero_sets
    from chebrace.zeros import save_zero_file

    zs = sample_zero_set(ZeroCountModel(4.0, 1), 32.0, 0, character_id="chi1")
    p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
    save_zero_file(zs, str(p1))
    save_zero_file(zs, str(p2))
    with pytest.raises(ConfigError):
        load_zero_sets([str(p1), str(p2)])


# -- table reproduction ------------------------------------------------------------


def test_h8_table_rows():
    report = reproduce_table("h8")
    rows = {(r["c1"], r["c2"]): r for r in report["rows"]}
    assert len(rows) == 10
    assert report["open_questions"] == 0
    assert all(r["status"] == "match" for r in rows.values())
    central = rows[("one", "minus_one")]
    assert central["mean_symbolic"] == "4-8o"
    assert central["variance_coefficients"] == {"psi_1": 16}
    axis = rows[("one", "power(1)")]
    assert axis["mean_symbolic"] == "-2-4o"
    assert axis["variance_coefficients"] == {"chi2": 4, "chi3": 4, "psi_1": 4}
    pair = rows[("power(1)", "flip_even")]
    assert pair["mean_symbolic"] == "0"
    assert pair["variance_coefficients"] == {"chi1": 4, "chi2": 4}
    down = rows[("minus_one", "flip_odd")]
    assert down["mean_symbolic"] == "-6+4o"


def test_reproduce_quaternion_table_has_no_open_questions():
    report = reproduce_table("esp-q", n=6)
    assert report["open_questions"] == 0
    assert len(report["rows"]) == 514
    assert {r["status"] for r in report["rows"]} == {"match", "undefined"}
    assert all(r["diff"] in (0, None) for r in report["rows"])


def test_reproduce_dihedral_table_flags_identity_rows():
    report = reproduce_table("esp-d", n=6)
    assert len(report["rows"]) == 257
    assert report["open_questions"] == 38
    for r in report["rows"]:
        involves_one = "one" in (r["c1"], r["c2"])
        if r["status"] == "undefined":
            assert r["diff"] is None
        elif involves_one:
            assert r["status"] == "open-question"
            assert r["diff"] == (1 if r["c1"] == "one" else -1)
        else:
            assert r["status"] == "match"
            assert r["diff"] == 0


def test_reproduce_table_rejects_unknown_id():
    with pytest.raises(ConfigError):
        reproduce_table("nope")


# -- claim checking ------------------------------------------------------------------


def _est(value, budget=1e-9):
    return DensityEstimate(value, FOURIER, budget, 100)


def test_check_claim_exactly_half():
    claim = {"class": EXACTLY_HALF, "side": None}
    row = {"mean_formula": 0, "computed_class": EXACTLY_HALF}
    assert _check_claim(row, claim, _est(0.5, 0.0))["comparison"] == "agrees"
    assert _check_claim(row, claim, _est(0.5004))["comparison"] == "fails"


def test_check_claim_undetermined_rows_never_gate():
    claim = {"class": UNDETERMINED, "side": None}
    row = {"mean_formula": 2, "computed_class": MODERATE}
    out = _check_claim(row, claim, _est(0.62))
    assert out == {"comparison": "undetermined-in-source"}


def test_check_claim_sided_classes():
    claim = {"class": EXTREME_TOWARD_0, "side": -1}
    row = {"mean_formula": -8, "computed_class": EXTREME_TOWARD_0}
    assert _check_claim(row, claim, _est(0.02))["comparison"] == "agrees"
    wrong_side = {"mean_formula": 8, "computed_class": EXTREME_TOWARD_1}
    assert _check_claim(wrong_side, claim, _est(0.98))["comparison"] == "fails"
    unresolved = _check_claim(row, claim, _est(0.499, budget=0.1))
    assert unresolved["comparison"] == "fails"


def test_check_claim_open_question_rows():
    claim = {"class": EXACTLY_HALF, "side": None, "formula_class": MODERATE,
             "formula_side": -1, "open_question": True}
    row = {"mean_formula": -2, "computed_class": MODERATE}
    out = _check_claim(row, claim, _est(0.42))
    assert out["comparison"] == "open-question"
    assert out["open_question"] is True
    assert "note" in out
    bad = _check_claim(row, claim, _est(0.58))
    assert bad["comparison"] == "fails"


# -- drivers (light runs) --------------------------------------------------------------


def test_horizontal_experiment_gates():
    report = horizontal_experiment((1, 2), w_axiom=-1, seed=3, samples=10000,
                                   min_zeros=128)
    assert [r["f"] for r in report["rows"]] == [1, 2]
    for r in report["rows"]:
        assert r["flags"]["conductor_large"]["ok"]
        assert r["flags"]["w_controlled_side"]["ok"]
        assert r["delta_fourier"] < 0.5  # W = -1 pushes the bias below 1/2
    assert report["gap_decreasing_fourier"] is True
    assert report["all_rows_pass"] is True
    assert report["series"]["points"][0][0] == 1


def test_horizontal_experiment_validation():
    with pytest.raises(ConfigError):
        horizontal_experiment((), -1, 0)
    with pytest.raises(ConfigError):
        horizontal_experiment((0, 1), -1, 0)
    with pytest.raises(ConfigError):
        horizontal_experiment((2, 1), -1, 0)
    with pytest.raises(ConfigError):
        horizontal_experiment((1, 2), 0, 0)


def test_tower_experiment_quaternion_minus_one():
    report = tower_experiment(QUATERNION, 4, -1, seed=7)
    assert report["experiment"] == "tabQ"
    assert report["all_published_rows_confirmed"] is True
    rows = {(r["c1"], r["c2"]): r for r in report["rows"]}
    # the two parity-swapped print rows surface as open questions
    assert rows[("minus_one", "power(1)")]["comparison"] == "open-question"
    assert rows[("minus_one", "power(2)")]["comparison"] == "open-question"
    # rows the published table leaves undetermined are never asserted
    assert rows[("power(1)", "power(2)")]["comparison"] == "undetermined-in-source"
    assert rows[("one", "minus_one")]["comparison"] == "agrees"
    assert rows[("one", "minus_one")]["computed_class"] == EXTREME_TOWARD_0


def test_tower_experiment_rejects_large_n():
    with pytest.raises(ConfigError):
        tower_experiment(QUATERNION, 13, +1, seed=0)


def test_monotonicity_dihedral_holds():
    report = monotonicity_experiment(DIHEDRAL, 6, 0.25, +1, seed=1,
                                     samples=20000, t_max=16.0)
    assert report["verdict"] == "holds"
    assert report["quantity"] == "delta"
    assert report["formula_consistent"] is True
    assert report["qualifying_i"] == [3]
    assert report["qualifying_j"] == [6]
    deltas = [r["delta_mc"] for r in report["levels"]]
    assert deltas[0] > deltas[-1]
    assert "open_question" not in report


def test_monotonicity_quaternion_plus_holds():
    report = monotonicity_experiment(QUATERNION, 6, 0.25, +1, seed=1,
                                     samples=20000, t_max=16.0)
    assert report["verdict"] == "holds"
    assert report["quantity"] == "one-minus-delta"
    deltas = [r["delta_mc"] for r in report["levels"]]
    assert deltas[-1] > deltas[0]  # 1 - delta decreasing means delta rising


def test_monotonicity_quaternion_minus_is_open_question():
    report = monotonicity_experiment(QUATERNION, 6, 0.25, -1, seed=1,
                                     samples=20000, t_max=16.0)
    assert report["formula_consistent"] is False
    assert report["open_question"] is True
    assert "note" in report
    assert all(rec["mean_increasing"]
               for rec in report["mean_ordering_by_formula"])
    assert report["verdict"] in ("holds", "fails", "inconclusive", "vacuous")


def test_monotonicity_validation():
    with pytest.raises(ConfigError):
        monotonicity_experiment(DIHEDRAL, 6, 0.0, +1, seed=0)


def test_sandwich_experiment_light():
    report = sandwich_experiment(count=6, seed=2, samples=10000, t_max=32.0)
    assert report["population_bias_above_1"] == 6
    assert report["inside"] == 6
    assert report["success_rate"] == 1.0
    for r in report["rows"]:
        assert r["counted"] is True
        assert 1.0 < r["bias_factor"] < 3.5
        assert r["q"] == 2.0
        assert r["lower"] <= r["one_minus_delta_mc"] <= r["upper"]


def test_mod4_experiment_synthetic_and_file(tmp_path):
    report = mod4_experiment(seed=1, t_max=200.0, nodes=2000)
    assert report["gating"] is False
    assert report["published_delta"] == MOD4_PUBLISHED_DELTA
    assert 0.9 < report["delta_fourier"] < 1.0
    assert math.isclose(report["difference"],
                        report["delta_fourier"] - MOD4_PUBLISHED_DELTA,
                        rel_tol=1e-15)
    assert report["zero_source"].startswith("synthetic")
    from chebrace.zeros import save_zero_file

    zs = sample_zero_set(ZeroCountModel(math.log(4.0), 1), 200.0, 1,
                         character_id="chi4")
    path = tmp_path / "mod4.txt"
    save_zero_file(zs, str(path))
    from_file = mod4_experiment(zero_file=str(path))
    assert from_file["zero_source"] == "file"
    assert from_file["n_zeros"] == len(zs)
    assert math.isclose(from_file["delta_fourier"], report["delta_fourier"],
                        abs_tol=2e-2)
    with pytest.raises(ConfigError):
        mod4_experiment(zero_file=str(tmp_path / "missing.txt"))


# -- configuration -------------------------------------------------------------------


def test_experiment_and_table_id_inventories():
    assert EXPERIMENT_IDS == ("h8-table", "horizontal", "tabD", "tabQ",
                              "monotonicity", "race")
    assert TABLE_IDS == ("esp-q", "esp-d", "h8")


def test_config_validation_messages():
    cases = [
        (dict(experiment="bogus"), "experiment"),
        (dict(family="cyclic"), "family"),
        (dict(n=2), "n"),
        (dict(n=21), "n"),
        (dict(w_axiom=0), "w_axiom"),
        (dict(level=2), "level"),
        (dict(n=4, level=5), "level"),
        (dict(samples=9999), "samples"),
        (dict(zero_source="http"), "zero_source"),
        (dict(zero_source="files"), "zero_files"),
        (dict(zero_source="files", zero_files=("/no/such/file",)), "zero file"),
        (dict(format="xml"), "format"),
    ]
    for kwargs, needle in cases:
        config = ExperimentConfig(**kwargs)
        with pytest.raises(ConfigError) as err:
            config.validate()
        assert needle in str(err.value), (kwargs, str(err.value))
    ExperimentConfig().validate()  # defaults are valid


def test_config_from_dict():
    config = ExperimentConfig.from_dict({
        "family": "dihedral", "n": 5, "pairs": [["one", "power(2)"]],
        "f_values": [1, 2, 3], "zero_files": [],
    })
    assert config.family == DIHEDRAL
    assert config.pairs == ((ONE, power(2)),)
    assert config.f_values == (1, 2, 3)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"mystery": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"pairs": [["one"]]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"pairs": [["one", "power(zero)"]]})

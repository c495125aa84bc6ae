import json
import math

import pytest

qvkit = pytest.importorskip("qvkit")


def test_metrics_example():
    rep = qvkit.report([1, 2, 3, 4, 5], 0.5, [0.51])
    assert rep["gini"] == pytest.approx(0.145922269167, rel=1e-10)
    assert rep["nakamoto"][0.51][0] == 3
    assert qvkit.gini([1, 2, 3, 4, 5]) == pytest.approx(20 / 75, rel=1e-14)


def test_gamma_search_closed_form():
    r = qvkit.gamma_search([("x", 1), ("y", 99)], 1, 0.6)
    assert r["converged"]
    assert abs(r["gamma"] - math.log(1.5) / math.log(99)) < 1e-6


def test_collusion_and_sybil():
    honest = [("v0", [3, 0, 0]), ("v1", [0, 3, 0]), ("v2", [0, 0, 3])]
    colluding = [(v, [1, 1, 1]) for v, _ in honest]
    rep = qvkit.collusion_gain([3, 3, 3], 3, honest, colluding)
    assert rep["gain"] == pytest.approx(math.sqrt(3), abs=1e-12)
    assert qvkit.sybil_gain("qv2", 9, 16) == pytest.approx(4.0, rel=1e-14)
    assert qvkit.sybil_gain("linear", 9, 16) == 1.0


def test_optimizer_beats_oracle():
    args = ("qv1", [10, 1], [0, 0], [1, 1], 4)
    sol = qvkit.maximize(*args)
    orc = qvkit.brute_force_oracle(*args, resolution=300)
    assert sol["utility"] >= orc["utility"] - 1e-6 * (1 + abs(orc["utility"]))
    assert sum(x * x for x in sol["allocation"]) == pytest.approx(4.0, rel=1e-12)


def test_errors_carry_codes():
    with pytest.raises(qvkit.QvkitError) as info:
        qvkit.canonicalize([("a", 0)])
    assert info.value.code == "NonPositiveStake"
    assert info.value.subject == "a"
    with pytest.raises(qvkit.QvkitError) as info:
        qvkit.tally("qv2", [("a", 9)], [("a", [2, 2])], 2)
    assert info.value.code == "InvalidBallot"


def test_cli_in_process():
    code, out, err = qvkit.run_cli(["attack", "sybil", "--scheme", "qv3", "--stake", "9", "--k", "9"])
    assert code == 0, err
    assert json.loads(out)["gain"] == 3
    code, _, _ = qvkit.run_cli(["metrics"])
    assert code == 2


def test_generate_is_deterministic():
    a = qvkit.generate("pareto", 50, seed=3)
    assert a == qvkit.generate("pareto", 50, seed=3)
    assert len(a) == 50

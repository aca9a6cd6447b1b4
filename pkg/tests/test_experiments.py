import json
import os

import numpy as np
import pytest

from ldg_orlicz.errors import ConfigurationError, NonConvergenceError, SingularityError
from ldg_orlicz.experiments import (ALPHA_TABLE, EOC_COLUMNS, FIELD_NAMES, ExactSolution, RunConfig,
                                    default_alpha, eoc, error_concentration, export_fields,
                                    read_eoc_csv, run_convergence_study)
from ldg_orlicz.orlicz import NFunction, op_A


@pytest.fixture(params=[1.5, 2.0, 3.0])
def exact(request):
    return ExactSolution(NFunction(request.param, 1e-3))


def sample_points(n=20, seed=0):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.2, 1.8, n)
    t = rng.uniform(0, 2 * np.pi, n)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def test_grad_and_hessian_fd(exact):
    x = sample_points()
    h = 1e-6
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (exact.u(x + e) - exact.u(x - e)) / (2 * h)
        assert exact.grad(x)[:, :, j] == pytest.approx(fd, rel=1e-7, abs=1e-9)
        fd2 = (exact.grad(x + e) - exact.grad(x - e)) / (2 * h)
        assert exact.hessian(x)[:, :, :, j] == pytest.approx(fd2, rel=1e-6, abs=1e-8)


def test_source_is_minus_divergence_of_flux(exact):
    x = sample_points(seed=1)
    h = 1e-5
    div = np.zeros((len(x), 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        div += (exact.A(x + e)[:, :, j] - exact.A(x - e)[:, :, j]) / (2 * h)
    assert exact.f(x) == pytest.approx(-div, rel=1e-6, abs=1e-6)


def test_rotation_equivariance(exact):
    x = sample_points(seed=2)
    c, s = np.cos(0.7), np.sin(0.7)
    Q = np.array([[c, -s], [s, c]])
    assert exact.u(x @ Q.T) == pytest.approx(exact.u(x) @ Q.T, abs=1e-8)
    assert exact.f(x @ Q.T) == pytest.approx(exact.f(x) @ Q.T, rel=1e-8, abs=1e-8)


def test_singular_at_origin(exact):
    with pytest.raises(SingularityError):
        exact.grad(np.zeros((1, 2)))
    with pytest.raises(SingularityError):
        exact.hessian(np.zeros((1, 2)))
    assert exact.u(np.zeros((1, 2))) == pytest.approx(np.zeros((1, 2)))
    assert np.allclose(exact.A(sample_points()), op_A(exact.nf, exact.grad(sample_points())))


def test_alpha_table():
    assert default_alpha(2.0) == 2.0 and default_alpha(4 / 3) == 0.1
    assert len(ALPHA_TABLE) == 10
    with pytest.raises(ConfigurationError):
        default_alpha(1.7)
    assert RunConfig(p=1.7, alpha=0.7).alpha == 0.7
    with pytest.raises(ConfigurationError):
        RunConfig(levels=0)


def test_eoc_formula():
    assert eoc(0.25, 1.0, 0.5, 1.0) == pytest.approx(2.0)
    assert eoc(1.0, 1.0, 0.5, 1.0) == 0.0


@pytest.fixture(scope="module")
def study(tmp_path_factory):
    out = tmp_path_factory.mktemp("study")
    cfg = RunConfig(p=2.0, levels=3, out=str(out))
    rows, last = run_convergence_study(cfg, keep_last=True)
    return cfg, rows, last, out


def test_study_outputs(study):
    cfg, rows, last, out = study
    assert [r.level for r in rows] == [0, 1, 2]
    for a, b in zip(rows, rows[1:]):
        for k in ("grad", "L", "A", "jump"):
            assert b.errors[k] < a.errors[k]
    table = read_eoc_csv(os.path.join(out, "eoc.csv"))
    assert list(table[0]) == EOC_COLUMNS and table[0]["eoc_grad"] == ""
    for a, b in zip(table, table[1:]):
        for k in ("grad", "L", "A", "jump"):
            e = eoc(float(b[f"e_{k}"]), float(a[f"e_{k}"]), float(b["h"]), float(a["h"]))
            assert float(b[f"eoc_{k}"]) == pytest.approx(e, rel=1e-9)
    with open(os.path.join(out, "report.json")) as fh:
        rep = json.load(fh)
    assert rep["config"]["p"] == 2.0 and len(rep["levels"]) == 3
    assert all(lv["converged"] for lv in rep["levels"])


def test_partial_results_on_failure(tmp_path):
    cfg = RunConfig(p=1.5, levels=3, max_iter=2, continuation=False, out=str(tmp_path))
    with pytest.raises(NonConvergenceError):
        run_convergence_study(cfg)
    table = read_eoc_csv(tmp_path / "eoc.csv")
    assert len(table) < 3


def test_export_fields_and_concentration(study, tmp_path):
    _, _, (system, exact, report), _ = study
    paths = export_fields(system, report, exact, tmp_path)
    assert set(paths) == set(FIELD_NAMES)
    for path in paths.values():
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert data.shape[1] == 3 and np.all(np.isfinite(data)) and np.all(data[:, 2] > -1e-12)
    share = error_concentration(system, report, exact)
    assert 0.0 < share < 1.0
    assert error_concentration(system, report, exact, radius=10.0) == pytest.approx(1.0)

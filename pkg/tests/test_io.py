import filecmp

import numpy as np
import pytest

from bcinverse import PRESETS, PotentialSpec
from bcinverse.acoustic import simulate_acoustic_response
from bcinverse.dynamics import response_function
from bcinverse.errors import SchemaError
from bcinverse.io import (read_acoustic, read_csv, read_json, read_measure, read_response,
                          read_scattering, read_weyl, write_acoustic, write_csv,
                          write_manifest, write_measure, write_response, write_scattering,
                          write_weyl)
from bcinverse.numerics import Grid1D
from bcinverse.scattering import scattering_data
from bcinverse.spectral import build_sigma_d, dirichlet_eigendata, reference_eigendata
from bcinverse.weyl import weyl_from_response


def test_response_round_trip(tmp_path):
    r = response_function(PRESETS["deep_well"](), 1.0, 1 / 100)
    path = str(tmp_path / "response.csv")
    write_response(path, r)
    back = read_response(path)
    assert np.array_equal(back.values, r.values)
    assert back.grid == r.grid
    _, Phi = read_csv(path, ["t", "Phi"])
    assert np.array_equal(Phi, r.Phi())


def test_measure_round_trip(tmp_path):
    q = PotentialSpec.constant(1.0)
    s = build_sigma_d(dirichlet_eigendata(q, 1.0, N=5), reference_eigendata(1.0, N=5))
    path = str(tmp_path / "sigma.csv")
    write_measure(path, s)
    back = read_measure(path)
    assert np.array_equal(back.lambdas, s.lambdas)
    assert np.array_equal(back.weights, s.weights)
    assert np.array_equal(back.signs, s.signs)
    assert back.T == s.T and back.tag == s.tag


def test_scattering_round_trip(tmp_path):
    d = scattering_data(PRESETS["deep_well"](), Grid1D(0.5, 5.0, 10))
    path = str(tmp_path / "scattering.csv")
    write_scattering(path, d)
    back = read_scattering(path)
    assert np.allclose(back.M, d.M, rtol=1e-14)
    assert back.bound == d.bound and back.bound_searched
    assert back.support == d.support


def test_weyl_and_acoustic_round_trip(tmp_path):
    r = response_function(PotentialSpec.constant(1.0), 10.0, 1 / 100)
    m = weyl_from_response(r, [3.0, 4.0])
    path = str(tmp_path / "weyl.csv")
    write_weyl(path, m)
    back = read_weyl(path)
    assert np.array_equal(back.values, m.values)
    p = simulate_acoustic_response(PRESETS["barrier"](), 2.0, 1 / 100)
    path = str(tmp_path / "acoustic.csv")
    write_acoustic(path, p)
    back = read_acoustic(path)
    assert np.array_equal(back.values, p.values)
    assert np.array_equal(back.echo.values, p.echo.values)
    assert back.delta_coefficient == -1.0 and back.support == p.support


def test_schema_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,x\n0,1\n")
    with pytest.raises(SchemaError):
        read_response(str(bad))
    bad.write_text("t,r\n0,1\n0.1,oops\n")
    with pytest.raises(SchemaError):
        read_response(str(bad))
    bad.write_text("t,r\n0,1\n0.1,2\n0.3,3\n")
    with pytest.raises(SchemaError):
        read_response(str(bad))
    bad.write_text("t,r\n0.1,1\n0.2,2\n")
    with pytest.raises(SchemaError):
        read_response(str(bad))
    bad.write_text("")
    with pytest.raises(SchemaError):
        read_response(str(bad))
    with pytest.raises(SchemaError):
        read_response(str(tmp_path / "missing.csv"))
    with pytest.raises(SchemaError):
        read_json(str(tmp_path / "missing.json"))


def test_write_csv_rejects_ragged(tmp_path):
    with pytest.raises(ValueError):
        write_csv(str(tmp_path / "x.csv"), [[1, 2], [1]], ["a", "b"])


def test_outputs_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        (tmp_path / d).mkdir()
        r = response_function(PRESETS["barrier"](), 1.0, 1 / 100)
        write_response(str(tmp_path / d / "response.csv"), r)
        write_manifest(str(tmp_path / d), "forward", {"h": 0.01, "T": 0.5}, ["response.csv"])
    for name in ("response.csv", "manifest.json"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)
    man = read_json(str(tmp_path / "a" / "manifest.json"))
    assert man["files"] == ["response.csv"] and len(man["config_hash"]) == 64

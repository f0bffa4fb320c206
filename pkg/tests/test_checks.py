import numpy as np

from bcinverse import PRESETS, PotentialSpec
from bcinverse.checks import TOLERANCES, gram_identity, run_all, smooth_bumps
from bcinverse.dynamics import ResponseFunction, response_function
from bcinverse.numerics import Grid1D


def test_run_all_zero_passes():
    res = run_all(PotentialSpec.zero(), K_max=50.0, N=400)
    assert [c.name for c in res] == ["gram", "spectral_bridge", "wave_transformation",
                                     "inverse_transformation", "acoustic_transformation",
                                     "jost_connection", "acoustic_connection",
                                     "scattering_bridge", "parseval"]
    assert all(c.passed for c in res)
    assert set(TOLERANCES) == {c.name for c in res}


def test_run_all_skips_compact_only_checks():
    res = run_all(PRESETS["smooth_bump"](), N=400)
    skipped = [c.name for c in res if c.note.startswith("skipped")]
    assert skipped == ["acoustic_transformation", "jost_connection", "acoustic_connection",
                       "scattering_bridge", "parseval"]
    assert all(c.passed for c in res)


def test_bound_state_skips_scattering_bridge():
    res = {c.name: c for c in run_all(PRESETS["deep_well"](), K_max=50.0, N=400)}
    assert res["scattering_bridge"].note.startswith("skipped")
    assert all(c.passed for c in res.values())


def test_gram_detects_corruption():
    q = PotentialSpec.constant(1.0)
    r = response_function(q, 2.0, 1 / 200)
    assert gram_identity(q, r=r).passed
    v = np.array(r.values)
    v[100:141] += 0.2
    bad = gram_identity(q, r=ResponseFunction.from_values(2.0, v))
    assert not bad.passed
    assert bad.to_dict()["passed"] is False


def test_smooth_bumps_deterministic():
    g = Grid1D(0.0, 4.0, 401)
    a = smooth_bumps(g, seed=3)
    b = smooth_bumps(g, seed=3)
    assert len(a) == 3
    for f, h in zip(a, b):
        assert np.array_equal(f.values, h.values)
        assert f.values[0] == 0 and f.values[-1] == 0 and np.max(f.values) > 0

import numpy as np
import pytest

from pldisk._kernel import available_backends
from pldisk._kernel import common as C


@pytest.fixture(scope="module")
def backends():
    return available_backends()


def _run(fn, field=C.FIELD_TAU, y0=(0.1, 0.0), t_cap=30.0, cfg_extra=()):
    cfg = [0.0] * C.NCFG
    cfg[C.CFG_RECORD_CROSS] = 1.0
    for k, v in cfg_extra:
        cfg[k] = v
    return fn(field, 1.0, 1.0, 1.0, y0[0], y0[1], 0.0, 1.0, 1e-10, 1e-12,
              10 ** 6, t_cap, cfg, np.empty((0, 6)))


def test_python_backend_always_available(backends):
    assert "python" in backends


def test_backends_agree_bitwise(backends):
    if "c" not in backends:
        pytest.skip("compiled kernel not built")
    for field, y0 in ((C.FIELD_TAU, (0.1, 0.0)), (C.FIELD_U1, (0.05, 0.3)),
                      (C.FIELD_V2, (0.04, -0.2))):
        out_c = _run(backends["c"], field, y0)
        out_py = _run(backends["python"], field, y0)
        assert out_c[0] == out_py[0]
        assert len(out_c[2]) == len(out_py[2])
        assert np.array_equal(out_c[2], out_py[2])
        assert np.array_equal(out_c[3], out_py[3])


def test_event_bisection_tolerance(backends):
    # the u-axis stop lands on v = 0 to the localization tolerance
    fn = backends["python"]
    st, _, ts, ys, _, _ = _run(fn, cfg_extra=((C.CFG_STOP_U_AXIS, 1.0),
                                              (C.CFG_U_AXIS_SIGN, -1.0),
                                              (C.CFG_U_AXIS_MIN_DT, 1e-3)))
    assert st == C.ST_U_AXIS
    assert abs(ys[-1, 1]) < 1e-9


def test_step_limit_status(backends):
    fn = backends["python"]
    cfg = [0.0] * C.NCFG
    st, *_ = fn(C.FIELD_TAU, 1.0, 1.0, 1.0, 0.1, 0.0, 0.0, 1.0, 1e-10, 1e-12,
                25, 1e9, cfg, np.empty((0, 6)))
    assert st == C.ST_STEP_LIMIT


def test_benchmark_smoke(capsys):
    from pldisk.benchmark import main

    assert main(["--repeat", "1"]) == 0
    out = capsys.readouterr().out
    assert "steps/s" in out

import json
import math

import numpy as np
import pytest

import ddsim

SMALL = [
    "trials.min=4",
    "trials.max=4",
    "trials.batch=2",
    "sweep.snr_db=[10]",
]


def test_zak_roundtrip():
    rng = np.random.default_rng(0)
    grid = rng.standard_normal((32, 16)) + 1j * rng.standard_normal((32, 16))
    x = ddsim.idzt(grid)
    assert x.shape == (512,)
    assert np.allclose(ddsim.dzt(x, 32, 16), grid, atol=1e-12)
    assert np.isclose(np.vdot(x, x).real, np.vdot(grid, grid).real, rtol=1e-12)


def test_zak_matches_fft():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    want = np.fft.fft(x.reshape(8, 8, order="F"), axis=1) / math.sqrt(8)
    assert np.allclose(ddsim.dzt(x, 8, 8), want, atol=1e-12)


def test_pulse_values():
    assert ddsim.rc(0.3, 0.22) == pytest.approx(0.8549, abs=1e-4)
    assert ddsim.rc(0.7, 0.22) == pytest.approx(0.3598, abs=1e-4)
    assert ddsim.srrc(0.0, 0.22) == pytest.approx(1 - 0.22 + 4 * 0.22 / math.pi, abs=1e-12)
    g = ddsim.effective_pulse("rc", [0.0, 1.0, 2.0])
    assert g[0] == pytest.approx(1.0, abs=1e-3)
    assert abs(g[1]) < 2e-3 and abs(g[2]) < 2e-3


def test_isi_energy_order():
    assert ddsim.isi_energy("tfl", 0.3) < ddsim.isi_energy("rc", 0.3)


def test_hermite_basis():
    b = ddsim.discrete_hermite(65)
    assert np.allclose(b.T @ b, np.eye(65), atol=1e-10)


def test_config_overrides():
    cfg = json.loads(ddsim.config_json(overrides=["channel.speed_kmh=300"]))
    assert cfg["channel"]["speed_kmh"] == 300
    with pytest.raises(ddsim.InvalidArgument):
        ddsim.config_json(overrides=["modem.M=-4"])


def test_ber_sweep_is_reproducible():
    a = ddsim.ber_snr(overrides=SMALL + ["sweep.csi=[\"perfect\"]"])
    b = ddsim.ber_snr(overrides=SMALL + ["sweep.csi=[\"perfect\"]"])
    assert a["records"] == b["records"]
    assert a["numerical_failures"] == 0
    assert {r["pulse"] for r in a["records"]} == {"rc", "tfl"}
    for r in a["records"]:
        assert 0.0 <= r["mean"] <= 0.5
        assert r["trials"] == 4


def test_results_csv_header():
    text = ddsim.results_csv("nmse-snr", overrides=SMALL + ["pulse.kinds=[\"rc\"]"])
    header = text.splitlines()[0]
    assert header == "sweep_value,metric,mean,stderr,trials,pulse,mode,seed,config_hash"
    with pytest.raises(ddsim.InvalidArgument):
        ddsim.results_csv("nope")

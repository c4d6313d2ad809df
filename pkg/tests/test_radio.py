import math

import numpy as np
import pytest

from tactile_sim.radio import (
    ChannelParams,
    LinkState,
    export_deployment_csv,
    generate_deployment,
    link_distance_km,
    mean_snr_linear,
    path_loss_db,
    rate_per_rb,
    rayleigh_fading_gain,
    shadowing_sample,
    snr_linear,
)


def test_path_loss_reference_points():
    assert path_loss_db(1.0) == 128.1
    assert path_loss_db(0.1) == pytest.approx(90.5, abs=1e-9)
    # oracle: 128.1 + 37.6*log10(0.03), frozen from an independent calculation
    assert path_loss_db(0.03) == pytest.approx(70.8397591774593, abs=1e-9)


def test_path_loss_rejects_nonpositive():
    with pytest.raises(ValueError):
        path_loss_db(0.0)
    with pytest.raises(ValueError):
        path_loss_db(-1.0)


def test_path_loss_strictly_increasing():
    rng = np.random.default_rng(7)
    d = np.sort(rng.uniform(0.001, 2.0, size=200))
    pl = [path_loss_db(float(x)) for x in d]
    assert all(b > a for a, b in zip(pl, pl[1:]))


def test_noise_power_oracle():
    p = ChannelParams()
    # -174 + 10*log10(1.8e5) + 5
    assert p.noise_power_dbm() == pytest.approx(-116.44727494896694, abs=1e-6)


def test_snr_chain_oracle():
    p = ChannelParams()
    link = LinkState(user_id=0, cell_id="macro", distance_km=0.1,
                     shadowing_db=0.0, fading_gain=1.0)
    snr = snr_linear(link, p, tx_kind="macro")
    snr_db = 10.0 * math.log10(snr)
    # 36 - 90.5 + 116.447... frozen oracle
    assert snr_db == pytest.approx(61.947274948966935, abs=1e-6)


def test_snr_zero_fading():
    p = ChannelParams()
    link = LinkState(0, "macro", 0.1, 0.0, fading_gain=0.0)
    assert snr_linear(link, p) == 0.0


def test_snr_db_linear_in_tx_power():
    base = ChannelParams()
    link = LinkState(0, "macro", 0.05, 3.0, fading_gain=0.7)
    ref = 10 * math.log10(snr_linear(link, base))
    for delta in (-10.0, -3.0, 2.5, 12.0):
        p = ChannelParams(tx_power={"macro": 36.0 + delta, "small": 25.0, "user": 18.0})
        got = 10 * math.log10(snr_linear(link, p))
        assert got == pytest.approx(ref + delta, abs=1e-9)


def test_dbm_watt_roundtrip():
    # 10^((dBm-30)/10) W and back
    for dbm in (-116.447, 18.0, 25.0, 36.0):
        watt = 10.0 ** ((dbm - 30.0) / 10.0)
        back = 10.0 * math.log10(watt) + 30.0
        assert back == pytest.approx(dbm, rel=1e-12)


def test_rate_reference_points():
    p = ChannelParams()
    assert rate_per_rb(1.0, p) == pytest.approx(180000.0)
    assert rate_per_rb(0.0, p) == 0.0
    # 1.8e5 * log2(1 + 31.6228), frozen oracle
    assert rate_per_rb(31.6228, p) == pytest.approx(905005.5674592222, rel=1e-9)
    # same at exactly 15 dB
    assert rate_per_rb(10 ** 1.5, p) == pytest.approx(905005.3812030934, rel=1e-9)


def test_rate_rejects_negative_snr():
    with pytest.raises(ValueError):
        rate_per_rb(-0.1, ChannelParams())


def test_rate_increasing_and_concave():
    p = ChannelParams()
    snrs = np.linspace(0.0, 500.0, 300)
    rates = np.array([rate_per_rb(float(s), p) for s in snrs])
    diffs = np.diff(rates)
    assert np.all(diffs > 0)
    assert np.all(np.diff(diffs) < 1e-6)  # non-increasing increments


def test_rate_spectral_efficiency_cap():
    p = ChannelParams(spectral_efficiency_cap=8.0)
    huge = 1e12
    assert rate_per_rb(huge, p) == pytest.approx(8.0 * p.rb_bandwidth)


def test_shadowing_statistics():
    rng = np.random.default_rng(11)
    draws = np.array([shadowing_sample(rng) for _ in range(10**6)])
    assert abs(draws.mean()) < 0.032  # 4 sigma / sqrt(N)
    assert draws.std() == pytest.approx(8.0, abs=0.05)


def test_shadowing_reproducible():
    a = [shadowing_sample(np.random.default_rng(5)) for _ in range(1)]
    b = [shadowing_sample(np.random.default_rng(5)) for _ in range(1)]
    assert a == b


def test_fading_statistics():
    rng = np.random.default_rng(13)
    draws = rng.exponential(1.0, size=10**6)
    assert draws.mean() == pytest.approx(1.0, abs=0.004)
    assert draws.min() >= 0.0
    # median of unit exponential is ln 2
    above = np.mean(draws > math.log(2.0))
    assert above == pytest.approx(0.5, abs=0.002)


def test_fading_scalar_matches_stream():
    rng_a = np.random.default_rng(17)
    rng_b = np.random.default_rng(17)
    assert rayleigh_fading_gain(rng_a) == float(rng_b.exponential(1.0))


def test_deployment_counts_and_bounds():
    rng = np.random.default_rng(3)
    dep = generate_deployment(rng)
    assert len(dep.small_cells) == 4
    assert len(dep.users) == 50
    for (x, y), _ in dep.small_cells:
        assert math.hypot(x, y) <= 100.0
    for x, y in dep.users:
        assert math.hypot(x, y) <= 100.0


def test_deployment_uniform_disc_mean_radius():
    rng = np.random.default_rng(29)
    radii = []
    remaining = 10**6
    while remaining > 0:
        n = min(remaining, 5000)
        dep = generate_deployment(rng, n_small=0, n_users=n)
        pts = np.asarray(dep.users)
        radii.append(np.hypot(pts[:, 0], pts[:, 1]))
        remaining -= n
    mean_r = float(np.concatenate(radii).mean())
    assert mean_r == pytest.approx(200.0 / 3.0, abs=1.0)


def test_deployment_reproducible():
    d1 = generate_deployment(np.random.default_rng(42))
    d2 = generate_deployment(np.random.default_rng(42))
    assert d1 == d2


def test_link_distance_clamped():
    assert link_distance_km((0.0, 0.0), (0.0, 0.0)) == 1e-3
    assert link_distance_km((30.0, 40.0), (0.0, 0.0)) == pytest.approx(0.05)


def test_channel_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(rb_bandwidth=0.0)
    with pytest.raises(ValueError):
        ChannelParams(n_rbs=0)
    with pytest.raises(ValueError):
        ChannelParams(tx_power={"macro": math.inf, "small": 25.0, "user": 18.0})


def test_deployment_csv_export(tmp_path):
    dep = generate_deployment(np.random.default_rng(1), n_small=2, n_users=3)
    out = tmp_path / "dep.csv"
    export_deployment_csv(dep, str(out))
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "entity,x,y,radius"
    assert len(lines) == 1 + 1 + 2 + 3
    assert lines[1].startswith("macro,")


def test_mean_snr_is_unit_fading_snr():
    p = ChannelParams()
    link = LinkState(4, "small0", 0.02, -2.5, fading_gain=1.0)
    assert mean_snr_linear(link, p, "small") == pytest.approx(
        snr_linear(link, p, "small"), rel=1e-12)

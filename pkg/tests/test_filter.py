import math

import numpy as np
import pytest
from scipy.stats import chi2

from inekf_gps import sim
from inekf_gps.config import FilterConfig, GpsNoise, ImuNoise, NoiseParams, Scenario
from inekf_gps.errors import FilterDivergence, GapTooLarge
from inekf_gps.filter import EnuFix, fixes_to_enu, gps_track, run_filter
from inekf_gps.heading import EnuOrigin
from inekf_gps.propagation import ImuSample
from inekf_gps.state import is_healthy_covariance

QUIET = dict(gyro=0.0, accel=0.0, gyro_bias=0.0, accel_bias=0.0)


def _scenario(**kw):
    kw.setdefault("duration", 20.0)
    return Scenario(**kw)


def _streams(sc):
    tr, imu, gps = sim.simulate(sc)
    origin = EnuOrigin(sc.origin.lat, sc.origin.lon, sc.origin.alt)
    _, fixes = fixes_to_enu(gps, origin)
    return tr, imu, fixes


def _init_kw(tr):
    return dict(init_yaw=float(tr.yaw[0]), init_velocity=tr.v[0])


def test_empty_gps_is_dead_reckoning():
    tr, imu, _ = _streams(_scenario(kind="line"))
    res = run_filter(imu, [], FilterConfig(), init_position=tr.p[0], **_init_kw(tr))
    assert res.counters.fixes_read == 0
    assert res.counters.warnings == ["no GPS fixes: dead reckoning only"]
    assert len(res.t) == len(imu)
    assert np.all(np.isfinite(res.p))


def test_loitering_below_speed_gate():
    sc = _scenario(kind="circle", speed=0.1, size=5.0, gps_noise=GpsNoise([0.05] * 3))
    tr, imu, fixes = _streams(sc)
    res = run_filter(imu, fixes, FilterConfig(), **_init_kw(tr))
    assert res.counters.heading_refs_emitted == 0
    assert res.counters.pose_updates == 0
    assert res.counters.position_updates == len(fixes) - 1
    assert all(not r.valid for r in res.heading_refs)


def test_single_fix():
    tr, imu, fixes = _streams(_scenario(kind="line"))
    res = run_filter(imu, fixes[5:6], FilterConfig(), init_position=tr.p[0], **_init_kw(tr))
    assert res.counters.fixes_used == 1
    assert res.counters.heading_refs_emitted == 0
    assert np.all(np.isfinite(res.p)) and np.all(np.isfinite(res.R))


def test_zero_noise_pipeline_tracks_truth():
    # perfect fixes (the filter is told 1 cm so S stays well conditioned)
    sc = _scenario(kind="circle", imu_noise=ImuNoise(**QUIET), gps_noise=GpsNoise([1e-300] * 3))
    tr, imu, fixes = _streams(sc)
    for f in fixes:
        f.sigma = np.full(3, 0.01)
    cfg = FilterConfig(noise=NoiseParams(1e-6, 1e-6, 1e-9, 1e-9))
    res = run_filter(imu, fixes, cfg, **_init_kw(tr))
    assert res.counters.pose_updates > 0
    assert np.max(np.linalg.norm(res.p - tr.p, axis=1)) < 1e-3
    yaw_err = np.vectorize(lambda a: math.remainder(a, 2 * math.pi))(res.trajectory().yaw - tr.yaw)
    assert np.max(np.abs(yaw_err)) < 1e-5


def test_counters_reconcile_and_drop_rule():
    tr, imu, fixes = _streams(_scenario(kind="line", duration=5.0))
    early = EnuFix(-10.0, np.zeros(3), np.full(3, 0.3))
    late = EnuFix(tr.t[-1] + 1.0, np.zeros(3), np.full(3, 0.3))
    res = run_filter(imu, [early, *fixes, late], FilterConfig(), **_init_kw(tr))
    c = res.counters
    assert c.fixes_read == len(fixes) + 2
    assert c.fixes_dropped == 2
    assert c.fixes_used + c.fixes_dropped == c.fixes_read
    # the early fix is too old to seed the state, so every used fix is an update
    assert c.position_updates + c.pose_updates == c.fixes_used


def test_merge_order_ties_go_to_imu():
    t = np.arange(0, 11) * 0.01
    imu = [ImuSample(float(tk), np.zeros(3), np.array([0, 0, 9.81])) for tk in t]
    fixes = [EnuFix(0.05, np.zeros(3), np.ones(3)), EnuFix(0.073, np.zeros(3), np.ones(3))]
    log = []
    run_filter(imu, fixes, FilterConfig(), init_position=np.zeros(3),
               observer=lambda kind, f: log.append((kind, round(f.state.t, 6))))
    updates = [(i, e) for i, e in enumerate(log) if e[0] != "predict"]
    # the tied fix follows the prediction to 0.05; the 0.073 fix follows 0.07
    assert log[updates[0][0] - 1] == ("predict", 0.05)
    assert log[updates[1][0] - 1] == ("predict", 0.07)


def test_first_fix_initializes_position():
    tr, imu, fixes = _streams(_scenario(kind="line"))
    res = run_filter(imu, fixes, FilterConfig(), **_init_kw(tr))
    assert np.allclose(res.p[0], fixes[0].p)


def test_non_monotonic_gps_rejected():
    tr, imu, fixes = _streams(_scenario(kind="line", duration=3.0))
    fixes[3], fixes[4] = fixes[4], fixes[3]
    with pytest.raises(ValueError):
        run_filter(imu, fixes, FilterConfig())


def test_imu_gap_reports_index():
    imu = [ImuSample(t, np.zeros(3), np.array([0, 0, 9.81])) for t in (0.0, 0.01, 0.02, 0.5)]
    with pytest.raises(GapTooLarge, match="IMU sample 3"):
        run_filter(imu, [], FilterConfig())


def test_divergence_detected():
    imu = [ImuSample(k * 0.01, np.zeros(3), np.array([0, 0, 9.81])) for k in range(5)]
    imu[3] = ImuSample(0.03, np.zeros(3), np.array([np.inf, 0, 9.81]))
    with pytest.raises(FilterDivergence):
        run_filter(imu, [], FilterConfig())


@pytest.mark.parametrize("gain_mode", ["kalman", "wls"])
@pytest.mark.parametrize("heading_mode", ["cog_composed", "imu_raw"])
def test_modes_run(gain_mode, heading_mode):
    tr, imu, fixes = _streams(_scenario(kind="figure_eight", gps_noise=GpsNoise([0.05] * 3)))
    cfg = FilterConfig.from_dict({"gain_mode": gain_mode, "heading": {"mode": heading_mode}})
    res = run_filter(imu, fixes, cfg, **_init_kw(tr))
    assert res.counters.pose_updates > 0
    assert np.all(np.isfinite(res.p))
    assert is_healthy_covariance(res.final_P)


def test_nis_consistency_position_only():
    # matched noise; heading references disabled so every update is a 3-dof fix
    noise = dict(gyro=1e-3, accel=1e-2, gyro_bias=1e-5, accel_bias=1e-4)
    sc = Scenario(kind="figure_eight", duration=120.0, seed=4, imu_noise=ImuNoise(**noise),
                  gps_noise=GpsNoise([0.5] * 3))
    tr, imu, fixes = _streams(sc)
    cfg = FilterConfig.from_dict({"noise": noise, "heading": {"v_min": 1e6},
                                  "initial": {"sigma_pos": 0.5, "sigma_vel": 0.2, "sigma_accel_bias": 0.01}})
    res = run_filter(imu, fixes, cfg, **_init_kw(tr))
    nis = np.array([u.nis for u in res.updates if u.t >= 20.0])
    assert all(u.dof == 3 for u in res.updates)
    lo, hi = chi2.ppf([0.025, 0.975], 3)
    inside = np.mean((nis >= lo) & (nis <= hi))
    assert inside >= 0.90
    assert np.mean(nis) == pytest.approx(3.0, rel=0.15)


def test_gps_track_has_no_orientation():
    fixes = [EnuFix(0.0, np.zeros(3), np.ones(3)), EnuFix(0.2, np.ones(3), np.ones(3))]
    tr = gps_track(fixes)
    assert np.all(np.isnan(tr.R)) and np.array_equal(tr.p[1], np.ones(3))


def test_fixes_to_enu_anchors_at_first():
    from inekf_gps.correction import GpsFix

    fixes = [GpsFix(0.0, 42.0, -83.0, 200.0, [1, 1, 1]), GpsFix(1.0, 42.0001, -83.0, 201.0, [1, 1, 1])]
    origin, enu = fixes_to_enu(fixes)
    assert origin == EnuOrigin(42.0, -83.0, 200.0)
    assert np.array_equal(enu[0].p, np.zeros(3))
    assert enu[1].p[1] > 11.0 and enu[1].p[2] == pytest.approx(1.0)

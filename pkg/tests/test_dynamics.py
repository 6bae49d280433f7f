import cmath
import csv
import math

import numpy as np
import pytest

from qhsynth.cnum import max_norm, unitarity_residual
from qhsynth.dynamics import (
    PropagatorTrace,
    SimConfig,
    analytic_step_propagator,
    ancilla_frame,
    coupling_scale,
    hamiltonian,
    peak_ancilla_population,
    propagate_step,
    simulate_schedule,
    window_duration,
)
from qhsynth.errors import IntegratorError, InvalidInputError, UnsupportedRegimeError
from qhsynth.gates import qft_fixture, qft_matrix
from qhsynth.pulse import (
    PulseSchedule,
    PulseStep,
    factor_to_resonant_pulse,
    factor_to_rz_pulse,
    rz_phase,
    schedule_from_decomposition,
)
from qhsynth.qhr import HouseholderFactor, reflection_matrix

from conftest import random_unit_vector


def random_step(rng, n, **kw):
    return factor_to_resonant_pulse(HouseholderFactor(random_unit_vector(rng, n)), **kw)


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs", [{"dt": 0.0}, {"window_half_width": 2.0}, {"record_stride": 0}]
    )
    def test_rejects(self, kwargs):
        with pytest.raises(InvalidInputError):
            SimConfig(**kwargs)


class TestHamiltonian:
    def test_peak_single_coupling(self):
        h = hamiltonian(PulseStep((2.0,), (0.0,)), 0.0)
        assert np.array_equal(h, np.array([[0, 1], [1, 0]]))

    def test_tail(self):
        step = PulseStep((2.0, 1.0), (0.3, 1.0), tau=4.0)
        h = hamiltonian(step, 24.0)
        assert np.max(np.abs(h[:2, 2])) < 1e-8 * step.rms_chi

    def test_structure(self, rng):
        for n in range(1, 6):
            step = PulseStep(
                tuple(rng.uniform(0, 2, n)), tuple(rng.uniform(-3, 3, n)), delta0=rng.normal()
            )
            h = hamiltonian(step, rng.normal())
            assert np.array_equal(h, h.conj().T)
            assert np.all(h[:n, :n] == 0)
            assert h[n, n] == step.delta0


class TestPropagateStep:
    def test_zero_coupling(self):
        step = PulseStep((0.0, 0.0), (0.0, 0.0), delta0=0.7)
        u = propagate_step(step)
        w = window_duration(step)
        assert max_norm(u - np.diag([1, 1, cmath.exp(-0.7j * w)])) < 1e-10

    def test_hadamard(self):
        step = factor_to_resonant_pulse(qft_fixture(2).generalized.factors[0])
        u = propagate_step(step)
        assert max_norm(u[:2, :2] - qft_matrix(2)) < 1e-6
        assert abs(u[2, 2] + 1) < 1e-6

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_matches_analytic(self, rng, n):
        step = random_step(rng, n, T=rng.uniform(0.5, 2.0), k=int(rng.integers(0, 2)))
        u = propagate_step(step)
        assert max_norm(u - analytic_step_propagator(step)) < 1e-6
        assert unitarity_residual(u) < 1e-8

    def test_arbitrary_area_matches_analytic(self, rng):
        step = PulseStep((0.8, 0.4, 0.3), (0.2, -1.0, 2.5))
        assert max_norm(propagate_step(step) - analytic_step_propagator(step)) < 1e-6

    def test_dt_convergence(self, rng):
        step = random_step(rng, 3)
        u1 = propagate_step(step, SimConfig(dt=1 / 200))
        u2 = propagate_step(step, SimConfig(dt=1 / 400))
        assert max_norm(u1 - u2) < 1e-8

    def test_renormalization_matters(self, rng):
        step = random_step(rng, 2)
        plain = propagate_step(step, SimConfig(renormalize_area=False))
        exact = analytic_step_propagator(step)
        assert max_norm(plain - exact) > 1e-5
        assert max_norm(propagate_step(step) - exact) < 1e-9

    def test_rz_corner(self):
        f = HouseholderFactor(random_unit_vector(np.random.default_rng(3), 3), math.pi / 2)
        step = factor_to_rz_pulse(f)
        cfg = SimConfig()
        u = ancilla_frame(propagate_step(step, cfg), step.delta0, window_duration(step, cfg))
        phi = rz_phase(step.delta0 * step.T, 1)
        assert abs(u[3, 3] - cmath.exp(-1j * phi)) < 1e-5
        assert max_norm(u[:3, :3] - reflection_matrix(f)) < 1e-4

    def test_integrator_failure(self):
        step = PulseStep((40.0,), (0.0,))
        with pytest.raises(IntegratorError, match="dt"):
            propagate_step(step, SimConfig(dt=0.5))

    def test_scale_only_for_resonant(self):
        cfg = SimConfig(window_half_width=5)
        assert coupling_scale(PulseStep((2.0,), (0.0,)), cfg) > 1.0
        assert coupling_scale(PulseStep((2.0,), (0.0,), delta0=1.0), cfg) == 1.0


class TestAnalytic:
    def test_standard_reflection(self, rng):
        v = random_unit_vector(rng, 4)
        step = factor_to_resonant_pulse(HouseholderFactor(v))
        u = analytic_step_propagator(step)
        assert max_norm(u[:4, :4] - (np.eye(4) - 2 * np.outer(v, v.conj()))) < 1e-12
        assert u[4, 4] == pytest.approx(-1)
        assert max_norm(u[:4, 4]) < 1e-15 and max_norm(u[4, :4]) < 1e-15

    def test_quarter_phase(self, rng):
        v = random_unit_vector(rng, 3)
        step = factor_to_rz_pulse(HouseholderFactor(v, math.pi / 2))
        u = analytic_step_propagator(step)
        expected = np.eye(3) + (1j - 1) * np.outer(v, v.conj())
        assert max_norm(u[:3, :3] - expected) < 1e-12
        assert abs(u[3, 3] + 1j) < 1e-12

    @pytest.mark.parametrize("beta", [0.0, 0.9, -2.4])
    def test_half_cycle_transfer(self, beta):
        u = analytic_step_propagator(PulseStep((1.0,), (beta,)))
        z = cmath.exp(1j * beta)
        assert max_norm(u - np.array([[0, -1j * z], [-1j * z.conjugate(), 0]])) < 1e-15

    def test_unknown_b_phase(self):
        with pytest.raises(UnsupportedRegimeError):
            analytic_step_propagator(PulseStep((1.3,), (0.0,), delta0=0.5))

    def test_zero_coupling(self):
        assert np.array_equal(analytic_step_propagator(PulseStep((0.0, 0.0), (0.0, 0.0))), np.eye(3))


def fixture_schedule(n):
    return schedule_from_decomposition(qft_fixture(n).generalized).schedule


class TestSimulate:
    def test_empty_schedule(self):
        trace = simulate_schedule(PulseSchedule((), dim=3), np.eye(3))
        assert np.all(trace.deviation == 0)
        assert peak_ancilla_population(trace) == 0

    @pytest.mark.filterwarnings("ignore:pulse spacing")
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_qft_endpoint(self, n):
        trace = simulate_schedule(fixture_schedule(n), qft_matrix(n))
        assert trace.final_deviation < 1e-2
        assert np.all(trace.deviation >= 0)
        assert np.all(trace.ancilla_population <= 1 + 1e-9)
        tail = trace.deviation[trace.times >= trace.times[-1] - 2.0]
        assert np.all(np.diff(tail) <= 0)

    @pytest.mark.filterwarnings("ignore:pulse spacing")
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_wider_window_is_more_accurate(self, n):
        s = fixture_schedule(n)
        narrow = simulate_schedule(s, qft_matrix(n), SimConfig(window_half_width=5))
        wide = simulate_schedule(s, qft_matrix(n), SimConfig(window_half_width=10))
        assert wide.final_deviation < narrow.final_deviation

    def test_standard_schedule_with_gate(self):
        s = schedule_from_decomposition(qft_fixture(3).standard).schedule
        assert s.abstract_gate is not None
        with pytest.warns(UserWarning):
            trace = simulate_schedule(s, qft_matrix(3))
        assert trace.final_deviation < 1e-2

    def test_unitarity_along_trace(self, rng):
        step = random_step(rng, 3)
        cfg = SimConfig(record_stride=50)
        trace = simulate_schedule(PulseSchedule((step,)), np.eye(3), cfg)
        assert unitarity_residual(trace.full_propagator) < 1e-8
        assert len(trace.times) == 1 + 4000 // 50

    def test_rabi_oracle(self):
        # population reaching the ancilla from |n> is |v_n|^2 sin^2(A(t)/2)
        f = qft_fixture(2).generalized.factors[0]
        step = factor_to_resonant_pulse(f, tau=-5.0)
        cfg = SimConfig(record_stride=1)
        trace = simulate_schedule(PulseSchedule((step,)), qft_matrix(2), cfg)
        w = cfg.window_half_width
        scale = coupling_scale(step, cfg)
        x = trace.times - step.tau
        area = scale * step.rms_chi * 2 * (np.arctan(np.tanh(x / 2)) - math.atan(math.tanh(-w / 2)))
        oracle = np.max(np.abs(f.v) ** 2) * np.sin(area / 2) ** 2
        assert np.max(np.abs(trace.ancilla_population - oracle)) < 1e-8
        assert peak_ancilla_population(trace) > 0.85

    def test_detuning_lowers_peak(self):
        v = qft_fixture(2).generalized.factors[0].v
        peaks = []
        for delta_t in (0.5, 1, 2, 4, 8):
            step = PulseStep(tuple(2 * np.abs(v)), tuple(np.angle(v)), delta0=delta_t)
            trace = simulate_schedule(PulseSchedule((step,)), np.eye(2), SimConfig(record_stride=1))
            peaks.append(peak_ancilla_population(trace))
        assert all(b < a for a, b in zip(peaks, peaks[1:]))

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            simulate_schedule(fixture_schedule(3), np.eye(4))

    def test_empty_trace(self):
        empty = PropagatorTrace(np.array([]), np.array([]), np.array([]), np.eye(1))
        with pytest.raises(InvalidInputError):
            peak_ancilla_population(empty)

    def test_csv(self, tmp_path):
        trace = simulate_schedule(fixture_schedule(2), qft_matrix(2))
        path = tmp_path / "trace.csv"
        trace.write_csv(path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "deviation", "ancilla_pop"]
        assert len(rows) == len(trace.times) + 1
        assert float(rows[-1][1]) == trace.final_deviation
        first = open(path, "rb").read()
        trace.write_csv(path)
        assert open(path, "rb").read() == first

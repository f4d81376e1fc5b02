import numpy as np
import pytest

from alfven.domain import DomainSpec, WeightParams
from alfven.errors import BlowupDetected, DomainExhaustion
from alfven import spectral as sp
from alfven.diagnostics import conserved_quantities
from alfven.solver import FieldCache, StepperConfig, advance, compute_rhs, step
from alfven.state import ElsasserState, make_random_solenoidal, state_from_packets


def one_sided_state(domain, weights, species="plus", amp=0.05, run_distance=2.0):
    center = 1.0 if species == "plus" else -1.0
    return state_from_packets(
        domain,
        weights,
        [{"species": species, "center": [0, 0, center], "widths": [1.5, 1.5, 0.8],
          "amplitude": amp, "polarization_seed": 1}],
        run_distance=run_distance,
    )


def test_rhs_reduces_to_transport_when_minus_vanishes(domain, weights):
    s = one_sided_state(domain, weights, "plus")
    dzp, dzm = compute_rhs(s)
    ik3 = (1j * domain.kd[2]).reshape(1, 1, 1, -1)
    expected = ik3 * s.z_plus.c
    scale = np.max(np.abs(expected))
    assert np.max(np.abs(dzp.c - expected)) <= 1e-14 * scale
    assert np.max(np.abs(dzm.c)) == 0.0


def test_rhs_symmetric_case(domain, weights):
    s = one_sided_state(domain, weights, "minus")
    dzp, dzm = compute_rhs(s)
    ik3 = (1j * domain.kd[2]).reshape(1, 1, 1, -1)
    expected = -ik3 * s.z_minus.c
    assert np.max(np.abs(dzm.c - expected)) <= 1e-14 * np.max(np.abs(expected))
    assert np.max(np.abs(dzp.c)) == 0.0


def test_rhs_zero_state(domain, weights):
    s = ElsasserState.zero(domain, weights)
    dzp, dzm = compute_rhs(s)
    assert np.max(np.abs(dzp.c)) == 0.0
    assert np.max(np.abs(dzm.c)) == 0.0


def test_semidiscrete_energy_conservation(domain, weights):
    # brute force: d/dt of the quadrature under the discrete RHS
    s = state_from_packets(
        domain,
        weights,
        [{"species": "plus", "center": [0, 0, 0.7], "widths": [1.5, 1.5, 0.8],
          "amplitude": 0.3, "polarization_seed": 1},
         {"species": "minus", "center": [0, 0, -0.7], "widths": [1.5, 1.5, 0.8],
          "amplitude": 0.3, "polarization_seed": 2}],
    )
    dzp, dzm = compute_rhs(s)
    V = domain.volume
    dE = 2 * V * float(
        np.sum(np.real(np.conj(s.z_plus.c) * dzp.c))
        + np.sum(np.real(np.conj(s.z_minus.c) * dzm.c))
    )
    dX = 2 * V * float(
        np.sum(np.real(np.conj(s.z_plus.c) * dzp.c))
        - np.sum(np.real(np.conj(s.z_minus.c) * dzm.c))
    )
    e0, _ = conserved_quantities(s)
    assert abs(dE) <= 1e-13 * e0
    assert abs(dX) <= 1e-13 * e0


def test_one_sided_transport_exact(domain, weights):
    s0 = one_sided_state(domain, weights, "plus", run_distance=2.0)
    sT = advance(s0.copy(), StepperConfig(dt=0.05, t_end=2.0), [])
    expect = sp.sample_shifted(s0.z_plus, 2.0)
    assert np.max(np.abs(sp.to_physical(sT.z_plus) - expect)) <= 1e-10
    assert np.max(np.abs(sT.z_minus.c)) == 0.0


def test_zero_state_stays_zero(domain, weights):
    s = advance(ElsasserState.zero(domain, weights), StepperConfig(dt=0.1, t_end=1.0), [])
    assert np.max(np.abs(s.z_plus.c)) == 0.0
    assert np.max(np.abs(s.z_minus.c)) == 0.0


def test_forward_backward_recovery(domain, weights):
    s0 = state_from_packets(
        domain,
        weights,
        [{"species": "plus", "center": [0, 0, 0.6], "widths": [1.5, 1.5, 0.8],
          "amplitude": 0.05, "polarization_seed": 1},
         {"species": "minus", "center": [0, 0, -0.6], "widths": [1.5, 1.5, 0.8],
          "amplitude": 0.05, "polarization_seed": 2}],
        run_distance=2.0,
    )
    sT = advance(s0.copy(), StepperConfig(dt=0.02, t_end=2.0), [])
    back = advance(sT, StepperConfig(dt=0.02, t_end=0.0, direction="backward"), [])
    err = max(
        np.max(np.abs(sp.to_physical(back.z_plus) - sp.to_physical(s0.z_plus))),
        np.max(np.abs(sp.to_physical(back.z_minus) - sp.to_physical(s0.z_minus))),
    )
    assert err <= 1e-8


def test_divergence_preserved_every_step(domain, weights):
    s = state_from_packets(
        domain,
        weights,
        [{"species": "plus", "center": [0, 0, 0.5], "widths": [1.5, 1.5, 0.8],
          "amplitude": 0.2, "polarization_seed": 4},
         {"species": "minus", "center": [0, 0, -0.5], "widths": [1.5, 1.5, 0.8],
          "amplitude": 0.2, "polarization_seed": 5}],
        run_distance=1.0,
    )
    for _ in range(10):
        s = step(s, 0.05)
        assert sp.divergence_inf_norm(s.z_plus) <= 1e-12
        assert sp.divergence_inf_norm(s.z_minus) <= 1e-12


def test_advance_identity_run(domain, weights):
    calls = []

    class Obs:
        def sample(self, cache, istep, is_final=False):
            calls.append(istep)

    s0 = ElsasserState.zero(domain, weights)
    advance(s0, StepperConfig(dt=0.1, t_end=0.0), [Obs()])
    assert calls == [0]


def test_advance_observer_count(domain, weights):
    calls = []

    class Obs:
        def sample(self, cache, istep, is_final=False):
            calls.append(istep)

    s0 = one_sided_state(domain, weights, run_distance=0.5)
    advance(s0, StepperConfig(dt=0.05, t_end=0.5, record_every=1), [Obs()])
    assert len(calls) == 11  # N + 1 samples for N = 10 steps


def test_observers_do_not_affect_the_run(domain, weights):
    from alfven.diagnostics import DiagnosticsRecorder, DivergenceWatch

    def run(observers):
        s0 = state_from_packets(
            domain,
            weights,
            [{"species": "plus", "center": [0, 0, 0.5], "widths": [1.5, 1.5, 0.8],
              "amplitude": 0.05, "polarization_seed": 1},
             {"species": "minus", "center": [0, 0, -0.5], "widths": [1.5, 1.5, 0.8],
              "amplitude": 0.05, "polarization_seed": 2}],
            run_distance=1.0,
        )
        return advance(s0, StepperConfig(dt=0.05, t_end=1.0), observers)

    a = run([DiagnosticsRecorder(kmax=0, every=5), DivergenceWatch()])
    b = run([DivergenceWatch(), DiagnosticsRecorder(kmax=0, every=5)])
    c = run([])
    assert np.array_equal(a.z_plus.c, b.z_plus.c)
    assert np.array_equal(a.z_plus.c, c.z_plus.c)
    assert np.array_equal(a.z_minus.c, c.z_minus.c)


def test_blowup_detection(domain, weights):
    s = one_sided_state(domain, weights, amp=0.05, run_distance=1.0)
    with pytest.raises(BlowupDetected):
        step(s, 0.05, blowup_cap=0.01)


def test_domain_exhaustion(domain, weights):
    # packet fits statically but the requested step pushes it into the wall
    s = one_sided_state(domain, weights, amp=0.05, run_distance=0.0)
    with pytest.raises(DomainExhaustion):
        for _ in range(200):
            s = step(s, 0.05)


def test_stepper_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(dt=-0.1, t_end=1.0)
    with pytest.raises(ValueError):
        StepperConfig(dt=0.1, t_end=1.0, cfl=1.5)
    with pytest.raises(ValueError):
        StepperConfig(dt=0.1, t_end=1.0, direction="sideways")


def test_effective_dt_cfl_clamp(domain, weights):
    s = one_sided_state(domain, weights, amp=1.0, run_distance=0.5)
    cfg = StepperConfig(dt=10.0, t_end=0.5, cfl=0.5)
    dt_eff, nsteps = cfg.plan(s)
    h_min = min(domain.h)
    assert dt_eff <= cfg.cfl * h_min / (1.0 + s.max_amplitude()) + 1e-12
    assert nsteps * dt_eff == pytest.approx(0.5)


def test_dt_order_of_accuracy(dt_order_result):
    e1, e2 = dt_order_result
    assert e1 / e2 >= 12.0

import math

import numpy as np
import pytest

from telesim import experiment, fock, optics
from telesim.detection import ZeroProbabilityError
from telesim.experiment import Scenario, SetupConfig

def test_config_validation():
    with pytest.raises(ValueError):
        SetupConfig(coupling_1=1.0)
    with pytest.raises(ValueError):
        SetupConfig(cutoff=3)
    with pytest.raises(ValueError):
        SetupConfig(efficiency_p=1.5)
    with pytest.raises(ValueError):
        Scenario("fivefold")


def test_default_bench_has_nine_modes():
    apparatus = experiment.build_circuit(SetupConfig())
    beams = {m.beam for m in apparatus.space.modes}
    assert beams == {1, 2, 3, 4, "loss_prep"}
    assert len(apparatus.space.modes) == 9
    assert len(apparatus.loss_modes) == 1


def test_circuit_conserves_photon_number():
    # Exhaustive check over the whole cutoff-4 basis.
    apparatus = experiment.build_circuit(SetupConfig(cutoff=4))
    space = apparatus.space
    for i in range(space.dim):
        out = optics.apply_circuit(fock.StateVector(space, {i: 1.0 + 0.0j}), apparatus.transforms)
        n_in = space.totals[i]
        assert all(space.totals[j] == n_in for j in out.amps)


def test_dark_bench_has_zero_probability_patterns():
    cfg = SetupConfig(coupling_1=0.0, coupling_2=0.0)
    with pytest.raises(ZeroProbabilityError):
        experiment.run_scenario(cfg, Scenario("threefold"))


def test_threefold_is_half_vacuum_half_signal(threefold_base):
    assert threefold_base.fidelity == pytest.approx(0.5, abs=0.01)
    assert threefold_base.vacuum_weight == pytest.approx(0.5, abs=0.01)
    total = (
        threefold_base.vacuum_weight
        + threefold_base.single_photon_weight
        + threefold_base.multi_photon_weight
    )
    assert total == pytest.approx(1.0, abs=1e-10)


def test_fourfold_reaches_high_fidelity():
    result = experiment.run_scenario(SetupConfig(), Scenario("fourfold"))
    assert result.fidelity >= 0.99
    assert result.vacuum_weight == pytest.approx(0.0, abs=1e-12)


def test_number_resolved_heralding_removes_vacuum():
    result = experiment.run_scenario(SetupConfig(), Scenario("threefold_number_resolved_p"))
    assert result.fidelity >= 0.99


def test_threefold_leading_order_is_one_half(threefold_lo):
    lo, _ = threefold_lo
    assert lo.fidelity == pytest.approx(0.5, abs=1e-4)
    assert lo.vacuum_weight == pytest.approx(0.5, abs=1e-4)


def test_fourfold_leading_order_is_one(fourfold_lo):
    lo, _ = fourfold_lo
    assert lo.fidelity == pytest.approx(1.0, abs=1e-4)


def test_qnd_leading_order_is_one():
    lo, _ = experiment.leading_order(SetupConfig(), Scenario("threefold_qnd_bob"))
    assert lo.fidelity == pytest.approx(1.0, abs=1e-4)


def test_threefold_probability_scales_as_fourth_power(threefold_lo):
    lo, _ = threefold_lo
    assert lo.probability_exponent == pytest.approx(4.0, abs=0.05)


def test_threefold_mixture_eigenstructure(threefold_base):
    pairs = fock.eigendecompose(threefold_base.rho3)
    values = [v for v, _ in pairs]
    assert values[0] == pytest.approx(0.5, abs=1e-3)
    assert values[1] == pytest.approx(0.5, abs=1e-3)
    space = threefold_base.rho3.space
    vacuum = fock.vacuum(space)
    phi = fock.polarized_photon(space, 3, math.pi / 4)
    top_two = [s for _, s in pairs[:2]]
    overlaps = sorted(
        (max(abs(s.dot(vacuum)) ** 2, abs(s.dot(phi)) ** 2) for s in top_two), reverse=True
    )
    assert all(o >= 1.0 - 1e-6 for o in overlaps)


def test_fourfold_output_is_nearly_pure():
    result = experiment.run_scenario(SetupConfig(), Scenario("fourfold"))
    purity = float(np.real(np.trace(result.rho3.matrix @ result.rho3.matrix)))
    assert purity >= 0.995


def test_fidelity_is_convention_phase_independent():
    values = []
    for phase in (0.0, math.pi / 3, 2 * math.pi / 3, math.pi, 4.5):
        cfg = SetupConfig(bs_phase=phase)
        values.append(experiment.run_scenario(cfg, Scenario("threefold")).fidelity)
    assert max(values) - min(values) <= 1e-8


def test_cascade_fidelity_increases_with_stages():
    values = []
    for stages in (1, 2, 4):
        result = experiment.run_scenario(SetupConfig(), Scenario("threefold_cascade_p", stages=stages))
        values.append(result.fidelity)
    assert values[0] < values[1] < values[2]
    assert values[0] == pytest.approx(0.5, abs=0.01)
    assert values[1] == pytest.approx(2 / 3, abs=0.01)
    assert values[2] == pytest.approx(4 / 5, abs=0.01)


def test_alternative_preparation_leaves_more_vacuum():
    # Without the beam-1 polarizer both photons of a double-pair emission can
    # reach the splitter, doubling the vacuum class: F -> 1/3, not 1/2.
    cfg = SetupConfig(preparation="analyzer_before_p")
    lo, _ = experiment.leading_order(cfg, Scenario("threefold"))
    assert lo.fidelity == pytest.approx(1 / 3, abs=1e-6)
    assert lo.vacuum_weight == pytest.approx(2 / 3, abs=1e-6)


def test_same_physical_input_gives_identical_fidelity():
    a = experiment.run_scenario(SetupConfig(input_angle=0.0), Scenario("threefold"))
    b = experiment.run_scenario(SetupConfig(input_angle=math.pi), Scenario("threefold"))
    assert a.fidelity == pytest.approx(b.fidelity, abs=1e-12)


def test_bob_analyzer_angle_does_not_change_fourfold_fidelity():
    base = experiment.run_scenario(SetupConfig(), Scenario("fourfold"))
    rotated = experiment.run_scenario(
        SetupConfig(bob_analyzer_angle=0.6), Scenario("fourfold")
    )
    assert rotated.fidelity == pytest.approx(base.fidelity, abs=1e-9)


def test_ratio_sweep_monotone_with_half_at_unity():
    rows = experiment.coupling_ratio_sweep(SetupConfig(), [1.0, 2.0, 10.0])
    assert rows[0].fidelity == pytest.approx(0.5, abs=1e-3)
    assert rows[0].fidelity < rows[1].fidelity < rows[2].fidelity
    assert rows[2].fidelity >= 0.95


def test_leading_order_requires_three_couplings():
    with pytest.raises(ValueError):
        experiment.leading_order(SetupConfig(), Scenario("threefold"), couplings=[0.02, 0.01])


def test_input_independence_needs_four_angles():
    with pytest.raises(ValueError):
        experiment.input_independence_check(SetupConfig(), Scenario("threefold"), [0.0, 0.1])


def test_detector_loss_reduces_probability_not_fidelity():
    lossy = SetupConfig(efficiency_f1=0.8, efficiency_f2=0.8)
    ideal = experiment.run_scenario(SetupConfig(), Scenario("threefold"))
    result = experiment.run_scenario(lossy, Scenario("threefold"))
    assert result.probability < ideal.probability
    # Loss at the Bell detectors does not change what reaches the receiver.
    assert result.fidelity == pytest.approx(ideal.fidelity, abs=5e-3)

import numpy as np
import pytest

from telesim import experiment, oracle
from telesim.experiment import Scenario, SetupConfig
from telesim.fock import Mode

SCENARIOS = [
    Scenario("threefold"),
    Scenario("fourfold"),
    Scenario("threefold_number_resolved_p"),
    Scenario("threefold_cascade_p", stages=2),
    Scenario("threefold_cascade_p", stages=4),
    Scenario("threefold_qnd_bob"),
]


def test_oracle_basis_is_graded():
    basis = oracle.Basis((Mode(1, "H"), Mode(1, "V")), 3)
    totals = [sum(o) for o in basis.occs]
    assert totals == sorted(totals)
    assert basis.occs[0] == (0, 0)


def test_oracle_ladder_operators():
    basis = oracle.Basis((Mode(1, "H"),), 3)
    a_dag = basis.creation(Mode(1, "H")).toarray()
    one = basis.index[(1,)]
    two = basis.index[(2,)]
    assert a_dag[one, basis.index[(0,)]] == pytest.approx(1.0)
    assert a_dag[two, one] == pytest.approx(np.sqrt(2.0))


@pytest.mark.parametrize("scenario", SCENARIOS, ids=lambda s: s.label)
def test_pipeline_matches_oracle_at_cutoff_four(scenario):
    config = SetupConfig(coupling_1=0.05, coupling_2=0.05, cutoff=4)
    main = experiment.run_scenario(config, scenario)
    ref = oracle.run_scenario(config, scenario)
    deviations = oracle.compare(main, ref)
    assert max(deviations.values()) <= 1e-10, deviations


def test_threefold_probability_matches_oracle_exactly():
    config = SetupConfig(coupling_1=0.05, coupling_2=0.05, cutoff=6)
    main = experiment.run_scenario(config, Scenario("threefold"))
    ref = oracle.run_scenario(config, Scenario("threefold"))
    assert abs(main.probability - ref.probability) <= 1e-10


def test_alternative_preparation_matches_oracle():
    config = SetupConfig(coupling_1=0.05, coupling_2=0.05, cutoff=4, preparation="analyzer_before_p")
    main = experiment.run_scenario(config, Scenario("threefold"))
    ref = oracle.run_scenario(config, Scenario("threefold"))
    assert max(oracle.compare(main, ref).values()) <= 1e-10


def test_rotated_receiver_analyzer_matches_oracle():
    config = SetupConfig(coupling_1=0.05, coupling_2=0.05, cutoff=4, bob_analyzer_angle=0.4)
    main = experiment.run_scenario(config, Scenario("fourfold"))
    ref = oracle.run_scenario(config, Scenario("fourfold"))
    assert max(oracle.compare(main, ref).values()) <= 1e-10


def test_ratio_two_leading_order_matches_oracle():
    # The oracle run supplies the expected value; nothing is hard-coded.
    config = SetupConfig(coupling_1=0.02, coupling_2=0.04)
    lo, _ = experiment.leading_order(config, Scenario("threefold"))
    ref = oracle.leading_order_fidelity(config, Scenario("threefold"))
    assert lo.fidelity == pytest.approx(ref, abs=1e-6)


def test_oracle_rejects_lossy_detectors():
    config = SetupConfig(efficiency_p=0.5, cutoff=4)
    with pytest.raises(NotImplementedError):
        oracle.run_scenario(config, Scenario("threefold"))

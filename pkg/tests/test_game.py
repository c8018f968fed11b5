import math

import numpy as np
import pytest

from conftest import random_density
from spinframe.core import SpinState, basis_state, random_state, tensor
from spinframe.errors import InvalidInputError, MalformedDocumentError
from spinframe.fidelity import fidelity, helstrom_error
from spinframe.game import (
    GameConfig,
    Lab,
    lab_frame_pair,
    lab_from_dict,
    postulate1_check,
    run_game,
)
from spinframe.symmetry import haar_random_u2, haar_random_unitary

PLUS = SpinState.normalized([1, 1])
STATE = tensor(basis_state((0, 0)), PLUS)
ZERO_PLUS_ERR = (1 - math.sqrt(2) / 2) / 2


def game(labs=(), **kw):
    kw.setdefault("spec_a", (1,))
    kw.setdefault("spec_b", (3,))
    return GameConfig(kw.pop("state", STATE), labs=tuple(labs), **kw)


class TestLabFramePair:
    def test_identity_lab(self):
        cfg = game()
        rho_a, rho_b = lab_frame_pair(cfg, cfg.labs[0])
        np.testing.assert_allclose(rho_a.entries, np.diag([1, 0]), atol=1e-15)
        np.testing.assert_allclose(rho_b.entries, np.full((2, 2), 0.5), atol=1e-15)

    def test_collective_keeps_fidelity(self, rng):
        ref = fidelity(*lab_frame_pair(game(), Lab.identity(3)))
        for _ in range(10):
            pair = lab_frame_pair(game(), Lab.from_v(haar_random_u2(rng), 3))
            assert abs(fidelity(*pair) - ref) <= 1e-10

    def test_haar_global_moves_fidelity(self):
        ref = fidelity(*lab_frame_pair(game(), Lab.identity(3)))
        moved = [abs(fidelity(*lab_frame_pair(game(), Lab.global_frame(haar_random_unitary(8, s)))) - ref)
                 for s in range(100)]
        assert np.mean(np.array(moved) > 1e-3) >= 0.95


class TestRunGame:
    def test_reference_lab(self):
        (rep,) = run_game(game(trials=100_000, seed=1))
        assert abs(rep.analytic_p_err - ZERO_PLUS_ERR) <= 1e-12
        assert abs(rep.mc_p_err - rep.analytic_p_err) <= 3 * rep.mc_std_err

    def test_identical_pair(self):
        s = tensor(PLUS, PLUS)
        (rep,) = run_game(game(state=s, spec_b=(2,), p=0.3, trials=20_000))
        assert rep.analytic_p_err == pytest.approx(0.3, abs=1e-12)
        assert abs(rep.mc_p_err - 0.3) <= 3 * rep.mc_std_err

    @pytest.mark.parametrize("p", [0.2, 0.5, 0.9])
    def test_orthogonal_pair(self, p):
        (rep,) = run_game(game(state=basis_state((0, 1)), spec_b=(2,), p=p, trials=5_000))
        assert rep.analytic_p_err == pytest.approx(0.0, abs=1e-15)
        assert rep.mc_p_err == 0.0

    def test_deterministic(self, rng):
        labs = [Lab.identity(3), Lab.from_v(haar_random_u2(rng), 3)]
        a = [r.to_dict() for r in run_game(game(labs, trials=2000, seed=3))]
        b = [r.to_dict() for r in run_game(game(labs, trials=2000, seed=3))]
        assert a == b

    def test_monte_carlo_agrees_across_seeds(self):
        cfg_labs = [Lab.global_frame(haar_random_unitary(8, 42), "g")]
        hits = 0
        for seed in range(200):
            (rep,) = run_game(game(cfg_labs, trials=2000, seed=seed))
            hits += abs(rep.mc_p_err - rep.analytic_p_err) <= 3 * rep.mc_std_err
        assert hits >= 0.99 * 200

    def test_analytic_error_bounded(self, rng):
        for _ in range(50):
            s = random_state(3, rng)
            p = rng.uniform(0.05, 0.95)
            labs = [Lab.global_frame(haar_random_unitary(8, rng))]
            (rep,) = run_game(game(labs, state=s, p=p, trials=10))
            assert 0.0 <= rep.analytic_p_err <= min(p, 1 - p) + 1e-12
            assert rep.mc_std_err >= 0


def test_helstrom_invariant_under_shared_local_unitary(rng):
    for dim in (2, 4):
        for _ in range(20):
            r, s = random_density(dim, rng), random_density(dim, rng, rank=1)
            w = haar_random_unitary(dim, rng)
            p = rng.uniform(0.1, 0.9)
            moved = helstrom_error(w @ r @ w.conj().T, w @ s @ w.conj().T, p)
            assert abs(moved - helstrom_error(r, s, p)) <= 1e-12


class TestFrameIndependence:
    def test_collective_labs_agree(self, rng):
        labs = [Lab.from_v(haar_random_u2(rng), 3, name=f"c{i}") for i in range(5)]
        check = postulate1_check(game(labs))
        assert check["pass"] and check["all_collective"]
        assert check["max_spread"] < 1e-10

    def test_single_lab(self):
        assert postulate1_check(game())["max_spread"] == 0.0

    def test_haar_global_frame_is_detected(self):
        over = 0
        for seed in range(100):
            labs = [Lab.identity(3), lab_from_dict({"kind": "haar_global"}, 3, 1, seed)]
            check = postulate1_check(game(labs))
            over += check["max_spread"] > 1e-3
            assert not check["all_collective"]
        assert over >= 95

    def test_duplicate_names_are_kept(self):
        labs = [Lab.identity(3, "x"), Lab.identity(3, "x")]
        assert len(postulate1_check(game(labs))["labs"]) == 2


class TestConfig:
    def test_round_trip(self):
        doc = game([Lab.from_v(haar_random_u2(0), 3)], p=0.4, trials=7, seed=2).to_dict()
        back = GameConfig.from_dict(doc)
        assert back.to_dict() == doc

    def test_defaults_to_identity_lab(self):
        assert [lab.kind for lab in game().labs] == ["identity"]

    @pytest.mark.parametrize("kw", [dict(spec_b=(2, 3)), dict(p=1.0), dict(trials=0), dict(spec_a=(4,))])
    def test_invalid(self, kw):
        with pytest.raises(InvalidInputError):
            game(**kw)

    def test_wrong_frame_dimension(self):
        with pytest.raises(InvalidInputError):
            game([Lab.identity(2)])

    def test_non_unitary_frame(self):
        with pytest.raises(InvalidInputError):
            Lab.global_frame(np.ones((8, 8)))

    @pytest.mark.parametrize("doc", [{"kind": "wizard"}, {"kind": "collective"}, {"kind": "explicit"},
                                     {"kind": "collective", "params": [1, 2]}, 5])
    def test_malformed_labs(self, doc):
        with pytest.raises(MalformedDocumentError):
            lab_from_dict(doc, 3)

    def test_lab_params(self):
        lab = lab_from_dict({"kind": "collective", "params": [0, 0, math.pi, 0]}, 2)
        assert lab.collective and lab.frame.shape == (4, 4)

    def test_missing_fields(self):
        with pytest.raises(MalformedDocumentError):
            GameConfig.from_dict({"spec_a": [1]})

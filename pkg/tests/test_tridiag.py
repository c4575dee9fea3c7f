import numpy as np
import pytest

from phasefront import SingularSystemError, TridiagonalSystem, thomas_solve


def random_dominant_system(rng, n):
    lower = rng.uniform(-1.0, 1.0, n)
    upper = rng.uniform(-1.0, 1.0, n)
    lower[0] = 0.0
    upper[-1] = 0.0
    diag = np.abs(lower) + np.abs(upper) + rng.uniform(0.5, 2.0, n)
    diag *= rng.choice([-1.0, 1.0], n)
    rhs = rng.uniform(-5.0, 5.0, n)
    return TridiagonalSystem(lower=lower, diag=diag, upper=upper, rhs=rhs)


class TestThomasSolve:
    def test_identity_system(self):
        rhs = np.array([3.0, -1.0, 2.5])
        sys = TridiagonalSystem(np.zeros(3), np.ones(3), np.zeros(3), rhs)
        assert thomas_solve(sys) == pytest.approx(rhs)

    def test_three_by_three_hand_case(self):
        # rows: 2 x0 - x1 = 1; -x0 + 2 x1 - x2 = 0; -x1 + 2 x2 = 1
        # direct inversion gives (1, 1, 1)
        sys = TridiagonalSystem(
            lower=np.array([0.0, -1.0, -1.0]),
            diag=np.array([2.0, 2.0, 2.0]),
            upper=np.array([-1.0, -1.0, 0.0]),
            rhs=np.array([1.0, 0.0, 1.0]),
        )
        assert thomas_solve(sys) == pytest.approx([1.0, 1.0, 1.0], abs=1e-14)

    def test_matches_dense_oracle_on_100_random_systems(self, rng):
        for _ in range(100):
            sys = random_dominant_system(rng, 100)
            x = thomas_solve(sys)
            oracle = np.linalg.solve(sys.dense(), sys.rhs)
            assert np.max(np.abs(x - oracle)) < 1e-10
            assert sys.residual_norm(x) < 1e-12

    def test_zero_pivot_raises(self):
        sys = TridiagonalSystem(
            lower=np.array([0.0, 1.0]),
            diag=np.array([0.0, 1.0]),
            upper=np.array([1.0, 0.0]),
            rhs=np.array([1.0, 1.0]),
        )
        with pytest.raises(SingularSystemError):
            thomas_solve(sys, check_dominance=False)

    def test_dominance_warning(self):
        sys = TridiagonalSystem(
            lower=np.array([0.0, 5.0, 5.0]),
            diag=np.array([1.0, 1.0, 1.0]),
            upper=np.array([5.0, 5.0, 0.0]),
            rhs=np.ones(3),
        )
        with pytest.warns(UserWarning, match="diagonally dominant"):
            thomas_solve(sys)

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            TridiagonalSystem(np.zeros(2), np.ones(3), np.zeros(3), np.ones(3))


class TestSystemHelpers:
    def test_matvec_against_dense(self, rng):
        sys = random_dominant_system(rng, 17)
        x = rng.uniform(-1, 1, 17)
        assert sys.matvec(x) == pytest.approx(sys.dense() @ x)

    def test_dominance_flag(self, rng):
        assert random_dominant_system(rng, 30).is_diagonally_dominant()

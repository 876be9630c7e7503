from __future__ import annotations

import cmath
import math
import unittest

import bootstrap  # noqa: F401
import numpy as np

from pyqha_lab.errors import GridSizingError, ValidationGateError
from pyqha_lab.hermite_rep import (
    LineGrid,
    ambiguity,
    ambiguity_hermite,
    ambiguity_matrix,
    ambiguity_on_grid,
    ambiguity_on_grid,
    coefficients,
    hermite_basis,
    hermite_functions,
    line_grid_for,
    projective_phase,
    rho_diagonals,
    rho_matrices,
    rho_matrix,
    shifted_gaussian,
    sizing_rule,
    synthesize,
    validate_ambiguity_closed_form,
    wigner,
)
from pyqha_lab.phase_space import PhaseGrid, PhasePoint


class BasisTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.basis = hermite_basis(16, line_grid_for(16))

    def test_orthonormal(self) -> None:
        np.testing.assert_allclose(self.basis.gram(), np.eye(16), atol=1e-10)

    def test_parity_is_exact(self) -> None:
        t = np.linspace(0.05, 3.0, 17)
        plus = hermite_functions(9, t)
        minus = hermite_functions(9, -t)
        signs = np.where(np.arange(9) % 2 == 0, 1.0, -1.0)[:, None]
        np.testing.assert_array_equal(minus, signs * plus)

    def test_ground_state_is_gaussian(self) -> None:
        g0 = shifted_gaussian(PhasePoint.origin(), self.basis.grid)
        np.testing.assert_allclose(self.basis.wave(0).values, g0.values, atol=1e-13)

    def test_coefficients_and_synthesis(self) -> None:
        coeffs = coefficients(self.basis.wave(3), self.basis)
        expected = np.zeros(16)
        expected[3] = 1.0
        np.testing.assert_allclose(coeffs, expected, atol=1e-10)
        rebuilt = synthesize(coeffs, self.basis)
        np.testing.assert_allclose(rebuilt.values, self.basis.wave(3).values, atol=1e-10)

    def test_fingerprint_is_stable(self) -> None:
        again = hermite_basis(16, line_grid_for(16))
        self.assertEqual(again.fingerprint, self.basis.fingerprint)
        self.assertEqual(len(self.basis.fingerprint), 16)

    def test_grid_too_small(self) -> None:
        with self.assertRaises(GridSizingError) as ctx:
            hermite_basis(64, LineGrid(3.0, 128))
        self.assertIn("too small", str(ctx.exception))

    def test_sizing_rule_grows_with_n(self) -> None:
        self.assertLess(sizing_rule(16)[0], sizing_rule(256)[0])

    def test_fourier_eigenvectors(self) -> None:
        t = self.basis.grid.nodes
        kernel = self.basis.grid.spacing * np.exp(-2j * np.pi * np.outer(t, t))
        for n in range(8):
            with self.subTest(n=n):
                h = self.basis.wave(n).values
                np.testing.assert_allclose(kernel @ h, (-1j) ** n * h, atol=1e-8)


class AmbiguityTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.basis = hermite_basis(16, line_grid_for(16))

    def test_gaussian_closed_form(self) -> None:
        z = PhasePoint(0.4, -0.7)
        value = ambiguity_hermite(0, 0, z)
        self.assertAlmostEqual(value, math.exp(-0.5 * math.pi * z.norm() ** 2), places=14)

    def test_quadrature_matches_closed_form(self) -> None:
        z = PhasePoint(0.6, 0.25)
        quad = ambiguity_matrix(self.basis, z)
        closed = np.conj(rho_matrices([z], 16)[0])
        np.testing.assert_allclose(quad[:8, :8], closed[:8, :8], atol=1e-8)

    def test_single_pair_matches_matrix(self) -> None:
        z = PhasePoint(-0.5, 0.3)
        value = ambiguity(self.basis.wave(2), self.basis.wave(1), z)
        self.assertAlmostEqual(value, ambiguity_matrix(self.basis, z)[2, 1], places=12)

    def test_shift_beyond_line_rejected(self) -> None:
        with self.assertRaises(GridSizingError):
            ambiguity(self.basis.wave(0), self.basis.wave(0), PhasePoint(100.0, 0.0))

    def test_wigner_of_gaussian(self) -> None:
        grid = PhaseGrid(4.0, 64)
        w = wigner(self.basis.wave(0), self.basis.wave(0), grid)
        x, xi = grid.mesh()
        np.testing.assert_allclose(w.values, 2.0 * np.exp(-2.0 * np.pi * (x**2 + xi**2)), atol=1e-6)

    def test_validation_gate_raises_on_impossible_tolerance(self) -> None:
        with self.assertRaises(ValidationGateError):
            validate_ambiguity_closed_form(n=8, samples=2, tolerance=0.0)

    def test_first_hermite_diagonal(self) -> None:
        for z in (PhasePoint(1.0, 0.0), PhasePoint(0.3, -0.8), PhasePoint(-1.4, 0.9)):
            r2 = z.norm() ** 2
            expected = (1.0 - math.pi * r2) * math.exp(-0.5 * math.pi * r2)
            with self.subTest(z=z):
                self.assertAlmostEqual(ambiguity_hermite(1, 1, z), expected, places=12)

    def test_wigner_marginal(self) -> None:
        grid = PhaseGrid(4.0, 64)
        w = wigner(self.basis.wave(1), self.basis.wave(1), grid)
        marginal = grid.spacing * np.sum(w.values, axis=1)
        expected = hermite_functions(2, grid.nodes)[1] ** 2
        np.testing.assert_allclose(marginal, expected, atol=1e-6)

    def test_moyal_identity_on_hermite_pairs(self) -> None:
        basis = hermite_basis(16, line_grid_for(16, oversample=2))
        grid = PhaseGrid(5.0, 80)
        window = basis.wave(0)
        stack = np.stack(
            [ambiguity_on_grid(basis.wave(m), window, grid).values.ravel() for m in range(4)]
        )
        gram = grid.cell_area * (stack @ np.conj(stack.T))
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-6)


class GateGridTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.grid = LineGrid(6.5, 2048)
        cls.basis = hermite_basis(4, cls.grid)

    def test_first_hermite_diagonal_by_quadrature(self) -> None:
        value = ambiguity(self.basis.wave(1), self.basis.wave(1), PhasePoint(1.0, 0.0))
        self.assertAlmostEqual(value, (1.0 - math.pi) * math.exp(-0.5 * math.pi), delta=1e-9)

    def test_shifted_gaussian_modulus(self) -> None:
        z0 = PhasePoint(0.7, -0.4)
        g_shift = shifted_gaussian(z0, self.grid)
        g0 = self.basis.wave(0)
        rng = np.random.default_rng(11)
        radius = 2.0 * np.sqrt(rng.uniform(size=1000))
        theta = 2.0 * np.pi * rng.uniform(size=1000)
        worst = 0.0
        for r, t in zip(radius, theta):
            z = PhasePoint(float(r * math.cos(t)), float(r * math.sin(t)))
            expected = math.exp(-0.5 * math.pi * (z - z0).norm() ** 2)
            worst = max(worst, abs(abs(ambiguity(g_shift, g0, z)) - expected))
        self.assertLess(worst, 1e-8)

    def test_default_gate_passes(self) -> None:
        for seed in (0, 1, 7, 42):
            with self.subTest(seed=seed):
                report = validate_ambiguity_closed_form(seed=seed)
                self.assertEqual(report.size, 64)
                self.assertTrue(report.passed)
                self.assertLessEqual(report.max_error, 1e-8)


class RhoMatrixTests(unittest.TestCase):
    def test_leading_block_is_unitary(self) -> None:
        mats = rho_matrices(np.array([[0.4, 0.3], [-0.2, 0.5]]), 64)
        for mat in mats:
            product = mat @ mat.conj().T
            np.testing.assert_allclose(product[:16, :16], np.eye(16), atol=1e-10)

    def test_inverse_is_negated_point(self) -> None:
        z = np.array([[0.7, -0.4]])
        np.testing.assert_allclose(
            rho_matrices(-z, 12)[0], rho_matrices(z, 12)[0].conj().T, atol=1e-13
        )

    def test_single_matrix_matches_batch(self) -> None:
        basis = hermite_basis(12, line_grid_for(12))
        op = rho_matrix(PhasePoint(0.3, -0.1), basis)
        expected = rho_matrices(np.array([[0.3, -0.1]]), 12)[0]
        np.testing.assert_allclose(op.entries, expected, atol=1e-14)
        self.assertEqual(op.fingerprint, basis.fingerprint)

    def test_parity_conjugation(self) -> None:
        z = np.array([[0.5, 0.25]])
        signs = np.diag(np.where(np.arange(10) % 2 == 0, 1.0, -1.0))
        np.testing.assert_allclose(
            signs @ rho_matrices(z, 10)[0] @ signs, rho_matrices(-z, 10)[0], atol=1e-14
        )

    def test_matches_closed_form_far_from_origin(self) -> None:
        for z in (PhasePoint(2.4, -3.2), PhasePoint(-6.0, 6.0)):
            closed = np.conj(rho_matrices([z], 64)[0])
            expected = np.array(
                [[ambiguity_hermite(m, n, z) for n in range(64)] for m in range(64)]
            )
            with self.subTest(z=z):
                np.testing.assert_allclose(closed, expected, rtol=0, atol=1e-10)

    def test_diagonals_match_matrices(self) -> None:
        pts = np.array([[0.0, 0.0], [0.9, -0.2], [-2.5, 3.0]])
        mats = rho_matrices(pts, 32)
        diagonals = rho_diagonals(pts, 32)
        np.testing.assert_allclose(diagonals, np.diagonal(mats, axis1=1, axis2=2).real, atol=1e-15)
        np.testing.assert_allclose(diagonals[0], 1.0)

    def test_projective_phase(self) -> None:
        z, w = PhasePoint(0.3, 0.2), PhasePoint(-0.1, 0.5)
        check = projective_phase(z, w, 48)
        self.assertLess(check.deviation, 1e-8)
        self.assertLess(abs(check.scalar - cmath.exp(1j * check.expected_phase)), 1e-8)


if __name__ == "__main__":
    unittest.main()

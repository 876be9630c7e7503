from __future__ import annotations

import math
import unittest

import bootstrap  # noqa: F401
import numpy as np

from pyqha_lab.errors import GridSizingError, MeasureSpecError
from pyqha_lab.phase_space import (
    PhaseFunction,
    PhaseGrid,
    PhasePoint,
    atom_list,
    build_measure,
    cantor,
    circle,
    dirac,
    fourier_of_measure,
    fourier_transform_2d,
    grid_lp_norm,
    measure_lq_norm,
    nonuniform_symplectic_fourier,
    parseval_measures,
    regularity_estimates,
    reweight,
    reweight_constant,
    symplectic_form,
    symplectic_fourier,
)


def gaussian(grid: PhaseGrid) -> PhaseFunction:
    return PhaseFunction.from_callable(grid, lambda x, xi: np.exp(-np.pi * (x**2 + xi**2)))


class SymplecticFormTests(unittest.TestCase):
    def test_antisymmetric(self) -> None:
        z, w = PhasePoint(0.3, -1.2), PhasePoint(2.0, 0.7)
        self.assertAlmostEqual(symplectic_form(z, w), -symplectic_form(w, z))
        self.assertEqual(symplectic_form(z, z), 0.0)

    def test_value(self) -> None:
        # sigma((x, xi), (y, eta)) = y xi - x eta
        self.assertAlmostEqual(symplectic_form(PhasePoint(1.0, 2.0), PhasePoint(3.0, 5.0)), 1.0)


class PhaseGridTests(unittest.TestCase):
    def test_dual_spacing_and_width(self) -> None:
        grid = PhaseGrid(3.0, 48)
        dual = grid.dual()
        self.assertAlmostEqual(dual.spacing, 1.0 / (2.0 * grid.half_width))
        self.assertAlmostEqual(dual.half_width, 1.0 / (2.0 * grid.spacing))
        self.assertFalse(grid.is_self_dual())
        self.assertTrue(PhaseGrid(4.0, 64).is_self_dual())

    def test_rejects_odd_points(self) -> None:
        with self.assertRaises(GridSizingError):
            PhaseGrid(2.0, 15)

    def test_nodes_are_centered(self) -> None:
        nodes = PhaseGrid(2.0, 8).nodes
        self.assertEqual(nodes[4], 0.0)
        self.assertAlmostEqual(nodes[0], -2.0)


class SymplecticFourierTests(unittest.TestCase):
    def test_gaussian_is_fixed(self) -> None:
        grid = PhaseGrid(4.0, 64)
        transformed = symplectic_fourier(gaussian(grid))
        self.assertEqual(transformed.grid, grid.dual())
        expected = gaussian(transformed.grid).values
        self.assertLess(np.abs(transformed.values - expected).max(), 1e-10)

    def test_involution(self) -> None:
        grid = PhaseGrid(3.0, 32)
        rng = np.random.default_rng(7)
        values = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
        function = PhaseFunction(grid, values)
        twice = symplectic_fourier(symplectic_fourier(function))
        self.assertAlmostEqual(twice.grid.half_width, grid.half_width, places=12)
        np.testing.assert_allclose(twice.values, values, atol=1e-12)

    def test_rotation_identity(self) -> None:
        grid = PhaseGrid(5.0, 100)
        function = PhaseFunction.from_callable(
            grid, lambda x, xi: np.exp(-np.pi * (x**2 + 2.0 * xi**2))
        )
        plain = fourier_transform_2d(function)
        rotated = symplectic_fourier(function)
        # F_sigma(F)(x, xi) = F(F)(xi, -x), node for node
        np.testing.assert_array_equal(rotated.values[1:, :], plain.values[:, :0:-1].T)
        x, xi = rotated.grid.mesh()
        expected = np.exp(-np.pi * (xi**2 + 0.5 * x**2)) / math.sqrt(2.0)
        np.testing.assert_allclose(rotated.values, expected, atol=1e-10)

    def test_nonuniform_matches_closed_form(self) -> None:
        grid = PhaseGrid(5.0, 80)
        targets = np.array([[0.0, 0.0], [0.4, -0.3], [1.1, 0.2]])
        values = nonuniform_symplectic_fourier(gaussian(grid), targets)
        expected = np.exp(-np.pi * np.sum(targets**2, axis=1))
        np.testing.assert_allclose(values, expected, atol=1e-10)

    def test_nonuniform_worker_count_does_not_change_values(self) -> None:
        grid = PhaseGrid(4.0, 32)
        targets = np.random.default_rng(1).uniform(-1, 1, size=(200, 2))
        serial = nonuniform_symplectic_fourier(gaussian(grid), targets, workers=1)
        threaded = nonuniform_symplectic_fourier(gaussian(grid), targets, workers=4)
        np.testing.assert_array_equal(serial, threaded)


class NormTests(unittest.TestCase):
    def test_gaussian_lp_norms(self) -> None:
        g = gaussian(PhaseGrid(5.0, 80))
        self.assertAlmostEqual(grid_lp_norm(g, 1.0), 1.0, places=10)
        self.assertAlmostEqual(grid_lp_norm(g, 2.0), math.sqrt(0.5), places=10)
        self.assertAlmostEqual(grid_lp_norm(g, math.inf), 1.0)
        self.assertAlmostEqual(g.l2_norm(), math.sqrt(0.5), places=10)

    def test_rejects_non_positive_exponent(self) -> None:
        with self.assertRaises(ValueError):
            grid_lp_norm(gaussian(PhaseGrid(2.0, 8)), 0.0)

    def test_measure_lq_norm(self) -> None:
        mu = circle(1.0, 8)
        values = np.arange(8, dtype=float)
        self.assertAlmostEqual(measure_lq_norm(values, mu, math.inf), 7.0)
        self.assertAlmostEqual(measure_lq_norm(values, mu, 1.0), np.mean(values))


class MeasureTests(unittest.TestCase):
    def test_circle(self) -> None:
        mu = circle(1.0, 64, mass=2.0)
        self.assertEqual(mu.size, 64)
        self.assertAlmostEqual(mu.total_variation, 2.0)
        self.assertAlmostEqual(mu.radius_bound, 1.0)
        np.testing.assert_allclose(np.hypot(*mu.atoms.T), 1.0)

    def test_circle_needs_nodes(self) -> None:
        with self.assertRaises(MeasureSpecError):
            circle(1.0, 4)

    def test_cantor_atom_count(self) -> None:
        mu = cantor(2)
        self.assertEqual(mu.size, 16)
        self.assertAlmostEqual(mu.total_variation, 1.0)
        self.assertTrue(np.all((mu.atoms > 0) & (mu.atoms < 1)))

    def test_dirac_transform_is_one(self) -> None:
        values = fourier_of_measure(dirac(), np.array([[0.0, 0.0], [3.0, -2.0]]))
        np.testing.assert_allclose(values, 1.0)

    def test_parseval_for_measures(self) -> None:
        lhs, rhs = parseval_measures(circle(1.0, 16), cantor(1))
        self.assertAlmostEqual(abs(lhs - rhs), 0.0, places=12)

    def test_parseval_on_random_atom_measures(self) -> None:
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            mu, nu = (
                atom_list(
                    rng.uniform(-2.0, 2.0, size=(k, 2)),
                    rng.standard_normal(k) + 1j * rng.standard_normal(k),
                )
                for k in rng.integers(1, 7, size=2)
            )
            lhs, rhs = parseval_measures(mu, nu)
            self.assertLess(abs(lhs - rhs), 1e-12 * mu.total_variation * nu.total_variation)

    def test_build_measure_from_mapping(self) -> None:
        mu = build_measure({"kind": "circle", "radius": 0.5, "nodes": 32})
        self.assertEqual(mu.kind, "circle")
        self.assertAlmostEqual(mu.radius_bound, 0.5)
        atoms = build_measure(
            {"kind": "atoms", "points": [[0.0, 0.0], [1.0, 0.0]], "weights": [1.0, [0.0, 1.0]]}
        )
        self.assertEqual(atoms.weights[1], 1j)

    def test_build_measure_rejects_bad_specs(self) -> None:
        with self.assertRaises(MeasureSpecError):
            build_measure({"kind": "sphere"})
        with self.assertRaises(MeasureSpecError):
            build_measure({"kind": "circle", "radius": 1.0, "colour": "red"})
        with self.assertRaises(MeasureSpecError):
            build_measure({"kind": "circle"})

    def test_reweight_keeps_atoms(self) -> None:
        base = circle(1.0, 16)
        nu = reweight(base, PhasePoint.origin())
        np.testing.assert_array_equal(nu.atoms, base.atoms)
        np.testing.assert_allclose(nu.weights, base.weights * math.exp(-0.5 * math.pi))


class RegularityTests(unittest.TestCase):
    def test_circle_exponents(self) -> None:
        estimate = regularity_estimates(circle(1.0, 4096), ray_count=64, seed=0)
        self.assertTrue(estimate.ok)
        self.assertAlmostEqual(estimate.alpha_hat, 1.0, delta=0.2)
        self.assertAlmostEqual(estimate.beta_hat, 1.0, delta=0.15)
        self.assertAlmostEqual(estimate.corollary_bound(), 4.0 / estimate.beta_hat)

    def test_dirac_has_no_decay(self) -> None:
        estimate = regularity_estimates(dirac(), ray_count=8, seed=0)
        self.assertAlmostEqual(estimate.beta_hat, 0.0, delta=0.01)
        self.assertIn("few-atoms", estimate.flags)

    def test_reweight_constant_is_at_least_one(self) -> None:
        self.assertGreaterEqual(reweight_constant(circle(1.0, 64), points_per_axis=128), 1.0)

    def test_reweighting_keeps_fourier_norms_equivalent(self) -> None:
        grid = PhaseGrid(8.0, 64)
        for mu in (circle(1.0, 256), cantor(2)):
            constant = reweight_constant(mu, points_per_axis=128)
            nu = reweight(mu, mu.center)
            transforms = [
                PhaseFunction(grid, fourier_of_measure(m, grid.points()).reshape(64, 64))
                for m in (mu, nu)
            ]
            for p in (2.0, 4.0):
                ratio = grid_lp_norm(transforms[1], p) / grid_lp_norm(transforms[0], p)
                with self.subTest(kind=mu.kind, p=p):
                    self.assertGreaterEqual(ratio, 1.0 / constant)
                    self.assertLessEqual(ratio, constant)


if __name__ == "__main__":
    unittest.main()

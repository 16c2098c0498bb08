"""Seeded randomized self-check driven by ``bbqram suite``."""
from __future__ import annotations

import numpy as np

from .layout import FixedPointFormat
from .preprocessing import DenseMatrix, pad_matrix
from .quantum_ops import FixedPoint
from .state_prep import PrepConfig, cost_report, expected_prep_units, prepare_state, verify_state

CORRECTNESS_TOL = 1e-9
REGRESSION_TOL = 0.01
PRECISION_SWEEP = (8, 16, 24)
PRECISION_CEILING = 1e-5


def random_matrix(rng: np.random.Generator, K: int) -> DenseMatrix:
    """Uniform(-1, 1) entries, shape ``2**floor(k/2) x 2**ceil(k/2)``."""
    k = K.bit_length() - 1
    m = k // 2
    return pad_matrix(rng.uniform(-1.0, 1.0, size=(1 << m, 1 << (k - m))))


def precision_matrices(seed: int, count: int = 8, K: int = 64) -> list[DenseMatrix]:
    """Random-sign entries with magnitudes in [0.1, 1].

    Keeping entries away from zero keeps every squared leaf well above the
    fixed-point resolution, so the sweep measures arithmetic rounding rather
    than leaves that underflow to zero (an entry ``x`` with
    ``x**2 < 2**-(frac_bits + 1)`` is lost outright).
    """
    rng = np.random.default_rng([seed, 1])
    k = K.bit_length() - 1
    shape = (1 << (k // 2), 1 << (k - k // 2))
    out = []
    for _ in range(count):
        mag = rng.uniform(0.1, 1.0, size=shape)
        sign = rng.choice([-1.0, 1.0], size=shape)
        out.append(pad_matrix(mag * sign))
    return out


def check_correctness(seed: int, sizes, per_size: int = 3) -> dict:
    rng = np.random.default_rng([seed, 0])
    worst, failures, cases = 0.0, [], 0
    for K in sizes:
        for _ in range(per_size):
            m = random_matrix(rng, K)
            rep = verify_state(prepare_state(m), m, CORRECTNESS_TOL)
            worst = max(worst, rep.max_abs_error)
            cases += 1
            if not rep.passed:
                failures.append({"K": K, "max_abs_error": rep.max_abs_error,
                                 "sign_mismatches": len(rep.sign_mismatches)})
    return {"name": "correctness", "passed": not failures, "cases": cases,
            "max_abs_error": worst, "tol": CORRECTNESS_TOL, "failures": failures}


def measured_prep_units(seed: int, ks=range(2, 9)) -> dict:
    rng = np.random.default_rng([seed, 2])
    return {k: cost_report(prepare_state(random_matrix(rng, 1 << k))).total_units for k in ks}


def quadratic_fit(ks, units):
    """Least-squares ``a k^2 + b k + c``; returns coefficients and max relative residual."""
    ks = np.asarray(list(ks), dtype=float)
    y = np.asarray(list(units), dtype=float)
    coef = np.polyfit(ks, y, 2)
    resid = np.max(np.abs(np.polyval(coef, ks) - y) / y)
    return coef, float(resid)


def check_cost(seed: int) -> list[dict]:
    units = measured_prep_units(seed)
    mismatches = {k: u for k, u in units.items() if u != expected_prep_units(k)}
    coef, resid = quadratic_fit(units, units.values())
    return [
        {"name": "cost_closed_form", "passed": not mismatches,
         "measured": {str(k): u for k, u in units.items()},
         "mismatches": {str(k): u for k, u in mismatches.items()}},
        {"name": "cost_regression", "passed": bool(resid < REGRESSION_TOL and coef[0] > 0),
         "coefficients": [float(c) for c in coef], "max_relative_residual": resid,
         "tol": REGRESSION_TOL},
    ]


def precision_sweep(seed: int, frac_bits=PRECISION_SWEEP, int_bits: int = 16) -> dict:
    """Max amplitude deviation of fixed mode from exact mode, per ``frac_bits``."""
    mats = precision_matrices(seed)
    exact = [prepare_state(m).final_amplitudes for m in mats]
    out = {}
    for fb in frac_bits:
        cfg = PrepConfig(mode=FixedPoint(FixedPointFormat(int_bits, fb)))
        out[fb] = max(float(np.max(np.abs(prepare_state(m, cfg).final_amplitudes - e)))
                      for m, e in zip(mats, exact))
    return out


def check_precision(seed: int) -> dict:
    dev = precision_sweep(seed)
    vals = [dev[fb] for fb in PRECISION_SWEEP]
    monotone = all(x > y for x, y in zip(vals, vals[1:]))
    return {"name": "precision_sweep", "passed": bool(monotone and vals[-1] <= PRECISION_CEILING),
            "max_deviation": {str(fb): d for fb, d in dev.items()},
            "ceiling": PRECISION_CEILING}


def run_suite(seed: int, sizes) -> dict:
    criteria = [check_correctness(seed, sizes), *check_cost(seed), check_precision(seed)]
    return {"seed": seed, "sizes": list(sizes), "criteria": criteria,
            "passed": all(c["passed"] for c in criteria)}

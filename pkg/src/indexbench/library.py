"""The built-in scenario library.

* type1_worked: one M_2 factor with unit weight, F = offdiag(1,1),
  chi = diag(1,-1), generator p = e_11; every even pairing equals 1.
* type2_fractional: M_3 with weight 1/3, D = 0, chi = diag(1,1,-1), p = 1.
  tau(chi p) = 1/3; doubling makes D invertible without moving the pairing,
  so all five methods meet at 1/3.
* odd_consistency: an ungraded factor; QuQ compressions in a single finite
  factor always balance kernel against cokernel, so every odd index is 0 and
  the cohomological route must agree.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .context import Grading, Operator, TraceContext
from .fredholm import BoundedModule, UnboundedModule


def type1_worked():
    ctx = TraceContext([(2, 1.0)])
    chi = Grading(ctx, [1, -1])
    f = np.array([[0, 1], [1, 0]], dtype=complex)
    p = np.diag([1.0, 0.0]).astype(complex)
    bounded = BoundedModule(ctx, Operator(ctx, f, "odd"),
                            [Operator(ctx, p, "even")], chi)
    unbounded = UnboundedModule(ctx, Operator(ctx, f, "odd"),
                                [Operator(ctx, p, "even")], chi)
    return {"ctx": ctx, "grading": chi, "bounded": bounded,
            "unbounded": unbounded, "projection": p, "expected": 1.0}


def type2_fractional():
    ctx = TraceContext([(3, 1.0 / 3.0)])
    chi = Grading(ctx, [1, 1, -1])
    d = np.zeros((3, 3), dtype=complex)
    p = np.eye(3, dtype=complex)
    unbounded = UnboundedModule(ctx, Operator(ctx, d, "odd"),
                                [Operator(ctx, p, "even")], chi)
    return {"ctx": ctx, "grading": chi, "unbounded": unbounded,
            "projection": p, "expected": 1.0 / 3.0}


def odd_consistency():
    ctx = TraceContext([(3, 0.5)])
    f = np.diag([1.0, 1.0, -1.0]).astype(complex)
    h = np.array([[0.3, 0.2 - 0.1j, 0.0],
                  [0.2 + 0.1j, -0.4, 0.25j],
                  [0.0, -0.25j, 0.1]])
    u = expm(1j * h)
    d = np.diag([1.5, 0.7, -1.1]).astype(complex)
    bounded = BoundedModule(ctx, Operator(ctx, f), [Operator(ctx, u)], None)
    unbounded = UnboundedModule(ctx, Operator(ctx, d), [Operator(ctx, u)], None)
    return {"ctx": ctx, "bounded": bounded, "unbounded": unbounded,
            "unitary": u, "expected": 0.0}

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptwell.errors import DegreeZero, DerivativeUnderflow
from ptwell.numerics import ComplexPolynomial, Rectangle, chebyshev_rule, newton_refine, poly_roots, winding_count


def test_roots_of_z2_minus_1():
    roots = sorted(poly_roots(ComplexPolynomial([-1, 0, 1])), key=lambda z: z.real)
    assert roots[0] == pytest.approx(-1, abs=1e-12)
    assert roots[1] == pytest.approx(1, abs=1e-12)


def test_roots_of_quartic_at_reference_energy():
    roots = sorted(poly_roots(ComplexPolynomial([1, 0, -0.5, 0, 0.05])), key=lambda z: z.real)
    a, b = math.sqrt(5 + math.sqrt(5)), math.sqrt(5 - math.sqrt(5))
    for r, want in zip(roots, (-a, -b, b, a)):
        assert abs(r - want) < 1e-12


def test_constant_has_no_roots():
    with pytest.raises(DegreeZero):
        poly_roots(ComplexPolynomial([5]))


def test_newton_sqrt2():
    z = newton_refine(lambda z: z * z - 2, lambda z: 2 * z, 1.5, tol=1e-14)
    assert z == pytest.approx(math.sqrt(2), abs=1e-14)


def test_newton_on_quartic():
    p = ComplexPolynomial([1, 0, -0.5, 0, 0.05])
    z = newton_refine(p, p.derivative(), 1.6, tol=1e-14)
    assert z.real == pytest.approx(math.sqrt(5 - math.sqrt(5)), abs=1e-12)


def test_newton_double_root_at_seed():
    with pytest.raises(DerivativeUnderflow):
        newton_refine(lambda z: z * z, lambda z: 2 * z, 0.0, tol=1e-14)


def test_chebyshev_closed_forms():
    r = chebyshev_rule("first", 2)
    assert np.allclose(sorted(r.nodes), [-math.cos(math.pi / 4), math.cos(math.pi / 4)], atol=1e-15)
    assert np.allclose(r.weights, [math.pi / 2] * 2, atol=1e-15)
    r = chebyshev_rule("second", 1)
    assert np.allclose(r.nodes, [0.0], atol=1e-15) and np.allclose(r.weights, [math.pi / 2], atol=1e-15)
    assert sum(chebyshev_rule("second", 3).weights) == pytest.approx(math.pi / 2, abs=1e-15)


@pytest.mark.parametrize("kind", ["first", "second"])
@pytest.mark.parametrize("n", [1, 4, 9, 16])
def test_chebyshev_structure_and_exactness(kind, n):
    r = chebyshev_rule(kind, n)
    assert len(r.nodes) == len(r.weights) == n
    assert np.all(np.diff(r.nodes) > 0)
    for k in range(2 * n):
        got = r.integrate(r.nodes ** k)
        if k % 2:
            assert abs(got) <= 1e-14
            continue
        # int s^k w(s) ds with w = (1-s^2)^(-1/2) or (1-s^2)^(1/2)
        first = math.pi * math.prod(range(1, k, 2)) / math.prod(range(2, k + 1, 2)) if k else math.pi
        want = first if kind == "first" else first / (k + 2)
        assert abs(got - want) <= 1e-14


def test_winding_simple_cases():
    box = Rectangle(0j, 0.5, 0.5)
    assert winding_count(lambda z: z, box) == 1
    assert winding_count(lambda z: z * z, box) == 2
    assert winding_count(lambda z: z - 10, box) == 0


roots_st = st.lists(
    st.tuples(st.floats(0.05, 0.95), st.floats(0, 2 * math.pi)), min_size=1, max_size=8
)


@settings(max_examples=60, deadline=None)
@given(roots_st)
def test_roots_recovered_from_product(pairs):
    roots = [r * complex(math.cos(t), math.sin(t)) for r, t in pairs]
    if min((abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]), default=1) < 0.05:
        return
    found = poly_roots(ComplexPolynomial.from_roots(roots))
    for r in roots:
        assert min(abs(r - f) for f in found) <= 1e-10 * max(1, abs(r))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=8))
def test_winding_matches_root_count(roots):
    box = Rectangle(0.1 + 0.05j, 0.9, 0.7)
    lo_re, hi_re = box.re_bounds
    lo_im, hi_im = box.im_bounds
    # keep roots clear of the boundary
    if any(min(abs(r.real - lo_re), abs(r.real - hi_re), abs(r.imag - lo_im), abs(r.imag - hi_im)) < 1e-3 for r in roots):
        return
    p = ComplexPolynomial.from_roots(roots)
    inside = sum(box.contains(r) for r in poly_roots(p, tol=1e-10))
    assert winding_count(p, box) == inside


def test_roots_with_tiny_constant_term_and_double_root():
    roots = [1.046875, 1.689198660849517e-275, 1.5j, 1.5j]
    p = ComplexPolynomial.from_roots(roots)
    found = poly_roots(p, tol=1e-10)
    for r in roots:
        assert min(abs(r - f) for f in found) <= 1e-7
    assert sum(abs(f - 1.5j) < 1e-7 for f in found) == 2


def test_triple_root_with_tiny_roots():
    roots = [2, 0.5, 0.5, 0.5, 1.602713246160123e-27, 1.689198660849517e-275]
    found = poly_roots(ComplexPolynomial.from_roots(roots), tol=1e-10)
    assert sum(abs(f - 0.5) < 1e-4 for f in found) == 3
    assert min(abs(f - 2) for f in found) < 1e-10


def test_double_root_far_below_the_others():
    roots = [2, 0.5, 0.5, 1.3429886669796697e-132, 1.3429886669796697e-132]
    found = poly_roots(ComplexPolynomial.from_roots(roots), tol=1e-10)
    assert sum(abs(f) < 1e-131 for f in found) == 2
    assert sum(abs(f - 0.5) < 1e-6 for f in found) == 2


def test_winding_not_fooled_by_close_zeros_outside():
    # two zeros just above the top edge turn the phase by almost 2 pi between samples
    box = Rectangle(0.1 + 0.05j, 0.9, 0.7)
    p = ComplexPolynomial.from_roots([0.7578125j, 0.75390625j])
    assert winding_count(p, box) == 0

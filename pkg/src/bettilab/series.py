"""Truncated power series ``sum a_k z^k`` as coefficient lists (generic field)."""

from __future__ import annotations

from typing import Sequence


def pad(a: Sequence, n: int) -> list:
    a = list(a[:n])
    return a + [0] * (n - len(a))


def mul(a: Sequence, b: Sequence, n: int) -> list:
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x == 0:
            continue
        for j, y in enumerate(b[: n - i]):
            out[i + j] = out[i + j] + x * y
    return out


def inv(a: Sequence, n: int) -> list:
    """``1 / a`` for ``a[0] != 0``."""
    if a[0] == 0:
        raise ZeroDivisionError("series with zero constant term is not invertible")
    a = pad(a, n)
    out = [0] * n
    out[0] = 1 / a[0]
    for k in range(1, n):
        acc = 0
        for j in range(1, k + 1):
            acc = acc + a[j] * out[k - j]
        out[k] = -acc / a[0]
    return out


def sqrt1(a: Sequence, n: int) -> list:
    """Square root of a series with constant term 1 (constant term of result is 1)."""
    a = pad(a, n)
    if a[0] != 1:
        raise ValueError("constant term must be 1")
    out = [0] * n
    out[0] = a[0]
    for k in range(1, n):
        acc = a[k]
        for j in range(1, k):
            acc = acc - out[j] * out[k - j]
        out[k] = acc / 2
    return out


def compose(a: Sequence, b: Sequence, n: int) -> list:
    """``a(b(z))`` for ``b[0] == 0`` (Horner)."""
    if b and b[0] != 0:
        raise ValueError("inner series must have zero constant term")
    out: list = [0] * n
    for c in reversed(list(a[:n])):
        out = mul(out, b, n)
        out[0] = out[0] + c
    return out


def reverse(a: Sequence, n: int) -> list:
    """Compositional inverse ``b`` with ``a(b(z)) = z``; needs ``a[0] = 0, a[1] != 0``."""
    a = pad(a, n)
    if a[0] != 0 or a[1] == 0:
        raise ValueError("series must start a_1 z with a_1 != 0")
    b = [0] * n
    if n > 1:
        b[1] = 1 / a[1]
    # fix one more coefficient per pass: a(b) = z + O(z^{k+1})
    for k in range(2, n):
        comp = compose(a, b, k + 1)
        b[k] = -comp[k] / a[1]
    return b


def deriv(a: Sequence) -> list:
    return [k * c for k, c in enumerate(a)][1:]

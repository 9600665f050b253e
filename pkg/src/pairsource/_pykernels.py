"""Pure-Python kernels. Same algorithms, same call signatures as ``_ckernels``.

Points are passed as bare integers; ``None`` stands for the point at infinity.
"""

from __future__ import annotations

from math import gcd

from .errors import NotInvertible, ZeroEvaluation


def _inv(d: int, n: int) -> int:
    try:
        return pow(d, -1, n)
    except ValueError:
        raise NotInvertible(gcd(d, n)) from None


def _dbl(x, y, a, n):
    if y == 0:
        return None
    lam = (3 * x * x + a) * _inv(2 * y % n, n) % n
    x3 = (lam * lam - 2 * x) % n
    return x3, (lam * (x - x3) - y) % n


def _add(x1, y1, x2, y2, a, n):
    if x1 == x2:
        if y1 == y2:
            return _dbl(x1, y1, a, n)
        if (y1 + y2) % n == 0:
            return None
        raise NotInvertible(n)
    lam = (y2 - y1) * _inv((x2 - x1) % n, n) % n
    x3 = (lam * lam - x1 - x2) % n
    return x3, (lam * (x1 - x3) - y1) % n


def ec_scalar_mult(x, y, k, a, n):
    """Left-to-right double-and-add of k*(x, y) over Z/nZ."""
    if k == 0:
        return None
    rx, ry = x, y
    inf = False
    for bit in bin(k)[3:]:
        if not inf:
            t = _dbl(rx, ry, a, n)
            if t is None:
                inf = True
            else:
                rx, ry = t
        if bit == "1":
            if inf:
                rx, ry, inf = x, y, False
            else:
                t = _add(rx, ry, x, y, a, n)
                if t is None:
                    inf = True
                else:
                    rx, ry = t
    return None if inf else (rx, ry)


def fp2_pow(c0, c1, e, p):
    r0, r1 = 1, 0
    for bit in bin(e)[2:] if e else "":
        r0, r1 = (r0 - r1) * (r0 + r1) % p, 2 * r0 * r1 % p
        if bit == "1":
            r0, r1 = (r0 * c0 - r1 * c1) % p, (r0 * c1 + r1 * c0) % p
    return r0, r1


def _finv(d, p):
    try:
        return pow(d, -1, p)
    except ValueError:
        raise ZeroEvaluation("line slope undefined") from None


def miller(px, py, qx, qy, r, p):
    """Miller loop for f_{r,P} at the distorted point (-qx, i*qy).

    Vertical lines evaluate into F_p and are dropped; they vanish under the
    final exponentiation.
    """
    f0, f1 = 1, 0
    tx, ty = px, py
    for bit in bin(r)[3:]:
        # tangent at T
        lam = (3 * tx * tx + 1) * _finv(2 * ty, p) % p
        l0 = (lam * (qx + tx) - ty) % p
        f0, f1 = (f0 - f1) * (f0 + f1) % p, 2 * f0 * f1 % p
        f0, f1 = (f0 * l0 - f1 * qy) % p, (f0 * qy + f1 * l0) % p
        x3 = (lam * lam - 2 * tx) % p
        tx, ty = x3, (lam * (tx - x3) - ty) % p
        if bit == "1":
            if tx == px:
                # T = -P: vertical line, T + P = O; only possible on the last bit
                tx = ty = None
                break
            lam = (py - ty) * _finv(px - tx, p) % p
            l0 = (lam * (qx + tx) - ty) % p
            f0, f1 = (f0 * l0 - f1 * qy) % p, (f0 * qy + f1 * l0) % p
            x3 = (lam * lam - tx - px) % p
            tx, ty = x3, (lam * (tx - x3) - ty) % p
    if f0 == 0 and f1 == 0:
        raise ZeroEvaluation("Miller accumulator vanished")
    return f0, f1


def tate(px, py, qx, qy, r, p, final_exp):
    f0, f1 = miller(px, py, qx, qy, r, p)
    return fp2_pow(f0, f1, final_exp, p)


def miller_rabin(n, bases):
    """True iff n is a strong probable prime to every base in ``bases``."""
    if n < 4:
        return n in (2, 3)
    if n % 2 == 0:
        return False
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True

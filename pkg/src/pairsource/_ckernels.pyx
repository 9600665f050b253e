# cython: language_level=3, boundscheck=False, wraparound=False
"""GMP-backed kernels. Mirrors ``_pykernels`` step for step."""

from libc.stdlib cimport malloc, free

from pairsource.errors import NotInvertible, ZeroEvaluation


cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    ctypedef __mpz_struct *mpz_ptr
    ctypedef const __mpz_struct *mpz_srcptr
    ctypedef unsigned long mp_bitcnt_t

    void mpz_init(mpz_t)
    void mpz_clear(mpz_t)
    void mpz_set(mpz_t, const mpz_t)
    void mpz_set_ui(mpz_t, unsigned long)
    void mpz_add(mpz_t, const mpz_t, const mpz_t)
    void mpz_sub(mpz_t, const mpz_t, const mpz_t)
    void mpz_mul(mpz_t, const mpz_t, const mpz_t)
    void mpz_mul_ui(mpz_t, const mpz_t, unsigned long)
    void mpz_mul_2exp(mpz_t, const mpz_t, mp_bitcnt_t)
    void mpz_mod(mpz_t, const mpz_t, const mpz_t)
    int mpz_invert(mpz_t, const mpz_t, const mpz_t)
    void mpz_gcd(mpz_t, const mpz_t, const mpz_t)
    void mpz_powm(mpz_t, const mpz_t, const mpz_t, const mpz_t)
    void mpz_sub_ui(mpz_t, const mpz_t, unsigned long)
    int mpz_cmp(const mpz_t, const mpz_t)
    int mpz_cmp_ui(const mpz_t, unsigned long)
    int mpz_sgn(const mpz_t)
    int mpz_tstbit(const mpz_t, mp_bitcnt_t)
    size_t mpz_sizeinbase(const mpz_t, int)
    mp_bitcnt_t mpz_scan1(const mpz_t, mp_bitcnt_t)
    void mpz_tdiv_q_2exp(mpz_t, const mpz_t, mp_bitcnt_t)
    void mpz_import(mpz_t, size_t, int, size_t, int, size_t, const void *)
    void *mpz_export(void *, size_t *, int, size_t, int, size_t, const mpz_t)


cdef void _load(mpz_t z, object v) except *:
    cdef bytes b
    if v == 0:
        mpz_set_ui(z, 0)
        return
    b = (<object>v).to_bytes(((<object>v).bit_length() + 7) // 8, "big")
    mpz_import(z, len(b), 1, 1, 1, 0, <const char *>b)


cdef object _dump(const mpz_t z):
    cdef size_t count = 0
    cdef size_t nbytes
    cdef unsigned char *buf
    if mpz_sgn(z) == 0:
        return 0
    nbytes = (mpz_sizeinbase(z, 2) + 7) // 8
    buf = <unsigned char *>malloc(nbytes)
    try:
        mpz_export(buf, &count, 1, 1, 1, 0, z)
        return int.from_bytes(buf[:count], "big")
    finally:
        free(buf)


cdef class _Scratch:
    """Temporaries for the affine group law."""
    cdef mpz_t lam, num, den, t, x3, g

    def __cinit__(self):
        mpz_init(self.lam); mpz_init(self.num); mpz_init(self.den)
        mpz_init(self.t); mpz_init(self.x3); mpz_init(self.g)

    def __dealloc__(self):
        mpz_clear(self.lam); mpz_clear(self.num); mpz_clear(self.den)
        mpz_clear(self.t); mpz_clear(self.x3); mpz_clear(self.g)


cdef int _invert_or_raise(_Scratch s, mpz_t out, const mpz_t d, const mpz_t n) except -1:
    if mpz_invert(out, d, n) == 0:
        mpz_gcd(s.g, d, n)
        raise NotInvertible(_dump(s.g))
    return 0


# returns 1 if the result is infinity
cdef int _dbl(_Scratch s, mpz_t x, mpz_t y, const mpz_t a, const mpz_t n) except -1:
    if mpz_sgn(y) == 0:
        return 1
    mpz_mul(s.num, x, x)
    mpz_mul_ui(s.num, s.num, 3)
    mpz_add(s.num, s.num, a)
    mpz_mul_2exp(s.den, y, 1)
    mpz_mod(s.den, s.den, n)
    _invert_or_raise(s, s.den, s.den, n)
    mpz_mul(s.lam, s.num, s.den)
    mpz_mod(s.lam, s.lam, n)
    mpz_mul(s.x3, s.lam, s.lam)
    mpz_sub(s.x3, s.x3, x)
    mpz_sub(s.x3, s.x3, x)
    mpz_mod(s.x3, s.x3, n)
    mpz_sub(s.t, x, s.x3)
    mpz_mul(s.t, s.lam, s.t)
    mpz_sub(s.t, s.t, y)
    mpz_mod(y, s.t, n)
    mpz_set(x, s.x3)
    return 0


cdef int _add(_Scratch s, mpz_t x1, mpz_t y1, const mpz_t x2, const mpz_t y2,
              const mpz_t a, const mpz_t n) except -1:
    if mpz_cmp(x1, x2) == 0:
        if mpz_cmp(y1, y2) == 0:
            return _dbl(s, x1, y1, a, n)
        mpz_add(s.t, y1, y2)
        mpz_mod(s.t, s.t, n)
        if mpz_sgn(s.t) == 0:
            return 1
        raise NotInvertible(_dump(n))
    mpz_sub(s.num, y2, y1)
    mpz_sub(s.den, x2, x1)
    mpz_mod(s.den, s.den, n)
    _invert_or_raise(s, s.den, s.den, n)
    mpz_mul(s.lam, s.num, s.den)
    mpz_mod(s.lam, s.lam, n)
    mpz_mul(s.x3, s.lam, s.lam)
    mpz_sub(s.x3, s.x3, x1)
    mpz_sub(s.x3, s.x3, x2)
    mpz_mod(s.x3, s.x3, n)
    mpz_sub(s.t, x1, s.x3)
    mpz_mul(s.t, s.lam, s.t)
    mpz_sub(s.t, s.t, y1)
    mpz_mod(y1, s.t, n)
    mpz_set(x1, s.x3)
    return 0


def ec_scalar_mult(x, y, k, a, n):
    """Left-to-right double-and-add of k*(x, y) over Z/nZ."""
    if k == 0:
        return None
    cdef _Scratch s = _Scratch()
    cdef mpz_t px, py, rx, ry, za, zn, zk
    cdef int inf = 0
    cdef long i
    mpz_init(px); mpz_init(py); mpz_init(rx); mpz_init(ry)
    mpz_init(za); mpz_init(zn); mpz_init(zk)
    try:
        _load(px, x); _load(py, y); _load(za, a); _load(zn, n); _load(zk, k)
        mpz_set(rx, px); mpz_set(ry, py)
        for i in range(<long>mpz_sizeinbase(zk, 2) - 2, -1, -1):
            if not inf:
                inf = _dbl(s, rx, ry, za, zn)
            if mpz_tstbit(zk, i):
                if inf:
                    mpz_set(rx, px); mpz_set(ry, py)
                    inf = 0
                else:
                    inf = _add(s, rx, ry, px, py, za, zn)
        if inf:
            return None
        return (_dump(rx), _dump(ry))
    finally:
        mpz_clear(px); mpz_clear(py); mpz_clear(rx); mpz_clear(ry)
        mpz_clear(za); mpz_clear(zn); mpz_clear(zk)


cdef class _Fp2Scratch:
    cdef mpz_t a, b, c

    def __cinit__(self):
        mpz_init(self.a); mpz_init(self.b); mpz_init(self.c)

    def __dealloc__(self):
        mpz_clear(self.a); mpz_clear(self.b); mpz_clear(self.c)


cdef inline void _fp2_sqr(_Fp2Scratch s, mpz_t r0, mpz_t r1, const mpz_t p):
    # (r0 - r1)(r0 + r1), 2 r0 r1
    mpz_sub(s.a, r0, r1)
    mpz_add(s.b, r0, r1)
    mpz_mul(s.c, r0, r1)
    mpz_mul(r0, s.a, s.b)
    mpz_mod(r0, r0, p)
    mpz_mul_2exp(r1, s.c, 1)
    mpz_mod(r1, r1, p)


cdef inline void _fp2_mul(_Fp2Scratch s, mpz_t r0, mpz_t r1, const mpz_t c0, const mpz_t c1,
                          const mpz_t p):
    mpz_mul(s.a, r0, c0)
    mpz_mul(s.b, r1, c1)
    mpz_sub(s.a, s.a, s.b)
    mpz_mul(s.b, r0, c1)
    mpz_mul(s.c, r1, c0)
    mpz_add(s.b, s.b, s.c)
    mpz_mod(r0, s.a, p)
    mpz_mod(r1, s.b, p)


cdef void _fp2_pow(_Fp2Scratch s, mpz_t r0, mpz_t r1, const mpz_t c0, const mpz_t c1,
                   const mpz_t e, const mpz_t p):
    cdef long i
    mpz_set_ui(r0, 1)
    mpz_set_ui(r1, 0)
    if mpz_sgn(e) == 0:
        return
    for i in range(<long>mpz_sizeinbase(e, 2) - 1, -1, -1):
        _fp2_sqr(s, r0, r1, p)
        if mpz_tstbit(e, i):
            _fp2_mul(s, r0, r1, c0, c1, p)


def fp2_pow(c0, c1, e, p):
    cdef _Fp2Scratch s = _Fp2Scratch()
    cdef mpz_t z0, z1, r0, r1, ze, zp
    mpz_init(z0); mpz_init(z1); mpz_init(r0); mpz_init(r1); mpz_init(ze); mpz_init(zp)
    try:
        _load(z0, c0); _load(z1, c1); _load(ze, e); _load(zp, p)
        _fp2_pow(s, r0, r1, z0, z1, ze, zp)
        return (_dump(r0), _dump(r1))
    finally:
        mpz_clear(z0); mpz_clear(z1); mpz_clear(r0); mpz_clear(r1)
        mpz_clear(ze); mpz_clear(zp)


cdef int _miller(_Fp2Scratch s, mpz_t f0, mpz_t f1, const mpz_t px, const mpz_t py,
                 const mpz_t qx, const mpz_t qy, const mpz_t r, const mpz_t p) except -1:
    cdef mpz_t tx, ty, lam, l0, x3, t
    cdef long i
    mpz_init(tx); mpz_init(ty); mpz_init(lam); mpz_init(l0); mpz_init(x3); mpz_init(t)
    try:
        mpz_set_ui(f0, 1)
        mpz_set_ui(f1, 0)
        mpz_set(tx, px)
        mpz_set(ty, py)
        for i in range(<long>mpz_sizeinbase(r, 2) - 2, -1, -1):
            # tangent at T
            mpz_mul(lam, tx, tx)
            mpz_mul_ui(lam, lam, 3)
            mpz_set_ui(t, 1)
            mpz_add(lam, lam, t)
            mpz_mul_2exp(t, ty, 1)
            if mpz_invert(t, t, p) == 0:
                raise ZeroEvaluation("tangent slope undefined")
            mpz_mul(lam, lam, t)
            mpz_mod(lam, lam, p)
            mpz_add(l0, qx, tx)
            mpz_mul(l0, lam, l0)
            mpz_sub(l0, l0, ty)
            mpz_mod(l0, l0, p)
            _fp2_sqr(s, f0, f1, p)
            _fp2_mul(s, f0, f1, l0, qy, p)
            mpz_mul(x3, lam, lam)
            mpz_sub(x3, x3, tx)
            mpz_sub(x3, x3, tx)
            mpz_mod(x3, x3, p)
            mpz_sub(t, tx, x3)
            mpz_mul(t, lam, t)
            mpz_sub(t, t, ty)
            mpz_mod(ty, t, p)
            mpz_set(tx, x3)
            if mpz_tstbit(r, i):
                if mpz_cmp(tx, px) == 0:
                    break
                mpz_sub(t, px, tx)
                mpz_mod(t, t, p)
                if mpz_invert(t, t, p) == 0:
                    raise ZeroEvaluation("chord slope undefined")
                mpz_sub(lam, py, ty)
                mpz_mul(lam, lam, t)
                mpz_mod(lam, lam, p)
                mpz_add(l0, qx, tx)
                mpz_mul(l0, lam, l0)
                mpz_sub(l0, l0, ty)
                mpz_mod(l0, l0, p)
                _fp2_mul(s, f0, f1, l0, qy, p)
                mpz_mul(x3, lam, lam)
                mpz_sub(x3, x3, tx)
                mpz_sub(x3, x3, px)
                mpz_mod(x3, x3, p)
                mpz_sub(t, tx, x3)
                mpz_mul(t, lam, t)
                mpz_sub(t, t, ty)
                mpz_mod(ty, t, p)
                mpz_set(tx, x3)
        if mpz_sgn(f0) == 0 and mpz_sgn(f1) == 0:
            raise ZeroEvaluation("Miller accumulator vanished")
        return 0
    finally:
        mpz_clear(tx); mpz_clear(ty); mpz_clear(lam); mpz_clear(l0)
        mpz_clear(x3); mpz_clear(t)


def miller(px, py, qx, qy, r, p):
    cdef _Fp2Scratch s = _Fp2Scratch()
    cdef mpz_t f0, f1, zpx, zpy, zqx, zqy, zr, zp
    mpz_init(f0); mpz_init(f1); mpz_init(zpx); mpz_init(zpy)
    mpz_init(zqx); mpz_init(zqy); mpz_init(zr); mpz_init(zp)
    try:
        _load(zpx, px); _load(zpy, py); _load(zqx, qx); _load(zqy, qy)
        _load(zr, r); _load(zp, p)
        _miller(s, f0, f1, zpx, zpy, zqx, zqy, zr, zp)
        return (_dump(f0), _dump(f1))
    finally:
        mpz_clear(f0); mpz_clear(f1); mpz_clear(zpx); mpz_clear(zpy)
        mpz_clear(zqx); mpz_clear(zqy); mpz_clear(zr); mpz_clear(zp)


def tate(px, py, qx, qy, r, p, final_exp):
    cdef _Fp2Scratch s = _Fp2Scratch()
    cdef mpz_t f0, f1, g0, g1, zpx, zpy, zqx, zqy, zr, zp, ze
    mpz_init(f0); mpz_init(f1); mpz_init(g0); mpz_init(g1)
    mpz_init(zpx); mpz_init(zpy); mpz_init(zqx); mpz_init(zqy)
    mpz_init(zr); mpz_init(zp); mpz_init(ze)
    try:
        _load(zpx, px); _load(zpy, py); _load(zqx, qx); _load(zqy, qy)
        _load(zr, r); _load(zp, p); _load(ze, final_exp)
        _miller(s, f0, f1, zpx, zpy, zqx, zqy, zr, zp)
        _fp2_pow(s, g0, g1, f0, f1, ze, zp)
        return (_dump(g0), _dump(g1))
    finally:
        mpz_clear(f0); mpz_clear(f1); mpz_clear(g0); mpz_clear(g1)
        mpz_clear(zpx); mpz_clear(zpy); mpz_clear(zqx); mpz_clear(zqy)
        mpz_clear(zr); mpz_clear(zp); mpz_clear(ze)


def miller_rabin(n, bases):
    """True iff n is a strong probable prime to every base in ``bases``."""
    if n < 4:
        return n in (2, 3)
    if n % 2 == 0:
        return False
    cdef mpz_t zn, nm1, d, x, za
    cdef mp_bitcnt_t s, j
    cdef bint ok = True
    mpz_init(zn); mpz_init(nm1); mpz_init(d); mpz_init(x); mpz_init(za)
    try:
        _load(zn, n)
        mpz_sub_ui(nm1, zn, 1)
        s = mpz_scan1(nm1, 0)
        mpz_tdiv_q_2exp(d, nm1, s)
        for a in bases:
            _load(za, a)
            mpz_powm(x, za, d, zn)
            if mpz_cmp_ui(x, 1) == 0 or mpz_cmp(x, nm1) == 0:
                continue
            for j in range(s - 1):
                mpz_mul(x, x, x)
                mpz_mod(x, x, zn)
                if mpz_cmp(x, nm1) == 0:
                    break
            else:
                ok = False
                break
        return ok
    finally:
        mpz_clear(zn); mpz_clear(nm1); mpz_clear(d); mpz_clear(x); mpz_clear(za)

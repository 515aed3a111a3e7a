"""Independent numeric oracles used to freeze expected values in the tests.

Everything here is deliberately dumb: plain finite differences and plain
float arithmetic, no use of the symbolic kernel beyond point evaluation.
If the engine and these oracles agree, they agree for different reasons.
"""

import math


def fd_partial(f, x, y, var, h=1e-5):
    """Richardson-extrapolated central difference of f(x, y)."""
    if var == "x":
        d1 = (f(x + h, y) - f(x - h, y)) / (2 * h)
        d2 = (f(x + h / 2, y) - f(x - h / 2, y)) / h
    else:
        d1 = (f(x, y + h) - f(x, y - h)) / (2 * h)
        d2 = (f(x, y + h / 2) - f(x, y - h / 2)) / h
    return (4 * d2 - d1) / 3


def fd_second(f, x, y, var1, var2, h=1e-4):
    """Second partial via nested first differences."""
    def g(a, b):
        return fd_partial(f, a, b, var1, h)
    return fd_partial(g, x, y, var2, h)


def fd_gauss_curvature(g11, g12, g22, x, y, h=1e-4):
    """Gauss curvature of a 2-D metric from Christoffel symbols, all by
    finite differences:  K = R_1212 / det(g).

    The component functions g11, g12, g22 are plain callables (x, y) -> float.
    """

    def gmat(a, b):
        return ((g11(a, b), g12(a, b)), (g12(a, b), g22(a, b)))

    def ginv(a, b):
        (m11, m12), (_, m22) = gmat(a, b)
        d = m11 * m22 - m12 * m12
        return ((m22 / d, -m12 / d), (-m12 / d, m11 / d))

    comps = {(0, 0): g11, (0, 1): g12, (1, 0): g12, (1, 1): g22}

    def dg(i, j, k, a, b):
        # d g_ij / d x^k
        f = comps[(i, j)]
        return fd_partial(f, a, b, "x" if k == 0 else "y", h)

    def christoffel(a, b):
        inv = ginv(a, b)
        gam = [[[0.0, 0.0] for _ in range(2)] for _ in range(2)]
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    s = 0.0
                    for l in range(2):
                        s += inv[i][l] * (dg(l, j, k, a, b) + dg(l, k, j, a, b)
                                          - dg(j, k, l, a, b))
                    gam[i][j][k] = 0.5 * s
        return gam

    def dgamma(i, j, k, wrt, a, b):
        def f(aa, bb):
            return christoffel(aa, bb)[i][j][k]
        return fd_partial(f, a, b, "x" if wrt == 0 else "y", h)

    # R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj}
    #             + Gamma^i_{km} Gamma^m_{lj} - Gamma^i_{lm} Gamma^m_{kj}
    gam = christoffel(x, y)

    def riem_up(i, j, k, l):
        s = dgamma(i, l, j, k, x, y) - dgamma(i, k, j, l, x, y)
        for m in range(2):
            s += gam[i][k][m] * gam[m][l][j] - gam[i][l][m] * gam[m][k][j]
        return s

    (m11, m12), (_, m22) = gmat(x, y)
    det = m11 * m22 - m12 * m12
    # R_1212 = g_1m R^m_212
    r = m11 * riem_up(0, 1, 0, 1) + m12 * riem_up(1, 1, 0, 1)
    return r / det


def _fd_wirtinger(f, x, y, h):
    """f_z = (f_x - i f_y)/2 by Richardson differences; f may be complex."""
    fx = fd_partial(f, x, y, "x", h)
    fy = fd_partial(f, x, y, "y", h)
    return 0.5 * (fx - 1j * fy)


def fd_d0_iso(a, lam, x, y, h=1e-3):
    """Triple weighted z-derivative invariant of an isothermal pair:
    D0 = 4 Re nabla^3 (2 a) with nabla f = f_z - p (ln lam)_z f applied at
    weights p = -3, -2, -1.  a: (x, y) -> complex, lam: (x, y) -> float."""

    def u(xx, yy):
        return math.log(lam(xx, yy))

    def weighted(f, p):
        def out(xx, yy):
            fz = _fd_wirtinger(f, xx, yy, h)
            uz = _fd_wirtinger(u, xx, yy, h)
            return fz - p * uz * f(xx, yy)
        return out

    f = lambda xx, yy: 2.0 * a(xx, yy)
    for p in (-3, -2, -1):
        f = weighted(f, p)
    return 4.0 * f(x, y).real


def fd_d0_null(a1, a2, lam, x, y, h=1e-3):
    """Null-lane analogue: D0 = 2 (nabla_x^3 a1 + nabla_y^3 a2) with
    nabla_x f = f_x - p (ln lam)_x f at weights p = -3, -2, -1 (and the
    y-chain for a2)."""

    def u(xx, yy):
        return math.log(lam(xx, yy))

    def weighted(f, p, var):
        def out(xx, yy):
            fd = fd_partial(f, xx, yy, var, h)
            ud = fd_partial(u, xx, yy, var, h)
            return fd - p * ud * f(xx, yy)
        return out

    fa, fb = a1, a2
    for p in (-3, -2, -1):
        fa = weighted(fa, p, "x")
        fb = weighted(fb, p, "y")
    return 2.0 * (fa(x, y) + fb(x, y))


def poisson_bracket_canonical(f, h, x, y, px, py, step=1e-5):
    """{f, h} in canonical coordinates (x, y, px, py) by finite differences.
    f and h are callables (x, y, px, py) -> float."""

    def d(fun, idx):
        pt = [x, y, px, py]

        def shifted(s):
            q = list(pt)
            q[idx] += s
            return fun(*q)

        d1 = (shifted(step) - shifted(-step)) / (2 * step)
        d2 = (shifted(step / 2) - shifted(-step / 2)) / step
        return (4 * d2 - d1) / 3

    return (d(f, 0) * d(h, 2) - d(f, 2) * d(h, 0)
            + d(f, 1) * d(h, 3) - d(f, 3) * d(h, 1))


def rk4_flow(rhs, state, dt, steps):
    """Fixed-step RK4 integration of state' = rhs(state); returns the list
    of states (including the initial one)."""
    out = [tuple(state)]
    s = list(state)
    for _ in range(steps):
        k1 = rhs(s)
        k2 = rhs([si + 0.5 * dt * k for si, k in zip(s, k1)])
        k3 = rhs([si + 0.5 * dt * k for si, k in zip(s, k2)])
        k4 = rhs([si + dt * k for si, k in zip(s, k3)])
        s = [si + dt / 6.0 * (a + 2 * b + 2 * c + d)
             for si, a, b, c, d in zip(s, k1, k2, k3, k4)]
        out.append(tuple(s))
    return out

"""Compiled inner loops for the constant-curvature section.

The section shape is parameterised by ``z = (s, kx, ky)`` where ``s`` is the
mean actuator length and ``(kx, ky)`` is the bending vector whose norm is the
total bend angle. Both are affine in the actuator lengths, so every quantity
below is a smooth function of ``l``; the straight configuration needs no
special casing beyond switching the two shape functions to their series.
"""

import math

import numpy as np
from numba import njit

SQRT3 = math.sqrt(3.0)

# Below this value of w = (xi * phi)**2 the shape functions use their series.
SERIES_W = 1e-2
# floating-point reassociation without assuming finite values
_FAST = {"reassoc", "contract", "arcp", "nsz"}
_N_SERIES = 8


@njit(cache=True, error_model="numpy")
def shape_functions(w, force_series):
    """Return sinc, versine ratio and their w-derivatives.

    S(w) = sin(u)/u, F(w) = (1 - cos u)/u**2 with u = sqrt(w).
    """
    if force_series or w < SERIES_W:
        S = 0.0
        F = 0.0
        dS = 0.0
        dF = 0.0
        sign = 1.0
        wk = 1.0  # w**k
        wkm1 = 0.0  # w**(k-1)
        fact_odd = 1.0  # (2k+1)!
        fact_even = 2.0  # (2k+2)!
        for k in range(_N_SERIES):
            S += sign * wk / fact_odd
            F += sign * wk / fact_even
            if k > 0:
                dS += sign * k * wkm1 / fact_odd
                dF += sign * k * wkm1 / fact_even
            wkm1 = wk
            wk *= w
            sign = -sign
            fact_odd *= (2 * k + 2) * (2 * k + 3)
            fact_even *= (2 * k + 3) * (2 * k + 4)
        return S, F, dS, dF
    u = math.sqrt(w)
    S = math.sin(u) / u
    h = math.sin(0.5 * u)
    F = 2.0 * h * h / w
    dS = (math.cos(u) - S) / (2.0 * w)
    dF = (S - 2.0 * F) / (2.0 * w)
    return S, F, dS, dF


@njit(cache=True, fastmath=_FAST, error_model="numpy")
def shape_functions2(w):
    """S, F and their first and second w-derivatives."""
    if w < SERIES_W:
        S = F = S1 = F1 = S2 = F2 = 0.0
        sign = 1.0
        fact_odd = 1.0
        fact_even = 2.0
        for k in range(_N_SERIES):
            wk = w**k
            S += sign * wk / fact_odd
            F += sign * wk / fact_even
            if k > 0:
                S1 += sign * k * w ** (k - 1) / fact_odd
                F1 += sign * k * w ** (k - 1) / fact_even
            if k > 1:
                S2 += sign * k * (k - 1) * w ** (k - 2) / fact_odd
                F2 += sign * k * (k - 1) * w ** (k - 2) / fact_even
            sign = -sign
            fact_odd *= (2 * k + 2) * (2 * k + 3)
            fact_even *= (2 * k + 3) * (2 * k + 4)
        return S, F, S1, F1, S2, F2
    u = math.sqrt(w)
    S = math.sin(u) / u
    h = math.sin(0.5 * u)
    F = 2.0 * h * h / w
    S1 = (math.cos(u) - S) / (2.0 * w)
    F1 = (S - 2.0 * F) / (2.0 * w)
    S2 = -(0.5 * S + 3.0 * S1) / (2.0 * w)
    F2 = (S1 - 4.0 * F1) / (2.0 * w)
    return S, F, S1, F1, S2, F2


@njit(cache=True, error_model="numpy")
def shape_coords(l, L0, r):
    s = L0 + (l[0] + l[1] + l[2]) / 3.0
    kx = (-2.0 * l[0] + l[1] + l[2]) / (3.0 * r)
    ky = (l[2] - l[1]) / (SQRT3 * r)
    return s, kx, ky


@njit(cache=True, error_model="numpy")
def coord_jacobian(r):
    """d(s, kx, ky)/dl as a 3x3 matrix (constant)."""
    B = np.empty((3, 3))
    B[0, 0] = B[0, 1] = B[0, 2] = 1.0 / 3.0
    B[1, 0] = -2.0 / (3.0 * r)
    B[1, 1] = B[1, 2] = 1.0 / (3.0 * r)
    B[2, 0] = 0.0
    B[2, 1] = -1.0 / (SQRT3 * r)
    B[2, 2] = 1.0 / (SQRT3 * r)
    return B


@njit(cache=True, error_model="numpy")
def frame(xi, s, kx, ky, force_series):
    """Pose of the disk at ``xi`` and its partials with respect to z.

    Returns P (3,), R (3, 3), dP (3, 3) with dP[:, a] = dP/dz_a and
    dR (3, 3, 3) with dR[a] = dR/dz_a.  R does not depend on s, so dR[0] = 0.
    """
    w = xi * xi * (kx * kx + ky * ky)
    S, F, dS, dF = shape_functions(w, force_series)

    P = np.empty(3)
    P[0] = s * xi * xi * F * kx
    P[1] = s * xi * xi * F * ky
    P[2] = s * xi * S

    # rotation vector omega = xi * (-ky, kx, 0)
    o0 = -xi * ky
    o1 = xi * kx
    om = np.array([o0, o1, 0.0])
    K = np.zeros((3, 3))
    K[0, 2] = o1
    K[1, 2] = -o0
    K[2, 0] = -o1
    K[2, 1] = o0
    K2 = np.outer(om, om)
    for a in range(3):
        K2[a, a] -= w
    R = np.eye(3) + S * K + F * K2

    dP = np.empty((3, 3))
    g = 2.0 * xi * xi
    dP[0, 0] = xi * xi * F * kx
    dP[1, 0] = xi * xi * F * ky
    dP[2, 0] = xi * S
    sx = s * xi
    dP[0, 1] = sx * xi * (F + kx * dF * g * kx)
    dP[1, 1] = sx * xi * ky * dF * g * kx
    dP[2, 1] = sx * dS * g * kx
    dP[0, 2] = sx * xi * kx * dF * g * ky
    dP[1, 2] = sx * xi * (F + ky * dF * g * ky)
    dP[2, 2] = sx * dS * g * ky

    # dR/domega_j for j = 0, 1
    dRo = np.empty((2, 3, 3))
    for j in range(2):
        E = np.zeros((3, 3))
        if j == 0:
            E[1, 2] = -1.0
            E[2, 1] = 1.0
        else:
            E[0, 2] = 1.0
            E[2, 0] = -1.0
        oj = om[j]
        for a in range(3):
            for b in range(3):
                sym = (1.0 if a == j else 0.0) * om[b] + om[a] * (1.0 if b == j else 0.0)
                if a == b:
                    sym -= 2.0 * oj
                dRo[j, a, b] = (2.0 * oj * dS * K[a, b] + S * E[a, b]
                                + 2.0 * oj * dF * K2[a, b] + F * sym)
    dR = np.zeros((3, 3, 3))
    for a in range(3):
        for b in range(3):
            dR[1, a, b] = xi * dRo[1, a, b]
            dR[2, a, b] = -xi * dRo[0, a, b]
    return P, R, dP, dR


@njit(cache=True, error_model="numpy")
def frame_partials_l(xi, l, L0, r, force_series):
    """P, R and their partials with respect to the actuator lengths.

    dPl[:, i] = dP/dl_i and dRl[i] = dR/dl_i.
    """
    s, kx, ky = shape_coords(l, L0, r)
    P, R, dP, dR = frame(xi, s, kx, ky, force_series)
    B = coord_jacobian(r)
    dPl = dP @ B
    dRl = np.zeros((3, 3, 3))
    for i in range(3):
        for a in range(1, 3):
            dRl[i] += dR[a] * B[a, i]
    return P, R, dPl, dRl


@njit(cache=True, error_model="numpy")
def _node_partials(xi, s, kx, ky, B, dPl, dRl):
    """Fill dPl (3, 3) and dRl (3, 3, 3) for one quadrature node, allocation-free."""
    w = xi * xi * (kx * kx + ky * ky)
    S, F, dS, dF = shape_functions(w, False)
    g = 2.0 * xi * xi
    sx = s * xi
    p00 = xi * xi * F * kx
    p10 = xi * xi * F * ky
    p20 = xi * S
    p01 = sx * xi * (F + kx * dF * g * kx)
    p11 = sx * xi * ky * dF * g * kx
    p21 = sx * dS * g * kx
    p02 = sx * xi * kx * dF * g * ky
    p12 = sx * xi * (F + ky * dF * g * ky)
    p22 = sx * dS * g * ky
    for i in range(3):
        b0 = B[0, i]
        b1 = B[1, i]
        b2 = B[2, i]
        dPl[0, i] = p00 * b0 + p01 * b1 + p02 * b2
        dPl[1, i] = p10 * b0 + p11 * b1 + p12 * b2
        dPl[2, i] = p20 * b0 + p21 * b1 + p22 * b2

    o0 = -xi * ky
    o1 = xi * kx
    # skew(omega) with omega_z = 0 and omega omega^T - w I
    K02 = o1
    K12 = -o0
    K20 = -o1
    K21 = o0
    Q00 = o0 * o0 - w
    Q01 = o0 * o1
    Q11 = o1 * o1 - w
    Q22 = -w
    for j in range(2):
        oj = o0 if j == 0 else o1
        c1 = 2.0 * oj * dS
        c2 = 2.0 * oj * dF
        # rows of dR/domega_j
        if j == 0:
            E12 = -1.0
            E21 = 1.0
            E02 = 0.0
            E20 = 0.0
            s00 = 2.0 * o0 - 2.0 * oj
            s01 = o1
            s11 = -2.0 * oj
        else:
            E12 = 0.0
            E21 = 0.0
            E02 = 1.0
            E20 = -1.0
            s00 = -2.0 * oj
            s01 = o0
            s11 = 2.0 * o1 - 2.0 * oj
        s22 = -2.0 * oj
        d00 = c2 * Q00 + F * s00
        d01 = c2 * Q01 + F * s01
        d02 = c1 * K02 + S * E02
        d10 = c2 * Q01 + F * s01
        d11 = c2 * Q11 + F * s11
        d12 = c1 * K12 + S * E12
        d20 = c1 * K20 + S * E20
        d21 = c1 * K21 + S * E21
        d22 = c2 * Q22 + F * s22
        # chain: dR/dkx = xi dR/domega_1, dR/dky = -xi dR/domega_0
        for i in range(3):
            if j == 0:
                f = -xi * B[2, i]
            else:
                f = xi * B[1, i]
            if j == 0:
                dRl[i, 0, 0] = f * d00
                dRl[i, 0, 1] = f * d01
                dRl[i, 0, 2] = f * d02
                dRl[i, 1, 0] = f * d10
                dRl[i, 1, 1] = f * d11
                dRl[i, 1, 2] = f * d12
                dRl[i, 2, 0] = f * d20
                dRl[i, 2, 1] = f * d21
                dRl[i, 2, 2] = f * d22
            else:
                dRl[i, 0, 0] += f * d00
                dRl[i, 0, 1] += f * d01
                dRl[i, 0, 2] += f * d02
                dRl[i, 1, 0] += f * d10
                dRl[i, 1, 1] += f * d11
                dRl[i, 1, 2] += f * d12
                dRl[i, 2, 0] += f * d20
                dRl[i, 2, 1] += f * d21
                dRl[i, 2, 2] += f * d22


@njit(cache=True, error_model="numpy")
def mass_gravity(l, L0, r, m, ixx, g, nodes, weights):
    """Inertia matrix and generalized gravity force by quadrature over xi."""
    s, kx, ky = shape_coords(l, L0, r)
    B = coord_jacobian(r)
    M = np.zeros((3, 3))
    G = np.zeros(3)
    dPl = np.empty((3, 3))
    dRl = np.empty((3, 3, 3))
    for n in range(nodes.shape[0]):
        wn = weights[n]
        _node_partials(nodes[n], s, kx, ky, B, dPl, dRl)
        for j in range(3):
            for k in range(j, 3):
                lin = dPl[0, j] * dPl[0, k] + dPl[1, j] * dPl[1, k] + dPl[2, j] * dPl[2, k]
                # first two diagonal entries of dR_j^T dR_k
                ang = 0.0
                for a in range(3):
                    ang += dRl[j, a, 0] * dRl[k, a, 0] + dRl[j, a, 1] * dRl[k, a, 1]
                M[j, k] += wn * (m * lin + ixx * ang)
            G[j] -= wn * m * g * dPl[2, j]
    for j in range(3):
        for k in range(j):
            M[j, k] = M[k, j]
    return M, G


@njit(cache=True, fastmath=_FAST, error_model="numpy")
def _t2(X, Y):
    """Sum of the first two diagonal entries of X^T Y."""
    acc = 0.0
    for a in range(3):
        acc += X[a, 0] * Y[a, 0] + X[a, 1] * Y[a, 1]
    return acc


@njit(cache=True, fastmath=_FAST, error_model="numpy")
def _node_second(xi, s, kx, ky, dP, ddP, dR, ddR):
    """First and second partials of P and R in z = (s, kx, ky) at one node.

    dP[c, z], ddP[c, z1, z2], dR[z] and ddR[z1, z2].  R does not depend on s;
    the caller zeroes dR[0], ddR[0] and ddR[:, 0] once and they are not touched.
    """
    a = xi * xi
    w = a * (kx * kx + ky * ky)
    S, F, S1, F1, S2, F2 = shape_functions2(w)
    wx = 2.0 * a * kx
    wy = 2.0 * a * ky
    Sx, Sy, Fx, Fy = S1 * wx, S1 * wy, F1 * wx, F1 * wy
    Sxx = S2 * wx * wx + 2.0 * a * S1
    Syy = S2 * wy * wy + 2.0 * a * S1
    Sxy = S2 * wx * wy
    Fxx = F2 * wx * wx + 2.0 * a * F1
    Fyy = F2 * wy * wy + 2.0 * a * F1
    Fxy = F2 * wx * wy

    sa = s * a
    sxi = s * xi
    dP[0, 0] = a * F * kx
    dP[1, 0] = a * F * ky
    dP[2, 0] = xi * S
    dP[0, 1] = sa * (Fx * kx + F)
    dP[1, 1] = sa * Fx * ky
    dP[2, 1] = sxi * Sx
    dP[0, 2] = sa * Fy * kx
    dP[1, 2] = sa * (Fy * ky + F)
    dP[2, 2] = sxi * Sy
    for c in range(3):
        ddP[c, 0, 0] = 0.0
    ddP[0, 0, 1] = a * (Fx * kx + F)
    ddP[1, 0, 1] = a * Fx * ky
    ddP[2, 0, 1] = xi * Sx
    ddP[0, 0, 2] = a * Fy * kx
    ddP[1, 0, 2] = a * (Fy * ky + F)
    ddP[2, 0, 2] = xi * Sy
    ddP[0, 1, 1] = sa * (Fxx * kx + 2.0 * Fx)
    ddP[1, 1, 1] = sa * Fxx * ky
    ddP[2, 1, 1] = sxi * Sxx
    ddP[0, 1, 2] = sa * (Fxy * kx + Fy)
    ddP[1, 1, 2] = sa * (Fxy * ky + Fx)
    ddP[2, 1, 2] = sxi * Sxy
    ddP[0, 2, 2] = sa * Fyy * kx
    ddP[1, 2, 2] = sa * (Fyy * ky + 2.0 * Fy)
    ddP[2, 2, 2] = sxi * Syy
    for c in range(3):
        ddP[c, 1, 0] = ddP[c, 0, 1]
        ddP[c, 2, 0] = ddP[c, 0, 2]
        ddP[c, 2, 1] = ddP[c, 1, 2]

    # R = I + S K + F Q with K = skew(omega), Q = omega omega^T - w I
    #   = -a [[kx^2, kx ky, 0], [kx ky, ky^2, 0], [0, 0, kx^2 + ky^2]]
    kxx = kx * kx
    kyy = ky * ky
    kxy = kx * ky
    # nonzero entries: (0,0) (0,1) (1,0) (1,1) (2,2) from Q, (0,2) (1,2) (2,0) (2,1) from K
    # x partials
    dR[1, 0, 0] = -a * (Fx * kxx + F * 2.0 * kx)
    dR[1, 0, 1] = -a * (Fx * kxy + F * ky)
    dR[1, 1, 1] = -a * Fx * kyy
    dR[1, 2, 2] = -a * (Fx * (kxx + kyy) + F * 2.0 * kx)
    dR[1, 0, 2] = xi * (Sx * kx + S)
    dR[1, 1, 2] = xi * Sx * ky
    # y partials
    dR[2, 0, 0] = -a * Fy * kxx
    dR[2, 0, 1] = -a * (Fy * kxy + F * kx)
    dR[2, 1, 1] = -a * (Fy * kyy + F * 2.0 * ky)
    dR[2, 2, 2] = -a * (Fy * (kxx + kyy) + F * 2.0 * ky)
    dR[2, 0, 2] = xi * Sy * kx
    dR[2, 1, 2] = xi * (Sy * ky + S)
    # second partials
    ddR[1, 1, 0, 0] = -a * (Fxx * kxx + 4.0 * Fx * kx + 2.0 * F)
    ddR[1, 1, 0, 1] = -a * (Fxx * kxy + 2.0 * Fx * ky)
    ddR[1, 1, 1, 1] = -a * Fxx * kyy
    ddR[1, 1, 2, 2] = -a * (Fxx * (kxx + kyy) + 4.0 * Fx * kx + 2.0 * F)
    ddR[1, 1, 0, 2] = xi * (Sxx * kx + 2.0 * Sx)
    ddR[1, 1, 1, 2] = xi * Sxx * ky
    ddR[1, 2, 0, 0] = -a * (Fxy * kxx + 2.0 * Fy * kx)
    ddR[1, 2, 0, 1] = -a * (Fxy * kxy + Fx * kx + Fy * ky + F)
    ddR[1, 2, 1, 1] = -a * (Fxy * kyy + 2.0 * Fx * ky)
    ddR[1, 2, 2, 2] = -a * (Fxy * (kxx + kyy) + 2.0 * Fx * ky + 2.0 * Fy * kx)
    ddR[1, 2, 0, 2] = xi * (Sxy * kx + Sy)
    ddR[1, 2, 1, 2] = xi * (Sxy * ky + Sx)
    ddR[2, 2, 0, 0] = -a * Fyy * kxx
    ddR[2, 2, 0, 1] = -a * (Fyy * kxy + 2.0 * Fy * kx)
    ddR[2, 2, 1, 1] = -a * (Fyy * kyy + 4.0 * Fy * ky + 2.0 * F)
    ddR[2, 2, 2, 2] = -a * (Fyy * (kxx + kyy) + 4.0 * Fy * ky + 2.0 * F)
    ddR[2, 2, 0, 2] = xi * Syy * kx
    ddR[2, 2, 1, 2] = xi * (Syy * ky + 2.0 * Sy)
    for z in range(1, 3):
        # Q part is symmetric, K part skew
        dR[z, 1, 0] = dR[z, 0, 1]
        dR[z, 2, 0] = -dR[z, 0, 2]
        dR[z, 2, 1] = -dR[z, 1, 2]
    for z in range(1, 3):
        for z2 in range(z, 3):
            ddR[z, z2, 1, 0] = ddR[z, z2, 0, 1]
            ddR[z, z2, 2, 0] = -ddR[z, z2, 0, 2]
            ddR[z, z2, 2, 1] = -ddR[z, z2, 1, 2]
    for b in range(3):
        for c in range(3):
            ddR[2, 1, b, c] = ddR[1, 2, b, c]


@njit(cache=True, fastmath=_FAST, error_model="numpy")
def mass_gravity_gradient(l, L0, r, m, ixx, g, nodes, weights):
    """M, G and the exact partials dM[i] = dM/dl_i from second shape derivatives."""
    s, kx, ky = shape_coords(l, L0, r)
    B = coord_jacobian(r)
    Mz = np.zeros((3, 3))
    Gz = np.zeros(3)
    dMz = np.zeros((3, 3, 3))
    dP = np.empty((3, 3))
    ddP = np.empty((3, 3, 3))
    dR = np.zeros((3, 3, 3))
    ddR = np.zeros((3, 3, 3, 3))
    for n in range(nodes.shape[0]):
        wn = weights[n]
        _node_second(nodes[n], s, kx, ky, dP, ddP, dR, ddR)
        wm = wn * m
        wi = wn * ixx
        for a in range(3):
            Gz[a] -= wm * g * dP[2, a]
            for b in range(a, 3):
                Mz[a, b] += wm * (dP[0, a] * dP[0, b] + dP[1, a] * dP[1, b] + dP[2, a] * dP[2, b])
                for c in range(3):
                    dMz[c, a, b] += wm * (
                        ddP[0, a, c] * dP[0, b] + dP[0, a] * ddP[0, b, c]
                        + ddP[1, a, c] * dP[1, b] + dP[1, a] * ddP[1, b, c]
                        + ddP[2, a, c] * dP[2, b] + dP[2, a] * ddP[2, b, c])
        # rotation partials vanish along s
        for a in range(1, 3):
            for b in range(a, 3):
                Mz[a, b] += wi * _t2(dR[a], dR[b])
                for c in range(1, 3):
                    dMz[c, a, b] += wi * (_t2(ddR[a, c], dR[b]) + _t2(dR[a], ddR[b, c]))
    for a in range(3):
        for b in range(a):
            Mz[a, b] = Mz[b, a]
            for c in range(3):
                dMz[c, a, b] = dMz[c, b, a]
    M = B.T @ Mz @ B
    G = B.T @ Gz
    dM = np.zeros((3, 3, 3))
    for c in range(3):
        T = B.T @ dMz[c] @ B
        for i in range(3):
            dM[i] += B[c, i] * T
    return M, G, dM


@njit(cache=True, error_model="numpy")
def mass_gradient(l, L0, r, m, ixx, g, nodes, weights, h):
    """Central-difference partials dM[i] = dM/dl_i."""
    dM = np.empty((3, 3, 3))
    lp = l.copy()
    for i in range(3):
        lp[i] = l[i] + h
        Mp, _ = mass_gravity(lp, L0, r, m, ixx, g, nodes, weights)
        lp[i] = l[i] - h
        Mm, _ = mass_gravity(lp, L0, r, m, ixx, g, nodes, weights)
        lp[i] = l[i]
        dM[i] = (Mp - Mm) / (2.0 * h)
    return dM


@njit(cache=True, error_model="numpy")
def coriolis_from_gradient(dM, qdot):
    """C[k, j] = sum_i Gamma_ijk qdot_i with first-kind Christoffel symbols."""
    C = np.zeros((3, 3))
    for k in range(3):
        for j in range(3):
            acc = 0.0
            for i in range(3):
                acc += 0.5 * (dM[i, k, j] + dM[j, k, i] - dM[k, i, j]) * qdot[i]
            C[k, j] = acc
    return C


@njit(cache=True, error_model="numpy")
def terms(l, qdot, L0, r, m, ixx, g, nodes, weights):
    M, G, dM = mass_gravity_gradient(l, L0, r, m, ixx, g, nodes, weights)
    C = coriolis_from_gradient(dM, qdot)
    return M, C, G, dM


@njit(cache=True, error_model="numpy")
def spd_solve3(M, b):
    """Cholesky solve of a 3x3 symmetric positive definite system."""
    L00 = math.sqrt(M[0, 0])
    L10 = M[1, 0] / L00
    L20 = M[2, 0] / L00
    L11 = math.sqrt(M[1, 1] - L10 * L10)
    L21 = (M[2, 1] - L20 * L10) / L11
    L22 = math.sqrt(M[2, 2] - L20 * L20 - L21 * L21)
    y0 = b[0] / L00
    y1 = (b[1] - L10 * y0) / L11
    y2 = (b[2] - L20 * y0 - L21 * y1) / L22
    x = np.empty(3)
    x[2] = y2 / L22
    x[1] = (y1 - L21 * x[2]) / L11
    x[0] = (y0 - L10 * x[1] - L20 * x[2]) / L00
    return x


@njit(cache=True, error_model="numpy")
def tip_to_actuators(x, y, z, L0, r):
    """Closed-form inverse kinematics; returns NaNs when the tip is unreachable."""
    out = np.empty(3)
    rho = math.hypot(x, y)
    dist = math.sqrt(rho * rho + z * z)
    phi = 2.0 * math.atan2(rho, z)
    if dist == 0.0 or phi >= 2.0 * math.pi:
        out[:] = np.nan
        return out
    theta = math.atan2(y, x)
    half = 0.5 * phi
    s = dist if half < 1e-12 else dist * half / math.sin(half)
    mean_l = s - L0
    for i in range(3):
        out[i] = mean_l - r * phi * math.cos(theta - i * (2.0 * math.pi / 3.0))
        if L0 + out[i] <= 0.0:
            out[:] = np.nan
            return out
    return out


CIRCLE = 0
SPLINE = 1


@njit(cache=True, error_model="numpy")
def desired_tip(t, kind, shape, breaks, coefs):
    """Desired tip position.

    ``kind`` CIRCLE uses shape = (radius, omega, height); SPLINE evaluates the
    piecewise cubic (breaks, coefs) with coefs[k, i] multiplying
    (t - breaks[i])**(3 - k), clamped to the breakpoint span.
    """
    p = np.empty(3)
    if kind == CIRCLE:
        wt = shape[1] * t
        p[0] = shape[0] * math.sin(wt)
        p[1] = shape[0] * math.cos(wt)
        p[2] = shape[2]
        return p
    tc = min(max(t, breaks[0]), breaks[-1])
    i = np.searchsorted(breaks, tc, side="right") - 1
    i = min(max(i, 0), breaks.shape[0] - 2)
    d = tc - breaks[i]
    for c in range(3):
        p[c] = ((coefs[0, i, c] * d + coefs[1, i, c]) * d + coefs[2, i, c]) * d + coefs[3, i, c]
    return p


@njit(cache=True, error_model="numpy")
def reference(t, kind, shape, breaks, coefs, L0, r, h):
    """Tip target and actuator reference with central-difference rates."""
    p = desired_tip(t, kind, shape, breaks, coefs)
    q0 = tip_to_actuators(p[0], p[1], p[2], L0, r)
    pp = desired_tip(t + h, kind, shape, breaks, coefs)
    pm = desired_tip(t - h, kind, shape, breaks, coefs)
    qp = tip_to_actuators(pp[0], pp[1], pp[2], L0, r)
    qm = tip_to_actuators(pm[0], pm[1], pm[2], L0, r)
    return p, q0, (qp - qm) / (2.0 * h), (qp - 2.0 * q0 + qm) / (h * h)

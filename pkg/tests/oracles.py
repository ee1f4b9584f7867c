"""Independent oracles for the test suite.

The symbolic oracle derives the arm's mass matrix, Christoffel matrix and
gravity vector directly from the Cartesian COM positions via the
Euler-Lagrange machinery in sympy, sharing no formulas with the package
(which implements hand-derived closed forms).
"""

from __future__ import annotations

import numpy as np
import sympy as sp

_CACHE = {}


def _lagrangian_functions():
    """Lambdified (M, C, g) of the two-link elastic-joint arm, derived
    symbolically from first principles."""
    if "fns" in _CACHE:
        return _CACHE["fns"]

    q1, q2, d1, d2 = sp.symbols("q1 q2 d1 d2", real=True)
    m1, m2, l1, l2, lc1, lc2, I1, I2 = sp.symbols(
        "m1 m2 l1 l2 lc1 lc2 I1 I2", positive=True)
    g_ip = sp.symbols("g_ip", real=True)

    # COM positions under the package's joint convention: q1 from +y toward
    # +x, q2 folding link 2 back toward -x (absolute link-2 angle q1 - q2)
    x1 = lc1 * sp.sin(q1)
    y1 = lc1 * sp.cos(q1)
    x2 = l1 * sp.sin(q1) + lc2 * sp.sin(q1 - q2)
    y2 = l1 * sp.cos(q1) + lc2 * sp.cos(q1 - q2)

    q = sp.Matrix([q1, q2])
    qd = sp.Matrix([d1, d2])

    def com_velocity_sq(x, y):
        vx = sum(sp.diff(x, q[i]) * qd[i] for i in range(2))
        vy = sum(sp.diff(y, q[i]) * qd[i] for i in range(2))
        return vx ** 2 + vy ** 2

    w1 = d1                # absolute angular rate of link 1
    w2 = d1 - d2           # absolute angular rate of link 2
    T = (m1 * com_velocity_sq(x1, y1) + m2 * com_velocity_sq(x2, y2)) / 2 \
        + (I1 * w1 ** 2 + I2 * w2 ** 2) / 2

    M = sp.Matrix(2, 2, lambda i, j: sp.simplify(
        sp.diff(sp.diff(T, qd[i]), qd[j])))

    # Christoffel symbols of the first kind
    C = sp.zeros(2, 2)
    for i in range(2):
        for j in range(2):
            C[i, j] = sp.simplify(sum(
                sp.Rational(1, 2) * (sp.diff(M[i, j], q[k]) + sp.diff(M[i, k], q[j])
                                     - sp.diff(M[k, j], q[i])) * qd[k]
                for k in range(2)))

    U = g_ip * (m1 * y1 + m2 * y2)
    g_vec = sp.Matrix([sp.simplify(sp.diff(U, q1)), sp.simplify(sp.diff(U, q2))])

    args = (q1, q2, d1, d2, m1, m2, l1, l2, lc1, lc2, I1, I2, g_ip)
    fns = (sp.lambdify(args, M, "numpy"),
           sp.lambdify(args, C, "numpy"),
           sp.lambdify(args, g_vec, "numpy"))
    _CACHE["fns"] = fns
    return fns


def _args(params, theta, theta_dot=(0.0, 0.0)):
    import math
    return (float(theta[0]), float(theta[1]),
            float(theta_dot[0]), float(theta_dot[1]),
            params.m1, params.m2, params.l1, params.l2,
            params.lc1, params.lc2, params.I1, params.I2,
            params.g0 * math.sin(params.alpha))


def oracle_mass_matrix(params, theta) -> np.ndarray:
    fM, _, _ = _lagrangian_functions()
    return np.asarray(fM(*_args(params, theta)), dtype=float)


def oracle_coriolis(params, theta, theta_dot) -> np.ndarray:
    _, fC, _ = _lagrangian_functions()
    return np.asarray(fC(*_args(params, theta, theta_dot)), dtype=float)


def oracle_gravity(params, theta) -> np.ndarray:
    _, _, fg = _lagrangian_functions()
    return np.asarray(fg(*_args(params, theta)), dtype=float).ravel()


def oracle_forward_dynamics(params, state, tau_m, tau_ext):
    """Forms both equations of motion explicitly from the symbolic matrices
    and solves each side by plain 2x2 inversion."""
    M = oracle_mass_matrix(params, state.theta)
    C = oracle_coriolis(params, state.theta, state.theta_dot)
    g = oracle_gravity(params, state.theta)
    transmission = np.asarray(state.k) * (state.theta - state.phi) \
        + np.asarray(params.c_s) * (state.theta_dot - state.phi_dot)
    tau_m = np.clip(np.asarray(tau_m, dtype=float), -params.tau_max, params.tau_max)
    rhs_link = (np.asarray(tau_ext, dtype=float) - C @ state.theta_dot - g
                - transmission - np.asarray(params.b_l) * state.theta_dot)
    th_dd = np.linalg.inv(M) @ rhs_link
    M2 = np.diag([params.J1, params.J2])
    rhs_motor = tau_m + transmission - np.asarray(params.b_m) * state.phi_dot
    ph_dd = np.linalg.inv(M2) @ rhs_motor
    return th_dd, ph_dd


def oracle_momentum(params, state) -> np.ndarray:
    M = oracle_mass_matrix(params, state.theta)
    return M @ state.theta_dot + np.array([params.J1, params.J2]) * state.phi_dot


def oracle_beta(params, theta, theta_dot) -> np.ndarray:
    C = oracle_coriolis(params, theta, theta_dot)
    return oracle_gravity(params, theta) - C.T @ np.asarray(theta_dot, dtype=float)


def finite_difference_jacobian(f, x, eps=1e-6):
    """Central finite differences of a vector function of a vector."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x), dtype=float)
    J = np.zeros((len(f0), len(x)))
    for j in range(len(x)):
        dx = np.zeros_like(x)
        dx[j] = eps
        J[:, j] = (np.asarray(f(x + dx)) - np.asarray(f(x - dx))) / (2 * eps)
    return J


def mass_matrix_time_derivative(params, theta, theta_dot, eps=1e-5):
    """dM/dt along a trajectory via central differences of the oracle-free
    path (uses the package mass matrix; used for the skew-symmetry check)."""
    from vsarm.dynamics import mass_matrix
    th = np.asarray(theta, dtype=float)
    d = np.asarray(theta_dot, dtype=float)
    return (mass_matrix(params, th + eps * d) - mass_matrix(params, th - eps * d)) \
        / (2 * eps)


def linear_oscillator_frequency(params, k: float, theta2: float, joint: int = 0) -> float:
    """Closed-form deflection-mode frequency of the clamped single-joint
    two-inertia-spring system: sqrt(k (1/M_eff + 1/J))."""
    from vsarm.dynamics import mass_matrix
    M = mass_matrix(params, np.array([0.0, theta2]))
    M_eff = M[joint, joint]
    J = (params.J1, params.J2)[joint]
    return float(np.sqrt(k * (1.0 / M_eff + 1.0 / J)))

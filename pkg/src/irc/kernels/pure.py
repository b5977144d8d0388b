"""Pure-numpy kernels: the reference implementation of the hot loops.

Four entry points, mirrored exactly by the compiled core:

``rollout_discrete``    one 1D episode under a Boltzmann Q policy
``rollout_continuous``  one 2D episode under an actor net with EKF beliefs
``loglik_discrete``     dataset log-likelihood + gradient, 1D task
``loglik_continuous``   dataset log-likelihood + gradient, 2D task

All randomness is pre-drawn by the caller and passed in as arrays, so a
given call is a pure function and both backends consume identical random
streams.  Gradients are returned with respect to the *natural* parameter
units; callers apply transform chain rules.

Conventions shared with the compiled core:

* discrete Q values are ``q_a = sum_k wq_k * softplus(V2f_k . feat + offs_k[a])``
  where ``wq`` folds the basis readout, ensemble weight matrix, and the
  parameter-basis vector into one weight per hidden unit;
* belief covariances are symmetrized after every update (no eigenvalue
  clamping inside kernels; the position/velocity structure keeps them PSD,
  and innovation covariances carry a 1e-12 diagonal floor);
* the belief, including its variance growth, is advanced on every step,
  stop steps included, so rollout records and likelihood reconstructions
  follow identical recursions.
"""

from __future__ import annotations

import numpy as np

from ..beliefs import FEATURE_VAR_FLOOR
from ..nets import sigmoid, softplus

LOG_2PI = float(np.log(2.0 * np.pi))
S_FLOOR = 1e-12

# 2D state layout (kept local so kernels do not import task modules).
_X, _Y, _PHI, _V, _W = 0, 1, 2, 3, 4
_DIRS = np.array([-1.0, 1.0, 0.0])

_TRI_I, _TRI_J = np.triu_indices(5)
N_TRI = 15
FEAT_DIM_2D = 5 + N_TRI


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def unpack_net(sizes: np.ndarray, wflat: np.ndarray, bflat: np.ndarray):
    """Packed layer stack -> list of (W, b); W shaped (out, in)."""
    Ws, bs = [], []
    kw = kb = 0
    for i in range(len(sizes) - 1):
        fi, fo = int(sizes[i]), int(sizes[i + 1])
        Ws.append(wflat[kw : kw + fo * fi].reshape(fo, fi))
        bs.append(bflat[kb : kb + fo])
        kw += fo * fi
        kb += fo
    return Ws, bs


def _actor_forward(Ws, bs, x):
    """Softplus hidden layers, tanh head; returns output and caches."""
    h = x
    pres, posts, ins = [], [], []
    last = len(Ws) - 1
    for i, (W, b) in enumerate(zip(Ws, bs)):
        ins.append(h)
        pre = W @ h + b
        post = np.tanh(pre) if i == last else softplus(pre)
        pres.append(pre)
        posts.append(post)
        h = post
    return h, (ins, pres, posts)


def _actor_grad_input(Ws, cache, upstream):
    """d(sum(upstream * output))/d(input) for a cached forward pass."""
    ins, pres, posts = cache
    last = len(Ws) - 1
    delta = upstream * (1.0 - posts[last] ** 2)
    for i in range(last, 0, -1):
        delta = (delta @ Ws[i]) * sigmoid(pres[i - 1])
    return delta @ Ws[0]


def belief_feat_2d(m: np.ndarray, P: np.ndarray) -> np.ndarray:
    feat = np.empty(FEAT_DIM_2D)
    feat[:5] = m
    tri = P[_TRI_I, _TRI_J].copy()
    diag = _TRI_I == _TRI_J
    tri[diag] = np.log(np.maximum(tri[diag], FEATURE_VAR_FLOOR))
    feat[5:] = tri
    return feat


def _predict_2d(m, P, a, g_v, g_w, sigma0, dt):
    """EKF time update; returns (m', P', F, v') -- no conditioning beyond structure."""
    v = g_v * a[0]
    w = g_w * a[1]
    c, sn = np.cos(m[_PHI]), np.sin(m[_PHI])
    m2 = np.empty(5)
    m2[_X] = m[_X] - dt * v * c
    m2[_Y] = m[_Y] - dt * v * sn
    m2[_PHI] = m[_PHI] + dt * w
    m2[_V] = v
    m2[_W] = w
    F = np.zeros((5, 5))
    F[_X, _X] = F[_Y, _Y] = F[_PHI, _PHI] = 1.0
    F[_X, _PHI] = dt * v * sn
    F[_Y, _PHI] = -dt * v * c
    P2 = F @ P @ F.T
    P2[_X, _X] += sigma0 * sigma0
    P2[_Y, _Y] += sigma0 * sigma0
    P2 = 0.5 * (P2 + P2.T)
    return m2, P2, F, v


def _update_2d(m, P, o, obs_std):
    """Joseph-form measurement update with the (v, w) selector."""
    r2 = obs_std * obs_std
    S = P[3:5, 3:5].copy()
    S[0, 0] += r2 + S_FLOOR
    S[1, 1] += r2 + S_FLOOR
    det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    Sinv = np.array([[S[1, 1], -S[0, 1]], [-S[1, 0], S[0, 0]]]) / det
    K = P[:, 3:5] @ Sinv
    innov = o - m[3:5]
    m2 = m + K @ innov
    A = np.eye(5)
    A[:, 3] -= K[:, 0]
    A[:, 4] -= K[:, 1]
    P2 = A @ P @ A.T + r2 * (K @ K.T)
    P2 = 0.5 * (P2 + P2.T)
    return m2, P2


# ---------------------------------------------------------------------------
# 1D rollout
# ---------------------------------------------------------------------------


def rollout_discrete(
    x0: float,
    mu0: float,
    var0: float,
    g_a: float,
    sigma0: float,
    beta: float,
    V2f: np.ndarray,
    offs: np.ndarray,
    wq: np.ndarray,
    radius: float,
    hit_reward: float,
    action_cost: float,
    horizon: int,
    eps: np.ndarray,
    us: np.ndarray,
):
    """One episode; returns (xs, acts, rewards, mus, vars, stopped)."""
    xs = np.empty(horizon + 1)
    mus = np.empty(horizon + 1)
    vars_ = np.empty(horizon + 1)
    acts = np.empty(horizon, dtype=np.int64)
    rews = np.empty(horizon)
    xs[0], mus[0], vars_[0] = x0, mu0, var0
    var_growth = sigma0 * sigma0
    stopped = False
    T = horizon
    for t in range(horizon):
        feat = np.array([mus[t], np.log(vars_[t])])
        q = (softplus(V2f @ feat + offs.T)).T.T @ wq if False else None
        # explicit per-action eval keeps the same op order as the compiled core
        pre = V2f @ feat
        q = np.array([wq @ softplus(pre + offs[:, a]) for a in range(3)])
        z = beta * (q - q.max())
        p = np.exp(z)
        p /= p.sum()
        u = us[t]
        a = 0 if u < p[0] else (1 if u < p[0] + p[1] else 2)
        acts[t] = a
        if a == 2:
            rews[t] = hit_reward if abs(xs[t]) <= radius else 0.0
            xs[t + 1] = xs[t]
            stopped = True
        else:
            rews[t] = -action_cost
            xs[t + 1] = xs[t] + g_a * _DIRS[a] + sigma0 * eps[t]
        mus[t + 1] = mus[t] + g_a * _DIRS[a]
        vars_[t + 1] = vars_[t] + var_growth
        if stopped:
            T = t + 1
            break
    n = T + 1
    return xs[:n], acts[:T], rews[:T], mus[:n], vars_[:n], stopped


# ---------------------------------------------------------------------------
# 1D log-likelihood + gradient (vectorized over all steps)
# ---------------------------------------------------------------------------


def loglik_discrete(
    mu0: np.ndarray,
    A: np.ndarray,
    tstep: np.ndarray,
    act: np.ndarray,
    dx: np.ndarray,
    is_move: np.ndarray,
    var0: float,
    g_a: float,
    sigma0: float,
    beta: float,
    V2f: np.ndarray,
    offs: np.ndarray,
    wq: np.ndarray,
    wgnat: np.ndarray,
    want_grad: bool,
):
    """Summed log-likelihood over flattened steps; grad w.r.t. (g_a, sigma0)."""
    N = mu0.shape[0]
    L = 0.0
    g0 = 0.0
    g1 = 0.0
    var = sigma0 * sigma0
    # transition terms (move steps only)
    mv = is_move.astype(bool)
    e = dx[mv] - g_a * _DIRS[act[mv]]
    L += float(np.sum(-0.5 * LOG_2PI - np.log(sigma0) - e * e / (2.0 * var)))
    if want_grad:
        g0 += float(np.sum(e * _DIRS[act[mv]] / var))
        g1 += float(np.sum((-1.0 + e * e / var) / sigma0))

    # policy terms, chunked to bound the (chunk, 3, n_units) intermediates
    sig2 = var0 + tstep * var
    mu = mu0 + g_a * A
    chunk = 2048
    for lo in range(0, N, chunk):
        hi = min(lo + chunk, N)
        feat = np.stack([mu[lo:hi], np.log(sig2[lo:hi])], axis=1)  # (C,2)
        base = feat @ V2f.T  # (C,n_units)
        pre = base[:, None, :] + offs.T[None, :, :]  # (C,3,n_units)
        sp = softplus(pre)
        q = sp @ wq  # (C,3)
        zq = beta * q
        zmax = zq.max(axis=1, keepdims=True)
        ez = np.exp(zq - zmax)
        sez = ez.sum(axis=1)
        arows = np.arange(hi - lo)
        aidx = act[lo:hi]
        L += float(np.sum(zq[arows, aidx] - zmax[:, 0] - np.log(sez)))
        if want_grad:
            pi = ez / sez[:, None]
            sg = sigmoid(pre)
            dq_feat = np.einsum("cak,k,kf->caf", sg, wq, V2f)  # (C,3,2)
            dq_th = sp @ wgnat  # (C,3,2) theta-input path
            dfeat = np.zeros((hi - lo, 2, 2))
            dfeat[:, 0, 0] = A[lo:hi]
            dfeat[:, 1, 1] = 2.0 * tstep[lo:hi] * sigma0 / sig2[lo:hi]
            dq = np.einsum("caf,cfm->cam", dq_feat, dfeat) + dq_th  # (C,3,2)
            dlp = beta * (dq[arows, aidx] - np.einsum("ca,cam->cm", pi, dq))
            g0 += float(np.sum(dlp[:, 0]))
            g1 += float(np.sum(dlp[:, 1]))
    return L, np.array([g0, g1])


# ---------------------------------------------------------------------------
# 2D rollout
# ---------------------------------------------------------------------------


def rollout_continuous(
    s0: np.ndarray,
    m0: np.ndarray,
    P0: np.ndarray,
    dt: float,
    g_v: float,
    g_w: float,
    sigma0: float,
    obs_std: float,
    stop_threshold: float,
    radius: float,
    hit_reward: float,
    action_cost: float,
    horizon: int,
    uvec: np.ndarray,
    sizes: np.ndarray,
    wflat: np.ndarray,
    bflat: np.ndarray,
    act_noise: np.ndarray,
    weps: np.ndarray,
    oeps: np.ndarray,
):
    """One 2D episode; returns (states, acts, rewards, obs, bmeans, bcovs, stopped)."""
    Ws, bs = unpack_net(sizes, wflat, bflat)
    states = np.empty((horizon + 1, 5))
    bmeans = np.empty((horizon + 1, 5))
    bcovs = np.empty((horizon + 1, 5, 5))
    acts = np.empty((horizon, 2))
    rews = np.empty(horizon)
    obs = np.empty((horizon, 2))
    states[0] = s0
    bmeans[0] = m0
    bcovs[0] = P0
    stopped = False
    T = horizon
    for t in range(horizon):
        feat = belief_feat_2d(bmeans[t], bcovs[t])
        a_mean, _ = _actor_forward(Ws, bs, np.concatenate([feat, uvec]))
        a = np.clip(a_mean + act_noise[t], -1.0, 1.0)
        acts[t] = a
        s = states[t]
        if max(abs(a[0]), abs(a[1])) < stop_threshold:
            hit = np.hypot(s[_X], s[_Y]) <= radius
            rews[t] = hit_reward if hit else 0.0
            states[t + 1] = s
            stopped = True
        else:
            v = g_v * a[0]
            w = g_w * a[1]
            c, sn = np.cos(s[_PHI]), np.sin(s[_PHI])
            nxt = np.empty(5)
            nxt[_X] = s[_X] - dt * v * c + sigma0 * weps[t, 0]
            nxt[_Y] = s[_Y] - dt * v * sn + sigma0 * weps[t, 1]
            phi = s[_PHI] + dt * w
            phi = np.remainder(phi + np.pi, 2.0 * np.pi) - np.pi
            nxt[_PHI] = np.pi if phi == -np.pi else phi
            nxt[_V] = v
            nxt[_W] = w
            states[t + 1] = nxt
            rews[t] = -action_cost
        obs[t] = states[t + 1, 3:5] + obs_std * oeps[t]
        m2, P2, _, _ = _predict_2d(bmeans[t], bcovs[t], a, g_v, g_w, sigma0, dt)
        m2, P2 = _update_2d(m2, P2, obs[t], obs_std)
        bmeans[t + 1] = m2
        bcovs[t + 1] = P2
        if stopped:
            T = t + 1
            break
    n = T + 1
    return states[:n], acts[:T], rews[:T], obs[:T], bmeans[:n], bcovs[:n], stopped


# ---------------------------------------------------------------------------
# 2D log-likelihood + gradient (sequential EKF with tangent propagation)
# ---------------------------------------------------------------------------


def loglik_continuous(
    offsets: np.ndarray,
    states: np.ndarray,
    actions: np.ndarray,
    is_move: np.ndarray,
    m0s: np.ndarray,
    P0: np.ndarray,
    dt: float,
    g_v: float,
    g_w: float,
    sigma0: float,
    sigma_pi: float,
    obs_std: float,
    uvec: np.ndarray,
    dunat: np.ndarray,
    sizes: np.ndarray,
    wflat: np.ndarray,
    bflat: np.ndarray,
    want_grad: bool,
):
    """Dataset log-likelihood; gradient w.r.t. (g_v, g_w, sigma0) natural units.

    ``offsets`` delimits each trajectory's action rows in ``actions``;
    trajectory i owns states rows offsets[i]+i .. offsets[i+1]+i (one extra
    state per trajectory).  MAP observations are the recorded (v, w) of the
    arrival state.
    """
    Ws, bs = unpack_net(sizes, wflat, bflat)
    n_traj = offsets.shape[0] - 1
    var = sigma0 * sigma0
    spi2 = sigma_pi * sigma_pi
    L = 0.0
    grad = np.zeros(3)
    for i in range(n_traj):
        a_lo, a_hi = int(offsets[i]), int(offsets[i + 1])
        T = a_hi - a_lo
        s_lo = a_lo + i
        m = m0s[i].copy()
        P = P0.copy()
        dm = np.zeros((3, 5))
        dP = np.zeros((3, 5, 5))
        for t in range(T):
            s_t = states[s_lo + t]
            s_n = states[s_lo + t + 1]
            a = actions[a_lo + t]
            # policy term
            feat = belief_feat_2d(m, P)
            x_in = np.concatenate([feat, uvec])
            pred, cache = _actor_forward(Ws, bs, x_in)
            resid = a - pred
            L += float(-LOG_2PI - 2.0 * np.log(sigma_pi) - (resid @ resid) / (2.0 * spi2))
            if want_grad:
                gin = _actor_grad_input(Ws, cache, resid / spi2)
                dfeat = np.empty((3, FEAT_DIM_2D))
                dfeat[:, :5] = dm
                tri = dP[:, _TRI_I, _TRI_J].copy()
                diag = _TRI_I == _TRI_J
                pdiag = P[_TRI_I[diag], _TRI_J[diag]]
                live = pdiag > FEATURE_VAR_FLOOR
                tri[:, diag] = np.where(live, tri[:, diag] / np.maximum(pdiag, FEATURE_VAR_FLOOR), 0.0)
                dfeat[:, 5:] = tri
                grad += dfeat @ gin[:FEAT_DIM_2D]
                grad += gin[FEAT_DIM_2D:] * dunat
            # transition term
            if is_move[a_lo + t]:
                c, sn = np.cos(s_t[_PHI]), np.sin(s_t[_PHI])
                ex = s_n[_X] - s_t[_X] + dt * g_v * a[0] * c
                ey = s_n[_Y] - s_t[_Y] + dt * g_v * a[1] * sn if False else s_n[_Y] - s_t[_Y] + dt * g_v * a[0] * sn
                L += float(-LOG_2PI - 2.0 * np.log(sigma0) - (ex * ex + ey * ey) / (2.0 * var))
                if want_grad:
                    grad[0] += -(dt * a[0]) * (ex * c + ey * sn) / var
                    grad[2] += -2.0 / sigma0 + (ex * ex + ey * ey) / (var * sigma0)
            if t == T - 1:
                break
            # belief step with tangents
            if want_grad:
                m, P, dm, dP = _predict_update_tangent(
                    m, P, dm, dP, a, s_n[3:5], g_v, g_w, sigma0, obs_std, dt
                )
            else:
                m, P, _, _ = _predict_2d(m, P, a, g_v, g_w, sigma0, dt)
                m, P = _update_2d(m, P, s_n[3:5], obs_std)
    return L, grad


def _predict_update_tangent(m, P, dm, dP, a, o, g_v, g_w, sigma0, obs_std, dt):
    """One EKF step carrying d(mean)/d(theta) and d(cov)/d(theta)."""
    c, sn = np.cos(m[_PHI]), np.sin(m[_PHI])
    v = g_v * a[0]
    # dv[j] = d(v') / d theta_j, theta = (g_v, g_w, sigma0)
    dv = np.array([a[0], 0.0, 0.0])
    dw = np.array([0.0, a[1], 0.0])
    dphi = dm[:, _PHI]

    m2 = np.empty(5)
    m2[_X] = m[_X] - dt * v * c
    m2[_Y] = m[_Y] - dt * v * sn
    m2[_PHI] = m[_PHI] + dt * g_w * a[1]
    m2[_V] = v
    m2[_W] = g_w * a[1]
    dm2 = np.empty((3, 5))
    dm2[:, _X] = dm[:, _X] - dt * (dv * c - v * sn * dphi)
    dm2[:, _Y] = dm[:, _Y] - dt * (dv * sn + v * c * dphi)
    dm2[:, _PHI] = dphi + dt * dw
    dm2[:, _V] = dv
    dm2[:, _W] = dw

    F = np.zeros((5, 5))
    F[_X, _X] = F[_Y, _Y] = F[_PHI, _PHI] = 1.0
    F[_X, _PHI] = dt * v * sn
    F[_Y, _PHI] = -dt * v * c
    dF = np.zeros((3, 5, 5))
    dF[:, _X, _PHI] = dt * (dv * sn + v * c * dphi)
    dF[:, _Y, _PHI] = -dt * (dv * c - v * sn * dphi)

    FP = F @ P
    P2 = FP @ F.T
    P2[_X, _X] += sigma0 * sigma0
    P2[_Y, _Y] += sigma0 * sigma0
    dP2 = np.empty((3, 5, 5))
    for j in range(3):
        M = dF[j] @ P @ F.T
        dP2[j] = M + M.T + F @ dP[j] @ F.T
    dP2[2, _X, _X] += 2.0 * sigma0
    dP2[2, _Y, _Y] += 2.0 * sigma0
    P2 = 0.5 * (P2 + P2.T)
    dP2 = 0.5 * (dP2 + np.transpose(dP2, (0, 2, 1)))

    # measurement update
    r2 = obs_std * obs_std
    S = P2[3:5, 3:5].copy()
    S[0, 0] += r2 + S_FLOOR
    S[1, 1] += r2 + S_FLOOR
    det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    Sinv = np.array([[S[1, 1], -S[0, 1]], [-S[1, 0], S[0, 0]]]) / det
    K = P2[:, 3:5] @ Sinv
    innov = o - m2[3:5]
    m3 = m2 + K @ innov
    A = np.eye(5)
    A[:, 3] -= K[:, 0]
    A[:, 4] -= K[:, 1]
    P3 = A @ P2 @ A.T + r2 * (K @ K.T)
    P3 = 0.5 * (P3 + P3.T)

    dm3 = np.empty((3, 5))
    dP3 = np.empty((3, 5, 5))
    for j in range(3):
        dS = dP2[j, 3:5, 3:5]
        dSinv = -Sinv @ dS @ Sinv
        dK = dP2[j][:, 3:5] @ Sinv + P2[:, 3:5] @ dSinv
        dm3[j] = dm2[j] + dK @ innov - K @ dm2[j, 3:5]
        dA = np.zeros((5, 5))
        dA[:, 3] = -dK[:, 0]
        dA[:, 4] = -dK[:, 1]
        M = dA @ P2 @ A.T
        N = r2 * (dK @ K.T)
        dP3j = M + M.T + A @ dP2[j] @ A.T + N + N.T
        dP3[j] = 0.5 * (dP3j + dP3j.T)
    return m3, P3, dm3, dP3

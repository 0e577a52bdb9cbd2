"""Recurrent network with parametric biases (PB).

One shared-weight Jordan-style network abstracts every learned pattern; a
small per-sequence PB vector selects which pattern the network predicts.
The input layer concatenates the current channel row, the PB vector and
the fed-back context units; one sigmoid hidden layer drives two sigmoid
output blocks (next channel row, next context).

A sequence is a matrix of R >= 2 rows; the network learns the R-1
transitions between consecutive rows. Training is open loop (teacher
forced) over whole sequences with batch gradient descent; recognition
trains only the PB potentials with frozen weights; generation is the
closed-loop rollout that feeds each prediction back as the next input.

Everything is plain float64 numpy and deterministic for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import NetConfig
from .errors import DivergenceError

CONTEXT_INIT = 0.5
PB_POTENTIAL_INIT = 0.0
WEIGHT_INIT_RANGE = 0.1


def sigmoid(x):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


@dataclass
class NetWeights:
    w_in: np.ndarray   # (io+pb+context, hidden)
    b_h: np.ndarray    # (hidden,)
    w_out: np.ndarray  # (hidden, io)
    b_out: np.ndarray  # (io,)
    w_ctx: np.ndarray  # (hidden, context)
    b_ctx: np.ndarray  # (context,)

    def copy(self) -> "NetWeights":
        return NetWeights(*(a.copy() for a in self.as_tuple()))

    def as_tuple(self):
        return (self.w_in, self.b_h, self.w_out, self.b_out, self.w_ctx, self.b_ctx)

    @property
    def io_dim(self) -> int:
        return self.w_out.shape[1]

    @property
    def context_dim(self) -> int:
        return self.w_ctx.shape[1]

    @property
    def pb_dim(self) -> int:
        return self.w_in.shape[0] - self.io_dim - self.context_dim

    @property
    def hidden_dim(self) -> int:
        return self.b_h.shape[0]


def init_weights(cfg: NetConfig, seed=None) -> NetWeights:
    """Uniform [-0.1, 0.1] initialization from the seeded generator.

    ``seed`` overrides cfg.rng_seed (used for deterministic restarts).
    """
    rng = np.random.default_rng(cfg.rng_seed if seed is None else seed)
    in_dim = cfg.io_dim + cfg.pb_dim + cfg.context_dim
    r = WEIGHT_INIT_RANGE

    def draw(*shape):
        return rng.uniform(-r, r, size=shape)

    return NetWeights(
        w_in=draw(in_dim, cfg.hidden_dim),
        b_h=draw(cfg.hidden_dim),
        w_out=draw(cfg.hidden_dim, cfg.io_dim),
        b_out=draw(cfg.io_dim),
        w_ctx=draw(cfg.hidden_dim, cfg.context_dim),
        b_ctx=draw(cfg.context_dim),
    )


def forward_step(w: NetWeights, x_t, pb, c_t):
    """One open-loop step: returns (next row prediction, next context, hidden)."""
    a = np.concatenate([x_t, pb, c_t])
    h = sigmoid(a @ w.w_in + w.b_h)
    x_next = sigmoid(h @ w.w_out + w.b_out)
    c_next = sigmoid(h @ w.w_ctx + w.b_ctx)
    return x_next, c_next, h


def _pack(sequences, io_dim):
    """Pad sequences into (X, Y, mask, norm) batch tensors."""
    if not sequences:
        raise ValueError("empty sequence batch")
    n = len(sequences)
    lengths = []
    for s in sequences:
        s = np.asarray(s)
        if s.ndim != 2 or s.shape[1] != io_dim:
            raise ValueError(f"sequence must be (rows, {io_dim}), got {s.shape}")
        if s.shape[0] < 2:
            raise ValueError("sequence needs at least 2 rows (one transition)")
        if not np.all(np.isfinite(s)):
            raise ValueError("sequence contains non-finite values")
        lengths.append(s.shape[0])
    t_max = max(lengths) - 1
    X = np.zeros((n, t_max, io_dim))
    Y = np.zeros((n, t_max, io_dim))
    mask = np.zeros((n, t_max))
    for i, s in enumerate(sequences):
        t_i = lengths[i] - 1
        X[i, :t_i] = s[:-1]
        Y[i, :t_i] = s[1:]
        mask[i, :t_i] = 1.0
    norm = (np.array(lengths, dtype=float) - 1.0) * io_dim
    return X, Y, mask, norm


def _forward_batch(w: NetWeights, X, Y, mask, norm, pb, blend=0.0):
    """Forward pass; returns per-sequence mean MSE and activation caches.

    ``blend`` mixes the net's own fed-back prediction into each input row:
    the input at step t > 0 is (1-blend) * teacher row + blend * previous
    prediction (step 0 always takes the given start row). blend=0 is pure
    teacher forcing; blend=1 reproduces the closed-loop rollout. Training
    with some feedback makes the rollout itself the thing optimized, which
    is what keeps regeneration from drifting off the pattern.
    """
    n, t_max, _ = X.shape
    c = np.full((n, w.context_dim), CONTEXT_INIT)
    x = X[:, 0]
    hs, xhs, cs, xins = [], [], [c], []
    per_seq = np.zeros(n)
    for t in range(t_max):
        a = np.hstack([x, pb, c])
        h = sigmoid(a @ w.w_in + w.b_h)
        xh = sigmoid(h @ w.w_out + w.b_out)
        c = sigmoid(h @ w.w_ctx + w.b_ctx)
        err = xh - Y[:, t]
        per_seq += mask[:, t] * np.sum(err * err, axis=1)
        xins.append(x)
        hs.append(h)
        xhs.append(xh)
        cs.append(c)
        if t + 1 < t_max:
            x = (1.0 - blend) * X[:, t + 1] + blend * xh
    return per_seq / norm, (xins, hs, xhs, cs)


def _backward_batch(w: NetWeights, X, Y, mask, norm, pb, cache, blend=0.0,
                    want_weight_grads=True):
    """BPTT gradients of the per-sequence mean MSE.

    Returns (dpb, weight grads or None). dpb rows are gradients of each
    sequence's own loss; weight grads are summed over sequences. Gradients
    flow through both recurrence paths: the context feedback and (when
    blend > 0) the prediction fed back as the next input.
    """
    xins, hs, xhs, cs = cache
    n, t_max, io_dim = X.shape
    g_w_in = np.zeros_like(w.w_in) if want_weight_grads else None
    g_b_h = np.zeros_like(w.b_h) if want_weight_grads else None
    g_w_out = np.zeros_like(w.w_out) if want_weight_grads else None
    g_b_out = np.zeros_like(w.b_out) if want_weight_grads else None
    g_w_ctx = np.zeros_like(w.w_ctx) if want_weight_grads else None
    g_b_ctx = np.zeros_like(w.b_ctx) if want_weight_grads else None
    dpb = np.zeros((n, w.pb_dim))
    dc = np.zeros((n, w.context_dim))
    dx_in = np.zeros((n, io_dim))
    pb_lo = io_dim
    pb_hi = io_dim + w.pb_dim
    for t in range(t_max - 1, -1, -1):
        h, xh, c_next = hs[t], xhs[t], cs[t + 1]
        dxh = (2.0 * mask[:, t, None] / norm[:, None]) * (xh - Y[:, t])
        dxh = dxh + blend * dx_in
        dy = dxh * xh * (1.0 - xh)
        dg = dc * c_next * (1.0 - c_next)
        dh = dy @ w.w_out.T + dg @ w.w_ctx.T
        dz = dh * h * (1.0 - h)
        if want_weight_grads:
            g_w_out += h.T @ dy
            g_b_out += dy.sum(axis=0)
            g_w_ctx += h.T @ dg
            g_b_ctx += dg.sum(axis=0)
            a = np.hstack([xins[t], pb, cs[t]])
            g_w_in += a.T @ dz
            g_b_h += dz.sum(axis=0)
        da = dz @ w.w_in.T
        dpb += da[:, pb_lo:pb_hi]
        dx_in = da[:, :io_dim]
        dc = da[:, pb_hi:]
    grads = (g_w_in, g_b_h, g_w_out, g_b_out, g_w_ctx, g_b_ctx) if want_weight_grads else None
    return dpb, grads


def _train_attempt(w: NetWeights, X, Y, mask, norm, U, cfg: NetConfig):
    """One optimization run over a packed batch; returns (w, pb, worst mse).

    The schedule has two phases. Teacher forcing (blend 0) runs until the
    worst per-sequence MSE first reaches cfg.target_mse -- the one-step
    map must exist before any feedback pressure is applied, otherwise
    hard patterns stall in smoothed-over minima. From that epoch the
    blend ramps linearly to cfg.feedback_blend over cfg.blend_ramp_epochs
    updates, turning the optimized objective into (mostly) the net's own
    rollout. The run stops when the worst per-sequence MSE meets the
    target with the ramp complete, or at cfg.max_epochs. Stopping on the
    worst sequence rather than the batch mean keeps a single unconverged
    newcomer from hiding among many already-converged patterns.
    """
    w = w.copy()
    U = np.array(U, dtype=float)
    vel = [np.zeros_like(a) for a in w.as_tuple()]
    vel_u = np.zeros_like(U)
    epoch = 0
    ramp = cfg.blend_ramp_epochs
    ramp_start = None
    while True:
        if cfg.feedback_blend == 0.0:
            blend = 0.0
        elif ramp_start is None:
            blend = 0.0
        elif ramp == 0:
            blend = cfg.feedback_blend
        else:
            blend = cfg.feedback_blend * min(1.0, (epoch - ramp_start) / ramp)
        pb = sigmoid(U)
        per_seq, cache = _forward_batch(w, X, Y, mask, norm, pb, blend)
        mse = float(np.max(per_seq))
        if not np.isfinite(mse):
            raise DivergenceError("training loss is not finite", epoch,
                                  cfg.learn_rate_w, cfg.learn_rate_pb)
        if ramp_start is None and mse <= cfg.target_mse:
            ramp_start = epoch
        ramp_done = cfg.feedback_blend == 0.0 or (
            ramp_start is not None and epoch - ramp_start >= ramp
        )
        if (mse <= cfg.target_mse and ramp_done) or epoch >= cfg.max_epochs:
            return w, pb, mse
        dpb, grads = _backward_batch(w, X, Y, mask, norm, pb, cache, blend)
        scale = cfg.learn_rate_w / len(X)
        for arr, v, g in zip(w.as_tuple(), vel, grads):
            v *= cfg.momentum
            v -= scale * g
            arr += v
        vel_u *= cfg.momentum
        vel_u -= cfg.learn_rate_pb * dpb * pb * (1.0 - pb)
        U += vel_u
        epoch += 1


def train(w: NetWeights, sequences, u_init: np.ndarray, cfg: NetConfig):
    """Batch gradient descent over all sequences with per-sequence PB learning.

    ``u_init`` holds one row of PB potentials per sequence (pb = sigmoid(u));
    warm starts pass the previous potentials, new patterns start at 0.
    Weight gradients are accumulated across sequences; PB potentials are
    updated with each sequence's own gradient. Both use classical momentum
    (velocities start at zero each call). See _train_attempt for the blend
    schedule and stopping rule.

    A batch that already meets the target at the full blend (a warm start
    over self-consistent regenerations) returns immediately without any
    update. Otherwise the optimization runs from the given weights and, if
    it ends above target or diverges, is restarted up to cfg.train_restarts
    times from fresh seeded weights and neutral PB potentials (convergence
    is initialization-sensitive; a restart is cheaper than accepting a
    pattern the network cannot reproduce). The best finite attempt wins;
    if every attempt diverges the last error propagates.

    Returns (new weights, squashed PB matrix, worst per-sequence mse).
    The inputs are never mutated.
    """
    X, Y, mask, norm = _pack(sequences, cfg.io_dim)
    if u_init.shape != (len(sequences), cfg.pb_dim):
        raise ValueError(f"u_init must be ({len(sequences)}, {cfg.pb_dim})")
    pb0 = sigmoid(np.array(u_init, dtype=float))
    per_seq, _ = _forward_batch(w, X, Y, mask, norm, pb0, cfg.feedback_blend)
    if np.all(np.isfinite(per_seq)) and float(np.max(per_seq)) <= cfg.target_mse:
        return w.copy(), pb0, float(np.max(per_seq))
    best = None
    last_err = None
    for attempt in range(cfg.train_restarts + 1):
        if attempt == 0:
            w_a, u_a = w, u_init
        else:
            restart_seed = np.random.SeedSequence(
                entropy=cfg.rng_seed, spawn_key=(7781, attempt))
            w_a = init_weights(cfg, seed=restart_seed)
            u_a = np.full_like(u_init, PB_POTENTIAL_INIT, dtype=float)
        try:
            w_out, pb_out, mse = _train_attempt(w_a, X, Y, mask, norm, u_a, cfg)
        except DivergenceError as err:
            last_err = err
            continue
        if mse <= cfg.target_mse:
            return w_out, pb_out, mse
        if best is None or mse < best[2]:
            best = (w_out, pb_out, mse)
    if best is None:
        raise last_err
    return best


def recognize_batch(w: NetWeights, sequences, cfg: NetConfig):
    """PB inference with frozen weights for a batch of sequences.

    Potentials start at 0 (pb = 0.5) and take cfg.recog_iters fixed
    gradient steps (with momentum, matching training) on the prediction
    error at cfg.recog_blend. A moderate fixed blend separates the PBs
    best: pure teacher forcing barely constrains the PB of a net trained
    with feedback, while a high blend lets the attractor dynamics drown
    out the observed pattern. Returns (pb matrix, residual per-sequence
    mean MSE).
    """
    X, Y, mask, norm = _pack(sequences, cfg.io_dim)
    n = len(sequences)
    U = np.full((n, cfg.pb_dim), PB_POTENTIAL_INIT)
    vel_u = np.zeros_like(U)
    blend = cfg.recog_blend
    for it in range(cfg.recog_iters):
        pb = sigmoid(U)
        per_seq, cache = _forward_batch(w, X, Y, mask, norm, pb, blend)
        if not np.all(np.isfinite(per_seq)):
            raise DivergenceError("recognition error is not finite", it,
                                  None, cfg.learn_rate_pb)
        dpb, _ = _backward_batch(w, X, Y, mask, norm, pb, cache, blend,
                                 want_weight_grads=False)
        vel_u *= cfg.momentum
        vel_u -= cfg.learn_rate_pb * dpb * pb * (1.0 - pb)
        U += vel_u
    pb = sigmoid(U)
    per_seq, _ = _forward_batch(w, X, Y, mask, norm, pb, blend)
    if not np.all(np.isfinite(per_seq)):
        raise DivergenceError("recognition error is not finite", cfg.recog_iters,
                              None, cfg.learn_rate_pb)
    return pb, per_seq


def recognize(w: NetWeights, seq, cfg: NetConfig):
    """Single-sequence recognition; returns (pb vector, residual mse)."""
    pb, per_seq = recognize_batch(w, [seq], cfg)
    return pb[0], float(per_seq[0])


def generate(w: NetWeights, pb, x0, steps: int) -> np.ndarray:
    """Closed-loop rollout: x0 is fed at t=0, then predictions feed back.

    Returns the (steps, io_dim) prediction matrix; row 0 is the prediction
    made from x0.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    pb = np.asarray(pb, dtype=float)
    x = np.asarray(x0, dtype=float)
    c = np.full(w.context_dim, CONTEXT_INIT)
    out = np.empty((steps, w.io_dim))
    for t in range(steps):
        x, c, _ = forward_step(w, x, pb, c)
        out[t] = x
    return out


def open_loop_mse(w: NetWeights, sequences, pbs) -> np.ndarray:
    """Teacher-forced per-sequence mean MSE for fixed weights and PBs."""
    X, Y, mask, norm = _pack(sequences, w.io_dim)
    per_seq, _ = _forward_batch(w, X, Y, mask, norm, np.asarray(pbs, dtype=float))
    return per_seq


def _loss_scalar(w: NetWeights, X, Y, mask, norm, pb, blend=0.0) -> float:
    per_seq, _ = _forward_batch(w, X, Y, mask, norm, pb, blend)
    return float(np.mean(per_seq))


def analytic_gradients(w: NetWeights, seq, u, blend=0.0):
    """Gradients of the single-sequence loss wrt all weights and PB potentials."""
    X, Y, mask, norm = _pack([seq], w.io_dim)
    U = np.asarray(u, dtype=float).reshape(1, -1)
    pb = sigmoid(U)
    _, cache = _forward_batch(w, X, Y, mask, norm, pb, blend)
    dpb, grads = _backward_batch(w, X, Y, mask, norm, pb, cache, blend)
    du = (dpb * pb * (1.0 - pb))[0]
    return grads, du


def numeric_gradients(w: NetWeights, seq, u, blend=0.0, h: float = 1e-5):
    """Central finite differences of the same loss; the independent check."""
    X, Y, mask, norm = _pack([seq], w.io_dim)
    u = np.asarray(u, dtype=float).reshape(1, -1)

    def loss_with(weights, potentials):
        return _loss_scalar(weights, X, Y, mask, norm, sigmoid(potentials), blend)

    weight_grads = []
    for idx in range(6):
        arr = w.as_tuple()[idx]
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            up = loss_with(w, u)
            flat[k] = orig - h
            down = loss_with(w, u)
            flat[k] = orig
            gflat[k] = (up - down) / (2.0 * h)
        weight_grads.append(g)
    du = np.zeros_like(u[0])
    for k in range(u.shape[1]):
        orig = u[0, k]
        u[0, k] = orig + h
        up = loss_with(w, u)
        u[0, k] = orig - h
        down = loss_with(w, u)
        u[0, k] = orig
        du[k] = (up - down) / (2.0 * h)
    return tuple(weight_grads), du


def max_relative_error(analytic, numeric, floor: float = 1e-5) -> float:
    worst = 0.0
    for a, n in zip(list(analytic[0]) + [analytic[1]], list(numeric[0]) + [numeric[1]]):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def gradient_check(w: NetWeights, seq, u, blend=0.0) -> float:
    """Max relative error between BPTT and finite-difference gradients."""
    return max_relative_error(analytic_gradients(w, seq, u, blend),
                              numeric_gradients(w, seq, u, blend))

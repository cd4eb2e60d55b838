"""Toy post-LN transformer encoder with MLM head, injectable bottleneck
adapters, parameter-group freezing, and task heads (STS regression,
3-class NLI).

Forward and backward passes are hand-derived; gradients for every block
are validated against central finite differences in the test suite.
Row-wise hot ops (softmax, layer norm, cross entropy, gelu) go through
debiaslab.kernels.
"""

from dataclasses import dataclass, field

import numpy as np

from debiaslab import kernels
from debiaslab.errors import DataError, NumericError
from debiaslab.numerics import ACTIVATIONS, make_rng
from debiaslab.vocab import NUM_SPECIALS, Vocab, tokenize, tokenize_pair

GROUP_BASE = "base"
GROUP_DEBIAS = "debias-adapter"
GROUP_TASK = "task-adapter"
GROUP_HEAD = "head"
KNOWN_GROUPS = (GROUP_BASE, GROUP_DEBIAS, GROUP_TASK, GROUP_HEAD)

ADAPTER_KINDS = ("debias", "task")  # stack order when both are present

STS_HEAD = "sts-regression"
NLI_HEAD = "nli-3class"
NLI_CLASSES = ("entailment", "neutral", "contradiction")

# additive penalty for masked keys; exp() underflows to exactly 0.0
MASK_PENALTY = -1e9

LN_EPS = 1e-5


@dataclass
class ModelConfig:
    layers: int = 2
    hidden: int = 64
    heads: int = 4
    ff_inner: int = 128
    vocab_size: int = 0  # 0 = filled in from the vocab at construction
    max_seq_len: int = 48
    ff_activation: str = "gelu"
    init_scale: float = 0.02

    def validate(self):
        for name in ("layers", "hidden", "heads", "ff_inner", "max_seq_len"):
            if getattr(self, name) < 1:
                raise DataError(f"ModelConfig.{name} must be >= 1")
        if self.hidden % self.heads != 0:
            raise DataError("hidden size must be divisible by the head count")
        if self.ff_activation not in ACTIVATIONS:
            raise DataError(f"unknown ff_activation {self.ff_activation!r}")


@dataclass
class AdapterConfig:
    bottleneck: int = 8
    nonlinearity: str = "relu"
    init_scale: float = 0.02

    def validate(self, hidden: int):
        if not 1 <= self.bottleneck < hidden:
            raise DataError(
                f"adapter bottleneck must be in [1, hidden); got {self.bottleneck} for h={hidden}"
            )
        if self.nonlinearity not in ACTIVATIONS:
            raise DataError(f"unknown adapter nonlinearity {self.nonlinearity!r}")


@dataclass
class EncodedBatch:
    ids: np.ndarray  # (B, T) int64
    mask: np.ndarray  # (B, T) float64, 1.0 = real token, 0.0 = padding
    labels: np.ndarray | None = None  # (B, T) int64, -1 = not an MLM target


def encode_batch(sentences: list[str], vocab: Vocab, max_len: int) -> EncodedBatch:
    """Tokenize and pad a batch of single sentences."""
    seqs = [tokenize(s, vocab, max_len) for s in sentences]
    return _pad(seqs, vocab)


def encode_pair_batch(pairs: list[tuple[str, str]], vocab: Vocab, max_len: int) -> EncodedBatch:
    seqs = [tokenize_pair(s1, s2, vocab, max_len) for s1, s2 in pairs]
    return _pad(seqs, vocab)


def _pad(seqs: list[list[int]], vocab: Vocab) -> EncodedBatch:
    width = max(len(s) for s in seqs)
    ids = np.full((len(seqs), width), vocab.pad_id, dtype=np.int64)
    mask = np.zeros((len(seqs), width), dtype=np.float64)
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = s
        mask[i, : len(s)] = 1.0
    return EncodedBatch(ids=ids, mask=mask)


def mlm_mask(
    batch: EncodedBatch,
    rate: float,
    rng: np.random.Generator,
    mask_prob: float = 0.8,
    random_prob: float = 0.1,
) -> EncodedBatch:
    """Standard MLM corruption: each ordinary token is selected with
    probability `rate`; selected tokens become [MASK] with mask_prob,
    a random ordinary vocab token with random_prob, and stay unchanged
    otherwise. Labels hold original ids at selected positions, -1 elsewhere.
    """
    if not 0.0 <= rate <= 1.0:
        raise DataError(f"mask rate must be in [0, 1], got {rate}")
    ids = batch.ids
    ordinary = ids >= NUM_SPECIALS  # excludes padding and special tokens
    selected = (rng.random(ids.shape) < rate) & ordinary
    branch = rng.random(ids.shape)
    vocab_size = int(ids.max()) + 1  # only used as fallback; see below
    new_ids = ids.copy()
    new_ids[selected & (branch < mask_prob)] = 4  # [MASK] id
    random_sel = selected & (branch >= mask_prob) & (branch < mask_prob + random_prob)
    if random_sel.any():
        draws = rng.integers(NUM_SPECIALS, max(vocab_size, NUM_SPECIALS + 1), size=ids.shape)
        new_ids[random_sel] = draws[random_sel]
    labels = np.where(selected, ids, -1).astype(np.int64)
    return EncodedBatch(ids=new_ids, mask=batch.mask, labels=labels)


def adapter_forward(h, r, down_w, up_w, nonlinearity="relu", down_b=None, up_b=None):
    """Bottleneck adapter on a single hidden vector:
    up_w @ g(down_w @ h) + r (plus biases when given)."""
    h = np.asarray(h, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    down_w = np.asarray(down_w, dtype=np.float64)
    up_w = np.asarray(up_w, dtype=np.float64)
    if h.shape != r.shape:
        raise DataError(f"adapter h/r shape mismatch: {h.shape} vs {r.shape}")
    m, hidden = down_w.shape
    if hidden != h.size or up_w.shape != (h.size, m):
        raise DataError(
            f"adapter projection shapes {down_w.shape}/{up_w.shape} do not map h of size {h.size}"
        )
    act_fn, _ = ACTIVATIONS[nonlinearity]
    pre = down_w @ h + (0.0 if down_b is None else down_b)
    out = up_w @ act_fn(pre) + (0.0 if up_b is None else up_b)
    return out + r


def count_adapter_params(config: ModelConfig, adapter: AdapterConfig) -> int:
    """Projection-weight count only: layers x 2 x hidden x bottleneck."""
    return config.layers * 2 * config.hidden * adapter.bottleneck


def count_adapter_bias_params(config: ModelConfig, adapter: AdapterConfig) -> int:
    """Bias parameters, reported separately from the weight count."""
    return config.layers * (adapter.bottleneck + config.hidden)


class Encoder:
    """Transformer encoder + tied-embedding MLM head + optional adapters
    and task heads. Parameters live in `params` (name -> float64 array)
    with a group label per parameter in `groups`."""

    def __init__(self, config: ModelConfig, vocab: Vocab, seed: int = 0):
        config.validate()
        if config.vocab_size == 0:
            config.vocab_size = len(vocab)
        elif config.vocab_size != len(vocab):
            raise DataError(
                f"config.vocab_size={config.vocab_size} but vocab has {len(vocab)} tokens"
            )
        self.config = config
        self.vocab = vocab
        self.params: dict[str, np.ndarray] = {}
        self.groups: dict[str, str] = {}
        self.adapter_configs: dict[str, AdapterConfig] = {}  # kind -> config, stack order
        self.heads: list[str] = []
        self.trainable_groups: set[str] = {GROUP_BASE}
        self._init_base(make_rng(seed))

    # -- construction ------------------------------------------------------

    def _add_param(self, name: str, value: np.ndarray, group: str):
        if name in self.params:
            raise DataError(f"duplicate parameter {name}")
        self.params[name] = np.ascontiguousarray(value, dtype=np.float64)
        self.groups[name] = group

    def _init_base(self, rng):
        c = self.config
        s = c.init_scale
        self._add_param("tok_emb", rng.normal(0.0, s, (c.vocab_size, c.hidden)), GROUP_BASE)
        self._add_param("pos_emb", rng.normal(0.0, s, (c.max_seq_len, c.hidden)), GROUP_BASE)
        self._add_param("mlm_bias", np.zeros(c.vocab_size), GROUP_BASE)
        for l in range(c.layers):
            for w in ("wq", "wk", "wv", "wo"):
                self._add_param(f"l{l}.attn.{w}", rng.normal(0.0, s, (c.hidden, c.hidden)), GROUP_BASE)
            for b in ("bq", "bk", "bv", "bo"):
                self._add_param(f"l{l}.attn.{b}", np.zeros(c.hidden), GROUP_BASE)
            self._add_param(f"l{l}.ln1.g", np.ones(c.hidden), GROUP_BASE)
            self._add_param(f"l{l}.ln1.b", np.zeros(c.hidden), GROUP_BASE)
            self._add_param(f"l{l}.ff.w1", rng.normal(0.0, s, (c.hidden, c.ff_inner)), GROUP_BASE)
            self._add_param(f"l{l}.ff.b1", np.zeros(c.ff_inner), GROUP_BASE)
            self._add_param(f"l{l}.ff.w2", rng.normal(0.0, s, (c.ff_inner, c.hidden)), GROUP_BASE)
            self._add_param(f"l{l}.ff.b2", np.zeros(c.hidden), GROUP_BASE)
            self._add_param(f"l{l}.ln2.g", np.ones(c.hidden), GROUP_BASE)
            self._add_param(f"l{l}.ln2.b", np.zeros(c.hidden), GROUP_BASE)

    def add_adapter(self, kind: str, adapter: AdapterConfig, seed: int = 0):
        """Inject a bottleneck adapter after each layer's feed-forward
        sublayer. Up-projection starts at exactly zero so a fresh adapter
        leaves every encoder output unchanged."""
        if kind not in ADAPTER_KINDS:
            raise DataError(f"adapter kind must be one of {ADAPTER_KINDS}")
        if kind in self.adapter_configs:
            raise DataError(f"{kind} adapter already present")
        adapter.validate(self.config.hidden)
        rng = make_rng(seed)
        group = f"{kind}-adapter"
        c = self.config
        m = adapter.bottleneck
        for l in range(c.layers):
            self._add_param(
                f"l{l}.ad.{kind}.dw", rng.normal(0.0, adapter.init_scale, (m, c.hidden)), group
            )
            self._add_param(f"l{l}.ad.{kind}.db", np.zeros(m), group)
            self._add_param(f"l{l}.ad.{kind}.uw", np.zeros((c.hidden, m)), group)
            self._add_param(f"l{l}.ad.{kind}.ub", np.zeros(c.hidden), group)
        self.adapter_configs[kind] = adapter
        # keep canonical stack order: debias first, then task
        self.adapter_configs = {
            k: self.adapter_configs[k] for k in ADAPTER_KINDS if k in self.adapter_configs
        }

    def ensure_head(self, head: str, seed: int = 0):
        if head not in (STS_HEAD, NLI_HEAD):
            raise DataError(f"unknown head {head!r}")
        if head in self.heads:
            return
        rng = make_rng(seed)
        c = self.config
        if head == STS_HEAD:
            self._add_param("head.sts.w", rng.normal(0.0, c.init_scale, (c.hidden,)), GROUP_HEAD)
            self._add_param("head.sts.b", np.zeros(1), GROUP_HEAD)
        else:
            self._add_param("head.nli.w", rng.normal(0.0, c.init_scale, (c.hidden, 3)), GROUP_HEAD)
            self._add_param("head.nli.b", np.zeros(3), GROUP_HEAD)
        self.heads.append(head)

    def set_trainable(self, groups) -> None:
        """Exactly the named parameter groups receive optimizer updates."""
        groups = set(groups)
        present = set(self.groups.values())
        for g in groups:
            if g not in KNOWN_GROUPS:
                raise DataError(f"unknown parameter group {g!r}")
            if g not in present:
                raise DataError(f"parameter group {g!r} has no parameters in this model")
        self.trainable_groups = groups

    def trainable_names(self) -> list[str]:
        return [n for n, g in self.groups.items() if g in self.trainable_groups]

    def group_checksum(self, group: str) -> bytes:
        """Order-stable digest of all parameter bytes in a group."""
        import hashlib

        h = hashlib.sha256()
        for name in sorted(self.params):
            if self.groups[name] == group:
                h.update(name.encode())
                h.update(self.params[name].tobytes())
        return h.digest()

    # -- forward -----------------------------------------------------------

    def _ln_fwd(self, x3, gname, bname):
        b, t, h = x3.shape
        y, mean, rstd = kernels.layer_norm_rows(
            np.ascontiguousarray(x3.reshape(-1, h)), self.params[gname], self.params[bname], LN_EPS
        )
        return y.reshape(b, t, h), mean, rstd

    def _ln_bwd(self, dy3, x3, gname, mean, rstd, grads):
        b, t, h = x3.shape
        dx, dg, db = kernels.layer_norm_backward_rows(
            np.ascontiguousarray(dy3.reshape(-1, h)),
            np.ascontiguousarray(x3.reshape(-1, h)),
            self.params[gname], mean, rstd,
        )
        _acc(grads, gname, dg)
        _acc(grads, gname.replace(".g", ".b"), db)
        return dx.reshape(b, t, h)

    def forward(self, batch: EncodedBatch, want_cache: bool = False):
        """Returns (levels, caches): levels has layers+1 entries of shape
        (B, T, hidden); level 0 is the embedding output."""
        ids, mask = batch.ids, batch.mask
        _, t = ids.shape
        if t > self.config.max_seq_len:
            raise DataError(f"batch width {t} exceeds max_seq_len={self.config.max_seq_len}")
        x = self.params["tok_emb"][ids] + self.params["pos_emb"][:t][None, :, :]
        levels = [x]
        caches = []
        for l in range(self.config.layers):
            x, cache = self._layer_forward(l, x, mask, want_cache)
            levels.append(x)
            caches.append(cache)
        return levels, caches

    def _attn_forward(self, l, x, mask):
        p = self.params
        b, t, h = x.shape
        nh = self.config.heads
        dh = h // nh
        q = x @ p[f"l{l}.attn.wq"] + p[f"l{l}.attn.bq"]
        k = x @ p[f"l{l}.attn.wk"] + p[f"l{l}.attn.bk"]
        v = x @ p[f"l{l}.attn.wv"] + p[f"l{l}.attn.bv"]
        qh = q.reshape(b, t, nh, dh).transpose(0, 2, 1, 3)
        kh = k.reshape(b, t, nh, dh).transpose(0, 2, 1, 3)
        vh = v.reshape(b, t, nh, dh).transpose(0, 2, 1, 3)
        scores = qh @ kh.transpose(0, 1, 3, 2) / np.sqrt(dh)
        scores = scores + (1.0 - mask)[:, None, None, :] * MASK_PENALTY
        attn_w = kernels.softmax_rows(np.ascontiguousarray(scores.reshape(-1, t))).reshape(
            b, nh, t, t
        )
        ctx = attn_w @ vh
        merged = np.ascontiguousarray(ctx.transpose(0, 2, 1, 3)).reshape(b, t, h)
        out = merged @ p[f"l{l}.attn.wo"] + p[f"l{l}.attn.bo"]
        cache = {"x": x, "qh": qh, "kh": kh, "vh": vh, "attn_w": attn_w, "merged": merged}
        return out, cache

    def _attn_backward(self, l, dout, cache, grads):
        p = self.params
        b, t, h = dout.shape
        nh = self.config.heads
        dh = h // nh
        x, qh, kh, vh = cache["x"], cache["qh"], cache["kh"], cache["vh"]
        attn_w, merged = cache["attn_w"], cache["merged"]
        dout2 = dout.reshape(-1, h)
        _acc(grads, f"l{l}.attn.wo", merged.reshape(-1, h).T @ dout2)
        _acc(grads, f"l{l}.attn.bo", dout2.sum(axis=0))
        dmerged = (dout @ p[f"l{l}.attn.wo"].T).reshape(b, t, nh, dh).transpose(0, 2, 1, 3)
        dattn_w = dmerged @ vh.transpose(0, 1, 3, 2)
        dvh = attn_w.transpose(0, 1, 3, 2) @ dmerged
        # softmax backward row-wise: ds = A * (dA - sum(dA * A))
        inner = (dattn_w * attn_w).sum(axis=-1, keepdims=True)
        dscores = attn_w * (dattn_w - inner) / np.sqrt(dh)
        dqh = dscores @ kh
        dkh = dscores.transpose(0, 1, 3, 2) @ qh
        dq = np.ascontiguousarray(dqh.transpose(0, 2, 1, 3)).reshape(b, t, h)
        dk = np.ascontiguousarray(dkh.transpose(0, 2, 1, 3)).reshape(b, t, h)
        dv = np.ascontiguousarray(dvh.transpose(0, 2, 1, 3)).reshape(b, t, h)
        x2 = x.reshape(-1, h)
        dx = np.zeros_like(x)
        for w, bias, d in (("wq", "bq", dq), ("wk", "bk", dk), ("wv", "bv", dv)):
            d2 = d.reshape(-1, h)
            _acc(grads, f"l{l}.attn.{w}", x2.T @ d2)
            _acc(grads, f"l{l}.attn.{bias}", d2.sum(axis=0))
            dx += d @ p[f"l{l}.attn.{w}"].T
        return dx

    def _adapter_chain_forward(self, l, hstate, f):
        """Adapter stack after the feed-forward sublayer. First adapter sees
        (hstate, f); each later adapter sees the previous adapter's output
        as both hidden state and residual."""
        p = self.params
        out = f
        hin = hstate
        steps = []
        for kind in self.adapter_configs:
            act_fn, _ = ACTIVATIONS[self.adapter_configs[kind].nonlinearity]
            pre = hin @ p[f"l{l}.ad.{kind}.dw"].T + p[f"l{l}.ad.{kind}.db"]
            act = act_fn(pre)
            up = act @ p[f"l{l}.ad.{kind}.uw"].T + p[f"l{l}.ad.{kind}.ub"]
            new_out = up + out
            steps.append({"kind": kind, "hin": hin, "pre": pre, "act": act})
            out = new_out
            hin = new_out
        return out, steps

    def _adapter_chain_backward(self, l, dout, steps, grads):
        p = self.params
        d_h = None
        d_f = None
        d_o = dout
        for i in range(len(steps) - 1, -1, -1):
            st = steps[i]
            kind = st["kind"]
            _, act_bwd = ACTIVATIONS[self.adapter_configs[kind].nonlinearity]
            hdim = d_o.shape[-1]
            m = st["pre"].shape[-1]
            d_o2 = d_o.reshape(-1, hdim)
            _acc(grads, f"l{l}.ad.{kind}.uw", d_o2.T @ st["act"].reshape(-1, m))
            _acc(grads, f"l{l}.ad.{kind}.ub", d_o2.sum(axis=0))
            d_act = d_o @ p[f"l{l}.ad.{kind}.uw"]
            d_pre = act_bwd(st["pre"], d_act)
            d_pre2 = d_pre.reshape(-1, m)
            _acc(grads, f"l{l}.ad.{kind}.dw", d_pre2.T @ st["hin"].reshape(-1, hdim))
            _acc(grads, f"l{l}.ad.{kind}.db", d_pre2.sum(axis=0))
            d_hin = d_pre @ p[f"l{l}.ad.{kind}.dw"]
            if i == 0:
                d_h = d_hin
                d_f = d_o  # residual path of the first adapter
            else:
                d_o = d_o + d_hin  # previous adapter's output fed both inputs
        return d_h, d_f

    def _layer_forward(self, l, x, mask, want_cache):
        p = self.params
        attn, attn_cache = self._attn_forward(l, x, mask)
        sum1 = x + attn
        a, mean1, rstd1 = self._ln_fwd(sum1, f"l{l}.ln1.g", f"l{l}.ln1.b")
        pre1 = a @ p[f"l{l}.ff.w1"] + p[f"l{l}.ff.b1"]
        act_fn, _ = ACTIVATIONS[self.config.ff_activation]
        act1 = act_fn(pre1)
        f = act1 @ p[f"l{l}.ff.w2"] + p[f"l{l}.ff.b2"]
        cache = {
            "attn": attn_cache, "sum1": sum1, "mean1": mean1, "rstd1": rstd1,
            "a": a, "pre1": pre1, "act1": act1, "f": f,
        } if want_cache else {}
        if self.adapter_configs:
            sum2 = a + f
            hstate, mean2, rstd2 = self._ln_fwd(sum2, f"l{l}.ln2.g", f"l{l}.ln2.b")
            o, steps = self._adapter_chain_forward(l, hstate, f)
            sum3 = a + o
            out, mean3, rstd3 = self._ln_fwd(sum3, f"l{l}.ln2.g", f"l{l}.ln2.b")
            if want_cache:
                cache.update({
                    "sum2": sum2, "mean2": mean2, "rstd2": rstd2, "steps": steps,
                    "sum3": sum3, "mean3": mean3, "rstd3": rstd3,
                })
        else:
            sum2 = a + f
            out, mean2, rstd2 = self._ln_fwd(sum2, f"l{l}.ln2.g", f"l{l}.ln2.b")
            if want_cache:
                cache.update({"sum2": sum2, "mean2": mean2, "rstd2": rstd2})
        if not want_cache:
            cache = None
        return out, cache

    def _layer_backward(self, l, dout, cache, grads):
        _, act_bwd = ACTIVATIONS[self.config.ff_activation]
        p = self.params
        if self.adapter_configs:
            dsum3 = self._ln_bwd(dout, cache["sum3"], f"l{l}.ln2.g", cache["mean3"], cache["rstd3"], grads)
            da = dsum3.copy()
            d_o = dsum3
            d_h, d_f = self._adapter_chain_backward(l, d_o, cache["steps"], grads)
            dsum2 = self._ln_bwd(d_h, cache["sum2"], f"l{l}.ln2.g", cache["mean2"], cache["rstd2"], grads)
            da += dsum2
            d_f = d_f + dsum2
        else:
            dsum2 = self._ln_bwd(dout, cache["sum2"], f"l{l}.ln2.g", cache["mean2"], cache["rstd2"], grads)
            da = dsum2.copy()
            d_f = dsum2
        # feed-forward backward
        h = da.shape[-1]
        ffdim = cache["act1"].shape[-1]
        d_f2 = d_f.reshape(-1, h)
        _acc(grads, f"l{l}.ff.w2", cache["act1"].reshape(-1, ffdim).T @ d_f2)
        _acc(grads, f"l{l}.ff.b2", d_f2.sum(axis=0))
        d_act1 = d_f @ p[f"l{l}.ff.w2"].T
        d_pre1 = act_bwd(cache["pre1"], d_act1)
        d_pre1_2 = d_pre1.reshape(-1, ffdim)
        _acc(grads, f"l{l}.ff.w1", cache["a"].reshape(-1, h).T @ d_pre1_2)
        _acc(grads, f"l{l}.ff.b1", d_pre1_2.sum(axis=0))
        da += d_pre1 @ p[f"l{l}.ff.w1"].T
        # first add & norm
        dsum1 = self._ln_bwd(da, cache["sum1"], f"l{l}.ln1.g", cache["mean1"], cache["rstd1"], grads)
        dx = dsum1.copy()
        dx += self._attn_backward(l, dsum1, cache["attn"], grads)
        return dx

    def backward(self, batch: EncodedBatch, caches, d_final):
        """Backprop d_final (gradient w.r.t. the last level) down to all
        parameters. Returns the gradient dict (name -> array)."""
        grads: dict[str, np.ndarray] = {}
        dx = d_final
        for l in range(self.config.layers - 1, -1, -1):
            dx = self._layer_backward(l, dx, caches[l], grads)
        t = batch.ids.shape[1]
        h = self.config.hidden
        dtok = np.zeros_like(self.params["tok_emb"])
        np.add.at(dtok, batch.ids.reshape(-1), dx.reshape(-1, h))
        _acc(grads, "tok_emb", dtok)
        dpos = np.zeros_like(self.params["pos_emb"])
        dpos[:t] = dx.sum(axis=0)
        _acc(grads, "pos_emb", dpos)
        return grads

    # -- MLM head ----------------------------------------------------------

    def mlm_logits(self, final_states: np.ndarray) -> np.ndarray:
        """Tied-embedding fill-in logits, shape (..., vocab)."""
        return final_states @ self.params["tok_emb"].T + self.params["mlm_bias"]

    def mlm_loss_and_grads(self, batch: EncodedBatch, want_grads: bool = True):
        """Mean cross entropy over labeled positions (labels >= 0)."""
        if batch.labels is None:
            raise DataError("batch has no MLM labels")
        levels, caches = self.forward(batch, want_cache=want_grads)
        sel = batch.labels >= 0
        n = int(sel.sum())
        if n == 0:
            return 0.0, {}
        rows = np.ascontiguousarray(levels[-1][sel])
        logits = np.ascontiguousarray(rows @ self.params["tok_emb"].T + self.params["mlm_bias"])
        targets = np.ascontiguousarray(batch.labels[sel].astype(np.int64))
        losses, dlogits = kernels.cross_entropy_rows(logits, targets)
        loss = float(losses.mean())
        if not np.isfinite(loss):
            raise NumericError("non-finite MLM loss")
        if not want_grads:
            return loss, {}
        dlogits /= n
        d_rows = dlogits @ self.params["tok_emb"]
        d_final = np.zeros_like(levels[-1])
        d_final[sel] = d_rows
        grads = self.backward(batch, caches, d_final)
        _acc(grads, "tok_emb", dlogits.T @ rows)
        _acc(grads, "mlm_bias", dlogits.sum(axis=0))
        return loss, grads

    # -- task heads --------------------------------------------------------

    def head_outputs(self, batch: EncodedBatch, head: str):
        """Forward to head outputs from the [CLS] state. Returns
        (outputs, levels, caches): scores (B,) for STS, class probability
        rows (B, 3) for NLI."""
        if head not in self.heads:
            raise DataError(f"head {head!r} not initialized")
        levels, caches = self.forward(batch, want_cache=True)
        cls = levels[-1][:, 0, :]
        if head == STS_HEAD:
            out = cls @ self.params["head.sts.w"] + self.params["head.sts.b"][0]
        else:
            logits = cls @ self.params["head.nli.w"] + self.params["head.nli.b"]
            out = kernels.softmax_rows(np.ascontiguousarray(logits))
        return out, levels, caches

    def task_loss_and_grads(self, batch: EncodedBatch, head: str, gold: np.ndarray):
        """MSE loss for the STS head, mean cross entropy for the NLI head."""
        if head not in self.heads:
            raise DataError(f"head {head!r} not initialized")
        levels, caches = self.forward(batch, want_cache=True)
        cls = np.ascontiguousarray(levels[-1][:, 0, :])
        nb = cls.shape[0]
        grads: dict[str, np.ndarray] = {}
        if head == STS_HEAD:
            w = self.params["head.sts.w"]
            score = cls @ w + self.params["head.sts.b"][0]
            resid = score - gold
            loss = float((resid**2).mean())
            dscore = 2.0 * resid / nb
            d_cls = dscore[:, None] * w[None, :]
            _acc(grads, "head.sts.w", cls.T @ dscore)
            _acc(grads, "head.sts.b", np.array([dscore.sum()]))
        else:
            wmat = self.params["head.nli.w"]
            logits = np.ascontiguousarray(cls @ wmat + self.params["head.nli.b"])
            losses, dlogits = kernels.cross_entropy_rows(logits, gold.astype(np.int64))
            loss = float(losses.mean())
            dlogits /= nb
            d_cls = dlogits @ wmat.T
            _acc(grads, "head.nli.w", cls.T @ dlogits)
            _acc(grads, "head.nli.b", dlogits.sum(axis=0))
        if not np.isfinite(loss):
            raise NumericError("non-finite task loss")
        d_final = np.zeros_like(levels[-1])
        d_final[:, 0, :] = d_cls
        g2 = self.backward(batch, caches, d_final)
        for k, v in g2.items():
            _acc(grads, k, v)
        return loss, grads


def pair_forward(model: Encoder, sent1: str, sent2: str, head: str):
    """Encode [CLS] s1 [SEP] s2 [SEP] and apply the named head: a real
    score for sts-regression, a distribution over (entailment, neutral,
    contradiction) for nli-3class."""
    batch = encode_pair_batch([(sent1, sent2)], model.vocab, model.config.max_seq_len)
    out, _, _ = model.head_outputs(batch, head)
    if head == STS_HEAD:
        return float(out[0])
    return out[0]


def set_trainable(model: Encoder, groups) -> None:
    model.set_trainable(groups)


def _acc(grads: dict, name: str, g: np.ndarray):
    if name in grads:
        grads[name] = grads[name] + g
    else:
        grads[name] = g

"""Character-level LSTM language model in numpy, trained by clipped SGD.

Each utterance is fed as ``EOS c_1 ... c_n`` and predicts ``c_1 ... c_n EOS``,
so the end symbol doubles as the start-of-sequence input. State is reset
for every utterance and backpropagation runs over the whole utterance.
Gate blocks are stacked in the order input, forget, cell, output.
"""

import io
import json
import logging
import math
import struct
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import ModelError, TrainingError

logger = logging.getLogger(__name__)

EOS_TEXT = "</s>"
LN2 = math.log(2.0)
_MAGIC = b"BPEC-LSTM 1\n"


@dataclass(frozen=True)
class LstmConfig:
    embed_dim: int = 64
    hidden_dim: int = 64
    layers: int = 2
    clip: float = 5.0
    max_epochs: int = 100
    patience: int = 5
    learning_rate: float = 0.1
    seed: int = 0
    init_scale: float = 0.1
    forget_bias: float = 1.0

    def __post_init__(self):
        if min(self.embed_dim, self.hidden_dim, self.layers) < 1:
            raise ModelError("LSTM dimensions must be >= 1")
        if self.clip <= 0 or self.learning_rate <= 0:
            raise ModelError("clip and learning_rate must be positive")
        if self.max_epochs < 1 or self.patience < 1:
            raise ModelError("max_epochs and patience must be >= 1")


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


class LstmModel:
    """Embedding -> stacked LSTM -> affine + softmax over the alphabet."""

    def __init__(self, config: LstmConfig, alphabet: Sequence[str], params: Dict[str, np.ndarray]):
        self.config = config
        self.alphabet = list(alphabet)
        if self.alphabet[0] != EOS_TEXT:
            raise ModelError("alphabet must start with the EOS symbol")
        self.index = {c: i for i, c in enumerate(self.alphabet)}
        if len(self.index) != len(self.alphabet):
            raise ModelError("alphabet has duplicate symbols")
        self.params = params
        self._check_shapes()

    @classmethod
    def initialize(cls, config: LstmConfig, chars, zero: bool = False) -> "LstmModel":
        alphabet = [EOS_TEXT] + sorted(set(chars) - {EOS_TEXT})
        rng = np.random.default_rng(config.seed)
        params = {}
        for name, shape in cls.param_shapes(config, len(alphabet)).items():
            if zero:
                params[name] = np.zeros(shape)
            else:
                params[name] = rng.uniform(-config.init_scale, config.init_scale, shape)
        if not zero:
            h = config.hidden_dim
            for layer in range(config.layers):
                params[f"b{layer}"][h:2 * h] = config.forget_bias
        return cls(config, alphabet, params)

    @staticmethod
    def param_shapes(config: LstmConfig, vocab_size: int) -> Dict[str, tuple]:
        h = config.hidden_dim
        shapes = {"embed": (vocab_size, config.embed_dim)}
        for layer in range(config.layers):
            in_dim = config.embed_dim if layer == 0 else h
            shapes[f"Wx{layer}"] = (4 * h, in_dim)
            shapes[f"Wh{layer}"] = (4 * h, h)
            shapes[f"b{layer}"] = (4 * h,)
        shapes["Wout"] = (vocab_size, h)
        shapes["bout"] = (vocab_size,)
        return shapes

    def _check_shapes(self):
        expected = self.param_shapes(self.config, len(self.alphabet))
        if set(expected) != set(self.params):
            raise ModelError(f"parameter names {sorted(self.params)} != {sorted(expected)}")
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ModelError(f"{name}: shape {self.params[name].shape}, expected {shape}")

    def encode(self, text: str) -> np.ndarray:
        try:
            return np.array([self.index[c] for c in text], dtype=np.int64)
        except KeyError as exc:
            raise ModelError(f"character {exc.args[0]!r} is not in the model alphabet "
                             "(rare characters must be mapped to the unknown symbol first)") from None

    # -- forward / backward ------------------------------------------------

    def _forward(self, ids: np.ndarray):
        p = self.params
        h_dim = self.config.hidden_dim
        inputs = np.concatenate(([0], ids))
        targets = np.concatenate((ids, [0]))
        steps = len(inputs)
        x = p["embed"][inputs]
        caches = []
        for layer in range(self.config.layers):
            wx, wh, b = p[f"Wx{layer}"], p[f"Wh{layer}"], p[f"b{layer}"]
            zx = x @ wx.T + b
            hs = np.zeros((steps + 1, h_dim))
            cs = np.zeros((steps + 1, h_dim))
            gates = np.zeros((steps, 4 * h_dim))
            for t in range(steps):
                z = zx[t] + wh @ hs[t]
                g = np.empty_like(z)
                g[:2 * h_dim] = _sigmoid(z[:2 * h_dim])
                g[2 * h_dim:3 * h_dim] = np.tanh(z[2 * h_dim:3 * h_dim])
                g[3 * h_dim:] = _sigmoid(z[3 * h_dim:])
                gates[t] = g
                cs[t + 1] = g[h_dim:2 * h_dim] * cs[t] + g[:h_dim] * g[2 * h_dim:3 * h_dim]
                hs[t + 1] = g[3 * h_dim:] * np.tanh(cs[t + 1])
            caches.append((x, hs, cs, gates))
            x = hs[1:]
        logits = x @ p["Wout"].T + p["bout"]
        logits -= logits.max(axis=1, keepdims=True)
        logp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
        return inputs, targets, caches, logp

    def forward(self, text_or_ids) -> np.ndarray:
        """Next-symbol distributions, one row per position 1..len+1."""
        ids = self.encode(text_or_ids) if isinstance(text_or_ids, str) else np.asarray(text_or_ids)
        return np.exp(self._forward(ids)[3])

    def nll(self, text_or_ids) -> float:
        """Bits needed to encode the sequence and its terminating EOS."""
        ids = self.encode(text_or_ids) if isinstance(text_or_ids, str) else np.asarray(text_or_ids)
        _, targets, _, logp = self._forward(ids)
        return float(-logp[np.arange(len(targets)), targets].sum() / LN2)

    def backward(self, text_or_ids):
        """Return (nll in bits, gradients of that nll for every parameter)."""
        ids = self.encode(text_or_ids) if isinstance(text_or_ids, str) else np.asarray(text_or_ids)
        p = self.params
        h_dim = self.config.hidden_dim
        inputs, targets, caches, logp = self._forward(ids)
        steps = len(targets)
        bits = float(-logp[np.arange(steps), targets].sum() / LN2)

        grads = {}
        dlogits = np.exp(logp)
        dlogits[np.arange(steps), targets] -= 1.0
        dlogits /= LN2
        top = caches[-1][1][1:]
        grads["Wout"] = dlogits.T @ top
        grads["bout"] = dlogits.sum(axis=0)
        dx = dlogits @ p["Wout"]

        for layer in reversed(range(self.config.layers)):
            x, hs, cs, gates = caches[layer]
            wh = p[f"Wh{layer}"]
            dz = np.zeros((steps, 4 * h_dim))
            dh_next = np.zeros(h_dim)
            dc_next = np.zeros(h_dim)
            for t in reversed(range(steps)):
                g = gates[t]
                i, f, c_hat, o = g[:h_dim], g[h_dim:2 * h_dim], g[2 * h_dim:3 * h_dim], g[3 * h_dim:]
                tc = np.tanh(cs[t + 1])
                dh = dx[t] + dh_next
                dc = dh * o * (1.0 - tc * tc) + dc_next
                d = dz[t]
                d[:h_dim] = dc * c_hat * i * (1.0 - i)
                d[h_dim:2 * h_dim] = dc * cs[t] * f * (1.0 - f)
                d[2 * h_dim:3 * h_dim] = dc * i * (1.0 - c_hat * c_hat)
                d[3 * h_dim:] = dh * tc * o * (1.0 - o)
                dc_next = dc * f
                dh_next = wh.T @ d
            grads[f"Wx{layer}"] = dz.T @ x
            grads[f"Wh{layer}"] = dz.T @ hs[:-1]
            grads[f"b{layer}"] = dz.sum(axis=0)
            dx = dz @ p[f"Wx{layer}"]

        dembed = np.zeros_like(p["embed"])
        np.add.at(dembed, inputs, dx)
        grads["embed"] = dembed
        return bits, grads

    def copy(self) -> "LstmModel":
        return LstmModel(self.config, self.alphabet, {k: v.copy() for k, v in self.params.items()})


def corpus_bpc(model: LstmModel, texts: Sequence[str]) -> float:
    bits = sum(model.nll(t) for t in texts)
    return bits / sum(len(t) + 1 for t in texts)


def sgd_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], lr: float, clip: float):
    """In-place update with each gradient component clipped to [-clip, clip]."""
    for name, g in grads.items():
        params[name] -= lr * np.clip(g, -clip, clip)


@dataclass
class EpochLog:
    epoch: int
    train_bpc: float
    dev_bpc: float


def train(config: LstmConfig, train_texts: Sequence[str], dev_texts: Sequence[str],
          chars=None, log: Optional[List[EpochLog]] = None) -> LstmModel:
    """Per-utterance SGD with early stopping on dev BPC; returns the best-dev model."""
    train_texts, dev_texts = list(train_texts), list(dev_texts)
    if not train_texts or not dev_texts:
        raise TrainingError("train and dev portions must be nonempty")
    if chars is None:
        chars = set("".join(train_texts))
    model = LstmModel.initialize(config, chars)
    train_ids = [model.encode(t) for t in train_texts]
    dev_ids = [model.encode(t) for t in dev_texts]
    dev_chars = sum(len(t) + 1 for t in dev_ids)
    train_chars = sum(len(t) + 1 for t in train_ids)
    rng = np.random.default_rng(config.seed + 1)

    best, best_bpc, since_best = model.copy(), math.inf, 0
    for epoch in range(1, config.max_epochs + 1):
        total = 0.0
        for idx in rng.permutation(len(train_ids)):
            bits, grads = model.backward(train_ids[idx])
            if not math.isfinite(bits):
                raise TrainingError(f"non-finite loss at epoch {epoch}, utterance #{idx}: "
                                    f"{train_texts[idx][:60]!r}")
            total += bits
            sgd_step(model.params, grads, config.learning_rate, config.clip)
        dev_bpc = sum(model.nll(t) for t in dev_ids) / dev_chars
        if not math.isfinite(dev_bpc):
            raise TrainingError(f"non-finite dev BPC at epoch {epoch}")
        entry = EpochLog(epoch, total / train_chars, dev_bpc)
        if log is not None:
            log.append(entry)
        logger.info("epoch %d train %.4f dev %.4f", epoch, entry.train_bpc, dev_bpc)
        if dev_bpc < best_bpc:
            best, best_bpc, since_best = model.copy(), dev_bpc, 0
        else:
            since_best += 1
            if since_best >= config.patience:
                break
    return best


# -- checkpoints -------------------------------------------------------------

def dumps(model: LstmModel) -> bytes:
    """Magic line, length-prefixed JSON header, then little-endian float64 tensors."""
    names = list(model.params)
    header = {
        "config": asdict(model.config),
        "alphabet": model.alphabet,
        "tensors": [{"name": n, "shape": list(model.params[n].shape), "dtype": "<f8"} for n in names],
    }
    blob = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    out = io.BytesIO()
    out.write(_MAGIC)
    out.write(struct.pack("<Q", len(blob)))
    out.write(blob)
    for n in names:
        out.write(np.ascontiguousarray(model.params[n], dtype="<f8").tobytes())
    return out.getvalue()


def loads(data: bytes) -> LstmModel:
    if not data.startswith(_MAGIC):
        raise ModelError("not an LSTM checkpoint")
    pos = len(_MAGIC)
    (n,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    header = json.loads(data[pos:pos + n].decode("utf-8"))
    pos += n
    params = {}
    for spec in header["tensors"]:
        shape = tuple(spec["shape"])
        size = int(np.prod(shape)) * 8
        if pos + size > len(data):
            raise ModelError("truncated LSTM checkpoint")
        params[spec["name"]] = np.frombuffer(data[pos:pos + size], dtype="<f8").reshape(shape).astype(np.float64)
        pos += size
    if pos != len(data):
        raise ModelError("trailing bytes in LSTM checkpoint")
    return LstmModel(LstmConfig(**header["config"]), header["alphabet"], params)


def save(model: LstmModel, path) -> None:
    Path(path).write_bytes(dumps(model))


def load(path) -> LstmModel:
    try:
        return loads(Path(path).read_bytes())
    except OSError as exc:
        raise ModelError(f"cannot read LSTM checkpoint {path}: {exc}") from exc

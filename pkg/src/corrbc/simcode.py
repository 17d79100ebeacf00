"""
Monte Carlo simulation of the random-coding scheme at small block lengths.

Codewords are never stored: codeword ``m`` of a codebook is read from a
Philox counter stream whose key hashes (seed, role, conditioning sequence),
at a fixed offset determined by ``m``. Any chunking of the index range
therefore yields the same codewords.

Message indices are 0-based internally; reports add 1 to match the
``[1 : 2^{nR}]`` convention.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .measures import JointPmf, marginalize
from .regions import AuxiliarySpec, RateTriple, ScenarioSpec, compose

DEFAULT_BUDGET = 2**28
CHUNK = 1 << 15


class SimulationError(ValueError):
    pass


class BudgetExceeded(SimulationError):
    pass


class DecodeError(Exception):
    pass


class NoneTypical(DecodeError):
    pass


class Ambiguous(DecodeError):
    pass


# ---------------------------------------------------------------------------
# typicality

@dataclass(frozen=True)
class TypicalityParams:
    n: int
    eps: float = 0.2
    eps_prime: float = 0.1

    def __post_init__(self):
        if self.n < 1:
            raise SimulationError("block length must be positive")
        if not 0 < self.eps_prime < self.eps:
            raise SimulationError("need 0 < eps_prime < eps")


def empirical_pmf(seqs: Sequence[Sequence[int]], sizes: Sequence[int] | None = None) -> np.ndarray:
    """Joint type of equal-length sequences, as an array of relative counts."""
    arrs = [np.asarray(s, dtype=np.int64) for s in seqs]
    if not arrs:
        raise SimulationError("need at least one sequence")
    n = len(arrs[0])
    if n == 0 or any(len(a) != n for a in arrs):
        raise SimulationError("sequences must have equal positive length")
    if sizes is None:
        sizes = [int(a.max()) + 1 for a in arrs]
    for a, k in zip(arrs, sizes):
        if a.min() < 0 or a.max() >= k:
            raise SimulationError("sequence symbol outside its alphabet")
    flat = np.ravel_multi_index(arrs, tuple(sizes))
    return np.bincount(flat, minlength=math.prod(sizes)).reshape(tuple(sizes)) / n


@dataclass(frozen=True, eq=False)
class TypicalityTable:
    """Allowed count range per cell of a joint pmf at block length n."""

    shape: tuple[int, ...]
    lo: np.ndarray                   # flattened, int
    hi: np.ndarray

    @classmethod
    def build(cls, p: np.ndarray, n: int, eps: float) -> "TypicalityTable":
        p = np.asarray(p, dtype=float)
        flat = p.ravel()
        lo = np.ceil(n * flat * (1 - eps) - 1e-9).astype(np.int64)
        hi = np.floor(n * flat * (1 + eps) + 1e-9).astype(np.int64)
        lo = np.maximum(lo, 0)
        zero = flat <= 0
        lo[zero] = 0
        hi[zero] = 0
        return cls(p.shape, lo, hi)

    def check(self, *seqs: np.ndarray) -> np.ndarray:
        """
        Typicality of each row of a batch. Every argument is (B, n) or (n,)
        and broadcasts to (B, n); returns a bool array of length B.
        """
        arrs = np.broadcast_arrays(*[np.asarray(s, dtype=np.int64) for s in seqs])
        if arrs[0].ndim == 1:
            arrs = [a[None, :] for a in arrs]
        b, n = arrs[0].shape
        flat = np.ravel_multi_index(arrs, self.shape)
        # a symbol in a cell that must stay empty rules a row out at once
        alive = np.flatnonzero(self.hi[flat].all(axis=1))
        if len(alive) < b:
            res = np.zeros(b, dtype=bool)
            if len(alive):
                res[alive] = self._counts_ok(flat[alive])
            return res
        return self._counts_ok(flat)

    def _counts_ok(self, flat: np.ndarray) -> np.ndarray:
        b = flat.shape[0]
        k = len(self.lo)
        counts = np.bincount((flat + (np.arange(b) * k)[:, None]).ravel(),
                             minlength=b * k).reshape(b, k)
        return np.all((counts >= self.lo) & (counts <= self.hi), axis=1)


def is_typical(seqs: Sequence[Sequence[int]], pmf: JointPmf | np.ndarray, eps: float) -> bool:
    """|pi(a) - p(a)| <= eps * p(a) at every cell a (Definition 1)."""
    p = pmf.mass if isinstance(pmf, JointPmf) else np.asarray(pmf, dtype=float)
    if len(seqs) != p.ndim:
        raise SimulationError(f"{len(seqs)} sequences for a {p.ndim}-variable pmf")
    pi = empirical_pmf(seqs, p.shape)
    return bool(np.all(np.abs(pi - p) <= eps * p + 1e-12))


# ---------------------------------------------------------------------------
# keyed codebooks

def _key(seed: int, role: str, cond: np.ndarray | None = None, extra: int | None = None) -> int:
    h = hashlib.blake2b(digest_size=16)
    h.update(int(seed).to_bytes(8, "little", signed=False))
    h.update(role.encode())
    if cond is not None:
        h.update(b"|")
        h.update(np.asarray(cond, dtype=np.uint8).tobytes())
    if extra is not None:
        h.update(b"#")
        h.update(int(extra).to_bytes(8, "little"))
    return int.from_bytes(h.digest(), "little")


def derive_seed(master: int, *labels) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master).to_bytes(8, "little", signed=False))
    for lab in labels:
        h.update(b"|" + str(lab).encode())
    return int.from_bytes(h.digest(), "little")


def _cdf_rows(cond: np.ndarray) -> np.ndarray:
    """Cumulative tables of a conditional pmf (last axis = output)."""
    c = np.cumsum(cond, axis=-1)
    c[..., -1] = 1.0 + 1e-12
    return c


def _sample_rows(u: np.ndarray, cdf: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling: u is (B, n) uniforms, cdf is (n, K)."""
    out = np.zeros(u.shape, dtype=np.int8)
    for k in range(cdf.shape[1] - 1):
        out += u >= cdf[:, k]
    return out


def message_count(n: int, rate: float) -> int:
    """floor(2^{nR}), guarded against rounding just below an integer."""
    if rate < 0:
        raise SimulationError("rates must be nonnegative")
    return max(1, int(math.floor(2 ** (n * rate) + 1e-9)))


def _conditional(joint: np.ndarray, n_cond: int) -> np.ndarray:
    """p(out | cond) from p(cond, out); rows with zero mass become uniform."""
    shp = joint.shape
    flat = joint.reshape(int(np.prod(shp[:n_cond])), -1)
    tot = flat.sum(axis=1, keepdims=True)
    out = np.where(tot > 0, flat / np.where(tot > 0, tot, 1), 1.0 / flat.shape[1])
    return out.reshape(shp)


@dataclass(frozen=True, eq=False)
class CodebookEnsemble:
    """
    Lazily generated codebooks. Plain scheme: u0(m0), u1(s1^n, m1),
    u2(s2^n, m2). Superposition scheme: u1 and u2 also depend on m0 and are
    drawn conditionally on u0(m0).
    """

    seed: int
    n: int
    rates: RateTriple
    scheme: str
    p_u0: np.ndarray                 # (U0,)
    p_u1: np.ndarray                 # (S1, U1) or (U0, S1, U1)
    p_u2: np.ndarray                 # (S2, U2) or (U0, S2, U2)
    counts: tuple[int, int, int] = field(init=False)

    def __post_init__(self):
        if self.scheme not in ("plain", "superposition"):
            raise SimulationError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "counts", tuple(
            message_count(self.n, r) for r in (self.rates.r0, self.rates.r1, self.rates.r2)))

    @classmethod
    def from_scenario(cls, scenario: ScenarioSpec, aux: AuxiliarySpec, rates: RateTriple, n: int,
                      seed: int, scheme: str = "plain") -> "CodebookEnsemble":
        p5 = marginalize(compose(scenario, aux), ["S1", "S2", "U0", "U1", "U2"]).mass
        p_u0 = p5.sum(axis=(0, 1, 3, 4))
        if scheme == "plain":
            p_u1 = _conditional(p5.sum(axis=(1, 2, 4)), 1)
            p_u2 = _conditional(p5.sum(axis=(0, 2, 3)), 1)
        else:
            p_u1 = _conditional(np.transpose(p5.sum(axis=(1, 4)), (1, 0, 2)), 2)
            p_u2 = _conditional(np.transpose(p5.sum(axis=(0, 3)), (1, 0, 2)), 2)
        return cls(seed, n, rates, scheme, p_u0, p_u1, p_u2)

    @property
    def _pad(self) -> int:
        return 4 * math.ceil(self.n / 4)

    def _uniforms(self, key: int, start: int, count: int) -> np.ndarray:
        bg = np.random.Philox(key=key)
        bg.advance(start * (self._pad // 4))
        return np.random.Generator(bg).random((count, self._pad))[:, : self.n]

    def u0(self, start: int = 0, count: int | None = None) -> np.ndarray:
        count = self.counts[0] - start if count is None else count
        cdf = np.broadcast_to(_cdf_rows(self.p_u0), (self.n, len(self.p_u0)))
        return _sample_rows(self._uniforms(_key(self.seed, "u0"), start, count), cdf)

    def _satellite(self, role: str, table: np.ndarray, seq, m0: int | None, u0_word,
                   start: int, count: int) -> np.ndarray:
        seq = np.asarray(seq, dtype=np.int64)
        if self.scheme == "plain":
            cdf = _cdf_rows(table)[seq]
            key = _key(self.seed, role, seq)
        else:
            if m0 is None or u0_word is None:
                raise SimulationError("superposition codewords need m0 and its u0 codeword")
            cdf = _cdf_rows(table)[np.asarray(u0_word, dtype=np.int64), seq]
            key = _key(self.seed, role, seq, m0)
        return _sample_rows(self._uniforms(key, start, count), cdf)

    def u1(self, s1, m0: int | None = None, u0_word=None, start: int = 0, count: int | None = None):
        count = self.counts[1] - start if count is None else count
        return self._satellite("u1", self.p_u1, s1, m0, u0_word, start, count)

    def u2(self, s2, m0: int | None = None, u0_word=None, start: int = 0, count: int | None = None):
        count = self.counts[2] - start if count is None else count
        return self._satellite("u2", self.p_u2, s2, m0, u0_word, start, count)

    def u0_chunks(self, chunk: int = CHUNK) -> Iterator[tuple[int, np.ndarray]]:
        for start in range(0, self.counts[0], chunk):
            yield start, self.u0(start, min(chunk, self.counts[0] - start))


# ---------------------------------------------------------------------------
# encoder, channel, decoders

@dataclass(frozen=True, eq=False)
class SchemeTables:
    """Typicality tables for one scenario at one (n, eps, eps')."""

    enc: TypicalityTable             # (S1,S2,U0,U1,U2) at eps'
    enc_s: TypicalityTable           # (S1,S2) at eps'
    enc_su0: TypicalityTable         # (S1,S2,U0) at eps'
    enc_su0u1: TypicalityTable
    enc_su0u2: TypicalityTable
    dec: tuple[TypicalityTable, TypicalityTable]        # (Si,U0,Ui,Yi) at eps
    dec_s: tuple[TypicalityTable, TypicalityTable]      # (Si,) at eps
    dec_sy: tuple[TypicalityTable, TypicalityTable]     # (Si,Yi)
    dec_u0y: tuple[TypicalityTable, TypicalityTable]    # (U0,Yi)
    dec_su0y: tuple[TypicalityTable, TypicalityTable]   # (Si,U0,Yi)
    source: np.ndarray
    channel: np.ndarray
    x_map: np.ndarray
    sizes: dict

    @classmethod
    def build(cls, scenario: ScenarioSpec, aux: AuxiliarySpec, params: TypicalityParams) -> "SchemeTables":
        pmf = compose(scenario, aux)
        n, e, ep = params.n, params.eps, params.eps_prime

        def tab(names, eps):
            return TypicalityTable.build(marginalize(pmf, names).mass, n, eps)

        dec, dec_s, dec_sy, dec_u0y, dec_su0y = [], [], [], [], []
        for i in ("1", "2"):
            dec.append(tab(["S" + i, "U0", "U" + i, "Y" + i], e))
            dec_s.append(tab(["S" + i], e))
            dec_sy.append(tab(["S" + i, "Y" + i], e))
            dec_u0y.append(tab(["U0", "Y" + i], e))
            dec_su0y.append(tab(["S" + i, "U0", "Y" + i], e))
        sizes = {nm: pmf.size_of(nm) for nm in pmf.names}
        return cls(tab(["S1", "S2", "U0", "U1", "U2"], ep), tab(["S1", "S2"], ep),
                   tab(["S1", "S2", "U0"], ep), tab(["S1", "S2", "U0", "U1"], ep),
                   tab(["S1", "S2", "U0", "U2"], ep),
                   tuple(dec), tuple(dec_s), tuple(dec_sy), tuple(dec_u0y), tuple(dec_su0y),
                   scenario.source.mass, scenario.channel, aux.x_map, sizes)


@dataclass(frozen=True)
class Encoding:
    m: tuple[int, int, int]          # 0-based
    found: bool
    source_typical: bool

    @property
    def messages(self) -> tuple[int, int, int]:
        return tuple(v + 1 for v in self.m)


def encode(s1, s2, ens: CodebookEnsemble, tables: SchemeTables) -> Encoding:
    """
    First (m0, m1, m2) in lexicographic order whose codewords are jointly
    eps'-typical with the sources; (1, 1, 1) when none exists. Marginal
    typicality is necessary for joint typicality, so partial tuples are
    pruned before the full check.
    """
    s1 = np.asarray(s1)
    s2 = np.asarray(s2)
    if not tables.enc_s.check(s1, s2)[0]:
        return Encoding((0, 0, 0), False, False)
    plain = ens.scheme == "plain"
    if plain:
        u1_all = ens.u1(s1)
        u2_all = ens.u2(s2)
    for start, block in ens.u0_chunks():
        ok = np.flatnonzero(tables.enc_su0.check(s1, s2, block))
        for j in ok:
            m0 = start + int(j)
            w0 = block[j]
            if not plain:
                u1_all = ens.u1(s1, m0, w0)
                u2_all = ens.u2(s2, m0, w0)
            ok1 = np.flatnonzero(tables.enc_su0u1.check(s1, s2, w0, u1_all))
            if len(ok1) == 0:
                continue
            ok2 = np.flatnonzero(tables.enc_su0u2.check(s1, s2, w0, u2_all))
            if len(ok2) == 0:
                continue
            for m1 in ok1:
                good = tables.enc.check(s1, s2, w0, u1_all[m1], u2_all[ok2])
                if good.any():
                    return Encoding((m0, int(m1), int(ok2[np.argmax(good)])), True, True)
    return Encoding((0, 0, 0), False, True)


def channel_input(s1, s2, enc: Encoding, ens: CodebookEnsemble, x_map: np.ndarray) -> np.ndarray:
    m0, m1, m2 = enc.m
    w0 = ens.u0(m0, 1)[0]
    if ens.scheme == "plain":
        w1 = ens.u1(s1, start=m1, count=1)[0]
        w2 = ens.u2(s2, start=m2, count=1)[0]
    else:
        w1 = ens.u1(s1, m0, w0, start=m1, count=1)[0]
        w2 = ens.u2(s2, m0, w0, start=m2, count=1)[0]
    return np.asarray(x_map)[s1, s2, w0, w1, w2]


def transmit(x, channel, noise_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Memoryless channel: draw (y1_i, y2_i) ~ p(y1, y2 | x_i) independently."""
    ch = np.asarray(channel, dtype=float)
    x = np.asarray(x, dtype=np.int64)
    nx, n1, n2 = ch.shape
    if x.size and (x.min() < 0 or x.max() >= nx):
        raise SimulationError("channel input outside the X alphabet")
    cdf = _cdf_rows(ch.reshape(nx, -1))[x]
    u = np.random.default_rng(noise_seed).random(len(x))
    flat = (u[:, None] >= cdf).sum(axis=1)
    return flat // n2, flat % n2


def all_sequences(k: int, n: int) -> np.ndarray:
    """All of {0..k-1}^n in lexicographic order, as an (k^n, n) array."""
    if k ** n > 1 << 24:
        raise BudgetExceeded(f"{k}^{n} source sequences is too many to enumerate")
    idx = np.arange(k ** n)
    powers = k ** np.arange(n - 1, -1, -1)
    return ((idx[:, None] // powers[None, :]) % k).astype(np.int8)


@dataclass(frozen=True)
class Decoding:
    estimate: tuple[int, ...] | None
    # candidate source sequence -> the m0 indices (0-based) that made it typical
    candidates: dict

    @property
    def status(self) -> str:
        if self.estimate is not None:
            return "unique"
        return "ambiguous" if self.candidates else "none"

    def value(self) -> tuple[int, ...]:
        if self.estimate is not None:
            return self.estimate
        if self.candidates:
            raise Ambiguous(f"{len(self.candidates)} candidate source sequences")
        raise NoneTypical("no source sequence is jointly typical with the output")


def decode(which: int, y, ens: CodebookEnsemble, tables: SchemeTables,
           budget: int = DEFAULT_BUDGET) -> Decoding:
    """
    Decoder ``which`` (1 or 2): collect every source sequence s^n for which
    some (m0, m_which) makes (s^n, u0(m0), u_which(s^n, ...), y^n) jointly
    eps-typical. Marginal typicality of (U0, Y) and of (S, Y) prunes the
    search; the answer is the same as the exhaustive scan.
    """
    i = which - 1
    y = np.asarray(y)
    ks = tables.sizes["S1" if which == 1 else "S2"]
    n = ens.n
    mi = ens.counts[which]
    cost = ks ** n * ens.counts[0] * mi
    if cost > budget:
        raise BudgetExceeded(f"decoding needs {cost} tuple checks (budget {budget})")
    seqs = all_sequences(ks, n)
    seqs = seqs[tables.dec_s[i].check(seqs) & tables.dec_sy[i].check(seqs, y)]
    found: dict = {}
    if len(seqs) == 0:
        return Decoding(None, {})
    gen = ens.u1 if which == 1 else ens.u2
    cache: dict = {}
    for start, block in ens.u0_chunks():
        for j in np.flatnonzero(tables.dec_u0y[i].check(block, y)):
            m0 = start + int(j)
            w0 = block[j]
            cand = seqs[tables.dec_su0y[i].check(seqs, w0, y)]
            for s in cand:
                key = s.tobytes()
                if ens.scheme == "plain":
                    if key not in cache:
                        cache[key] = gen(s)
                    words = cache[key]
                else:
                    words = gen(s, m0, w0)
                if tables.dec[i].check(s, w0, words, y).any():
                    found.setdefault(tuple(int(v) for v in s), []).append(m0)
    if len(found) == 1:
        return Decoding(next(iter(found)), found)
    return Decoding(None, found)


def decode_bruteforce(which: int, y, ens: CodebookEnsemble, tables: SchemeTables) -> Decoding:
    """Reference decoder: plain loops over every s^n, m0 and m_which."""
    i = which - 1
    ks = tables.sizes["S1" if which == 1 else "S2"]
    gen = ens.u1 if which == 1 else ens.u2
    found: dict = {}
    u0_all = ens.u0()
    for s in all_sequences(ks, ens.n):
        for m0 in range(ens.counts[0]):
            w0 = u0_all[m0]
            words = gen(s) if ens.scheme == "plain" else gen(s, m0, w0)
            for w in words:
                if tables.dec[i].check(s, w0, w, y)[0]:
                    found.setdefault(tuple(int(v) for v in s), []).append(m0)
                    break
    if len(found) == 1:
        return Decoding(next(iter(found)), found)
    return Decoding(None, found)


# ---------------------------------------------------------------------------
# trials

CORRECT, E1, E2, E3 = "correct", "E1", "E2", "E3"


def classify(dec: Decoding, truth, m0_true: int, true_typical: bool) -> str:
    """
    Correct if the decoder returned the truth. Otherwise the first of: E1, the
    transmitted tuple is not typical; E2, a wrong sequence is typical with
    u0(M0); E3, a wrong sequence is typical only with some other m0.
    """
    truth = tuple(int(v) for v in truth)
    if dec.estimate == truth:
        return CORRECT
    if not true_typical:
        return E1
    rivals = [m for s, ms in dec.candidates.items() if s != truth for m in ms]
    if m0_true in rivals:
        return E2
    return E3


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    seed: int
    source_typical: bool
    covering_failed: bool
    messages: tuple[int, int, int]   # 1-based
    decode1: str | None = None
    decode2: str | None = None

    @property
    def error(self) -> bool:
        return self.decode1 != CORRECT or self.decode2 != CORRECT

    def record(self, n: int, rates: RateTriple) -> dict:
        return {"trial": self.trial, "covering_failed": self.covering_failed,
                "decode1": self.decode1, "decode2": self.decode2, "n": n,
                "rates": [rates.r0, rates.r1, rates.r2], "seed": self.seed,
                "source_typical": self.source_typical, "messages": list(self.messages)}


def draw_source(source: np.ndarray, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(source, dtype=float)
    flat = np.random.default_rng(seed).choice(p.size, size=n, p=p.ravel())
    return (flat // p.shape[1]).astype(np.int8), (flat % p.shape[1]).astype(np.int8)


def _true_typical(tables: SchemeTables, ens: CodebookEnsemble, which: int, s, enc: Encoding, y) -> bool:
    m0 = enc.m[0]
    w0 = ens.u0(m0, 1)[0]
    mi = enc.m[which]
    gen = ens.u1 if which == 1 else ens.u2
    if ens.scheme == "plain":
        w = gen(s, start=mi, count=1)[0]
    else:
        w = gen(s, m0, w0, start=mi, count=1)[0]
    return bool(tables.dec[which - 1].check(s, w0, w, y)[0])


@dataclass(frozen=True, eq=False)
class _Job:
    scenario: ScenarioSpec
    aux: AuxiliarySpec
    rates: RateTriple
    params: TypicalityParams
    scheme: str
    master: int
    decode: bool
    budget: int


def _run_trial(job: _Job, tables: SchemeTables, t: int) -> TrialOutcome:
    seed = derive_seed(job.master, "trial", t)
    n = job.params.n
    s1, s2 = draw_source(tables.source, n, derive_seed(seed, "source"))
    ens = CodebookEnsemble.from_scenario(job.scenario, job.aux, job.rates, n,
                                         derive_seed(seed, "codebook"), job.scheme)
    enc = encode(s1, s2, ens, tables)
    if not job.decode:
        return TrialOutcome(t, seed, enc.source_typical, not enc.found, enc.messages)
    x = channel_input(s1, s2, enc, ens, tables.x_map)
    y1, y2 = transmit(x, tables.channel, derive_seed(seed, "noise"))
    d1 = decode(1, y1, ens, tables, job.budget)
    d2 = decode(2, y2, ens, tables, job.budget)
    c1 = classify(d1, s1, enc.m[0], _true_typical(tables, ens, 1, s1, enc, y1))
    c2 = classify(d2, s2, enc.m[0], _true_typical(tables, ens, 2, s2, enc, y2))
    return TrialOutcome(t, seed, enc.source_typical, not enc.found, enc.messages, c1, c2)


def _run_block(job: _Job, trials: Sequence[int]) -> list[TrialOutcome]:
    tables = SchemeTables.build(job.scenario, job.aux, job.params)
    return [_run_trial(job, tables, t) for t in trials]


def _run(job: _Job, trials: int, workers: int) -> list[TrialOutcome]:
    idx = list(range(trials))
    if workers <= 1 or trials < 2:
        return _run_block(job, idx)
    blocks = [idx[k::workers] for k in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_block, [job] * len(blocks), blocks))
    return sorted((o for p in parts for o in p), key=lambda o: o.trial)


def wilson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    from scipy.stats import binomtest

    ci = binomtest(k, n).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def _check_budget(ens_counts, decode_cost: int, budget: int, what: str):
    if decode_cost > budget:
        raise BudgetExceeded(f"{what} needs {decode_cost} tuple checks per trial (budget {budget})")


@dataclass(frozen=True)
class CoveringResult:
    n: int
    trials: int
    failures: int
    atypical_sources: int
    ci: tuple[float, float]
    outcomes: tuple[TrialOutcome, ...]
    seconds: float

    @property
    def p_fail(self) -> float:
        return self.failures / self.trials


def run_covering_experiment(scenario: ScenarioSpec, aux: AuxiliarySpec, rates: RateTriple,
                            params: TypicalityParams, trials: int, seed: int,
                            scheme: str = "plain", budget: int = DEFAULT_BUDGET,
                            workers: int = 1) -> CoveringResult:
    """Estimate P(no jointly typical codeword triple) over fresh codebooks and sources."""
    if trials < 1:
        raise SimulationError("need at least one trial")
    counts = [message_count(params.n, r) for r in (rates.r0, rates.r1, rates.r2)]
    _check_budget(counts, math.prod(counts), budget, "encoding")
    t0 = time.perf_counter()
    out = _run(_Job(scenario, aux, rates, params, scheme, seed, False, budget), trials, workers)
    fails = sum(o.covering_failed for o in out)
    return CoveringResult(params.n, trials, fails, sum(not o.source_typical for o in out),
                          wilson(fails, trials), tuple(out), time.perf_counter() - t0)


@dataclass(frozen=True)
class EndToEndResult:
    n: int
    trials: int
    errors: int
    covering_failures: int
    decoder1: dict
    decoder2: dict
    ci: tuple[float, float]
    outcomes: tuple[TrialOutcome, ...]
    seconds: float

    @property
    def p_error(self) -> float:
        return self.errors / self.trials


def run_end_to_end(scenario: ScenarioSpec, aux: AuxiliarySpec, rates: RateTriple,
                   params: TypicalityParams, trials: int, seed: int,
                   scheme: str = "plain", budget: int = DEFAULT_BUDGET,
                   workers: int = 1) -> EndToEndResult:
    """Full chain source -> encoder -> channel -> both decoders, with event counts."""
    if trials < 1:
        raise SimulationError("need at least one trial")
    counts = [message_count(params.n, r) for r in (rates.r0, rates.r1, rates.r2)]
    _check_budget(counts, math.prod(counts), budget, "encoding")
    n1, n2 = scenario.source.shape
    for k, mi in ((n1, counts[1]), (n2, counts[2])):
        _check_budget(counts, k ** params.n * counts[0] * mi, budget, "decoding")
    t0 = time.perf_counter()
    out = _run(_Job(scenario, aux, rates, params, scheme, seed, True, budget), trials, workers)
    errors = sum(o.error for o in out)

    def tally(attr):
        d = {CORRECT: 0, E1: 0, E2: 0, E3: 0}
        for o in out:
            d[getattr(o, attr)] += 1
        return d

    return EndToEndResult(params.n, trials, errors, sum(o.covering_failed for o in out),
                          tally("decode1"), tally("decode2"), wilson(errors, trials),
                          tuple(out), time.perf_counter() - t0)

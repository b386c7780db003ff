"""LDPC codes: construction, systematic encoding, log-domain sum-product decoding.

Two constructions are provided: the cyclic (63, 37) code whose checks are the
incidence vectors of the lines of the two-dimensional Euclidean geometry over
GF(8) not passing through the origin, and a progressive-edge-growth builder
that realises a target (lambda, rho) edge-perspective degree profile while
pushing the Tanner-graph girth up (no length-4 cycles at realistic sizes).

Channel LLRs follow the convention of :func:`aricode.channel.bit_llr`:
positive favours bit 1.  Internally the decoder flips to the standard
convention (positive favours bit 0) so the textbook tanh rule applies.
"""

from __future__ import annotations

import enum
import math
import warnings

import numpy as np

from ._accel import njit, use_numba
from .channel import ChannelParams, bit_llr

_CLIP = 30.0
_PROD_EPS = 1e-12


class LlrInitMode(enum.Enum):
    """LLR initialisation: ignore interference (M0A), fold it into an SINR
    (M0B), or use the exact interference-aware LLR (M1)."""

    M0A = "m0a"
    M0B = "m0b"
    M1 = "m1"


class ParityCheckMatrix:
    """Sparse binary H in edge-array form (edges sorted by check, then column)."""

    def __init__(self, check_ptr: np.ndarray, edge_var: np.ndarray, n: int):
        self.check_ptr = np.asarray(check_ptr, dtype=np.int64)
        self.edge_var = np.asarray(edge_var, dtype=np.int64)
        self.n = int(n)
        self.m = self.check_ptr.shape[0] - 1
        if self.edge_var.size and (self.edge_var.min() < 0 or self.edge_var.max() >= n):
            raise ValueError("edge column index out of range")
        self._rank = None
        self._encoder = None

    @classmethod
    def from_dense(cls, H) -> "ParityCheckMatrix":
        H = np.asarray(H)
        if not np.all((H == 0) | (H == 1)):
            raise ValueError("H must be binary")
        m, n = H.shape
        rows, cols = np.nonzero(H)
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        check_ptr = np.searchsorted(rows, np.arange(m + 1))
        return cls(check_ptr, cols, n)

    @classmethod
    def from_edges(cls, rows, cols, m: int, n: int) -> "ParityCheckMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        check_ptr = np.searchsorted(rows, np.arange(m + 1))
        return cls(check_ptr, cols, n)

    def to_dense(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        rows = np.repeat(np.arange(self.m), self.row_degrees)
        H[rows, self.edge_var] = 1
        return H

    @property
    def n_edges(self) -> int:
        return self.edge_var.shape[0]

    @property
    def row_degrees(self) -> np.ndarray:
        return np.diff(self.check_ptr)

    @property
    def col_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_var, minlength=self.n)

    @property
    def rank(self) -> int:
        """GF(2) rank of H."""
        if self._rank is None:
            self._ensure_encoder()
        return self._rank

    @property
    def k(self) -> int:
        """Code dimension n - rank(H)."""
        return self.n - self.rank

    @property
    def message_positions(self) -> np.ndarray:
        """Systematic (free) column indices carrying the message bits."""
        self._ensure_encoder()
        return self._encoder[1]

    def four_cycle_free(self) -> bool:
        """Exhaustive scan: no two checks may share two columns."""
        seen = set()
        col_adj = [[] for _ in range(self.n)]
        for c in range(self.m):
            for v in self.edge_var[self.check_ptr[c]:self.check_ptr[c + 1]]:
                col_adj[v].append(c)
        for checks in col_adj:
            for i in range(len(checks)):
                for j in range(i + 1, len(checks)):
                    pair = (checks[i], checks[j])
                    if pair in seen:
                        return False
                    seen.add(pair)
        return True

    def _ensure_encoder(self):
        if self._encoder is not None:
            return
        rref, pivots = _gf2_rref(self.to_dense())
        rank = len(pivots)
        self._rank = rank
        if rank < self.m:
            warnings.warn(
                f"H has GF(2) rank {rank} < {self.m} rows; dimension is k = {self.n - rank}",
                stacklevel=3,
            )
        pivot_cols = np.array(pivots, dtype=np.int64)
        free_mask = np.ones(self.n, dtype=bool)
        free_mask[pivot_cols] = False
        free_cols = np.nonzero(free_mask)[0]
        parity_map = rref[:rank][:, free_cols]
        self._encoder = (pivot_cols, free_cols, parity_map)


def _gf2_rref(H: np.ndarray):
    """Packed-bit Gauss-Jordan elimination; returns (RREF, pivot column list)."""
    H = np.asarray(H, dtype=np.uint8)
    m, n = H.shape
    R = np.packbits(H, axis=1)
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        byte, bit = divmod(c, 8)
        shift = 7 - bit
        col = (R[r:, byte] >> shift) & 1
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        col_all = (R[:, byte] >> shift) & 1
        rows = np.nonzero(col_all)[0]
        rows = rows[rows != r]
        if rows.size:
            R[rows] ^= R[r]
        pivots.append(c)
        r += 1
    rref = np.unpackbits(R, axis=1)[:, :n]
    return rref, pivots


def ldpc_encode(H: ParityCheckMatrix, message) -> np.ndarray:
    """Systematic encoding: message bits sit on the free columns of the RREF
    of H; parity bits are solved from the reduced rows."""
    H._ensure_encoder()
    pivot_cols, free_cols, parity_map = H._encoder
    msg = np.asarray(message, dtype=np.uint8)
    if msg.shape[0] != free_cols.shape[0]:
        raise ValueError(f"message length {msg.shape[0]} != k = {free_cols.shape[0]}")
    code = np.zeros(H.n, dtype=np.uint8)
    code[free_cols] = msg
    code[pivot_cols] = (parity_map @ msg) & 1
    return code


def syndrome(H: ParityCheckMatrix, codeword) -> np.ndarray:
    """H * c^T over GF(2)."""
    bits = np.asarray(codeword, dtype=np.uint8)
    return np.bitwise_xor.reduceat(bits[H.edge_var], H.check_ptr[:-1])


# ---------------------------------------------------------------------------
# (63, 37) Euclidean-geometry code
# ---------------------------------------------------------------------------

def _gf64_tables(poly: int = 0b1000011):
    """Antilog/log tables of GF(64) built from a primitive degree-6 polynomial."""
    alog = np.empty(63, dtype=np.int64)
    a = 1
    for i in range(63):
        alog[i] = a
        a <<= 1
        if a & 0x40:
            a ^= poly
    log = {int(alog[i]): i for i in range(63)}
    if len(log) != 63:
        raise RuntimeError("polynomial is not primitive")
    return alog, log


def eg_ldpc_63_37() -> ParityCheckMatrix:
    """Cyclic 63x63 parity-check matrix from the planar Euclidean geometry
    over GF(8): all 63 shifts of one line that misses the origin.

    Row and column weights are 8 and the two-lines-meet-in-one-point property
    rules out length-4 cycles.  The GF(2) rank is 26, giving k = 37.
    """
    alog, log = _gf64_tables()
    # subfield GF(8) = {0} U {alpha^(9j)}; line {1 + alpha*beta : beta in GF(8)}
    line = {1}
    for j in range(7):
        line.add(1 ^ int(alog[(1 + 9 * j) % 63]))
    if len(line) != 8 or 0 in line:
        raise RuntimeError("line construction failed")
    v = np.zeros(63, dtype=np.uint8)
    for p in line:
        v[log[p]] = 1
    H = np.empty((63, 63), dtype=np.uint8)
    for r in range(63):
        H[r] = np.roll(v, r)
    return ParityCheckMatrix.from_dense(H)


# ---------------------------------------------------------------------------
# Progressive edge growth
# ---------------------------------------------------------------------------

def _validate_edge_dist(dist: dict, name: str):
    total = 0.0
    for d, f in dist.items():
        if int(d) != d or d < 2:
            raise ValueError(f"{name} degrees must be integers >= 2, got {d}")
        if f < 0:
            raise ValueError(f"{name}[{d}] must be >= 0")
        total += f
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"{name} coefficients must sum to 1, got {total}")


def _largest_remainder(fractions: dict[int, float], total: int) -> dict[int, int]:
    degrees = sorted(fractions)
    raw = {d: total * fractions[d] for d in degrees}
    counts = {d: int(math.floor(raw[d])) for d in degrees}
    short = total - sum(counts.values())
    # largest fractional parts first; degree as deterministic tiebreak
    order = sorted(degrees, key=lambda d: (-(raw[d] - counts[d]), d))
    for d in order[:short]:
        counts[d] += 1
    return {d: c for d, c in counts.items() if c > 0}


def _fit_check_counts(rho: dict, m: int, n_edges: int) -> dict[int, int]:
    s_rho = sum(f / d for d, f in rho.items())
    node_frac = {d: (f / d) / s_rho for d, f in rho.items()}
    counts = _largest_remainder(node_frac, m)
    surplus = sum(d * c for d, c in counts.items()) - n_edges
    # repair the edge balance by shifting nodes out of (or into) the top class
    while surplus != 0:
        top = max(d for d, c in counts.items() if c > 0)
        if surplus > 0:
            if top - 1 < 2:
                raise ValueError(f"infeasible degree sequence: {surplus} surplus edges cannot be removed")
            k = min(counts[top], surplus)
            counts[top] -= k
            counts[top - 1] = counts.get(top - 1, 0) + k
            surplus -= k
        else:
            k = min(counts[top], -surplus)
            counts[top] -= k
            counts[top + 1] = counts.get(top + 1, 0) + k
            surplus += k
        counts = {d: c for d, c in counts.items() if c > 0}
    return counts


def _peg_impl(var_deg, check_cap, rand_vals):  # pragma: no cover - compiled
    n = var_deg.shape[0]
    m = check_cap.shape[0]
    n_edges = 0
    for i in range(n):
        n_edges += var_deg[i]
    var_ptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        var_ptr[i + 1] = var_ptr[i] + var_deg[i]
    check_ptr = np.zeros(m + 1, dtype=np.int64)
    for c in range(m):
        check_ptr[c + 1] = check_ptr[c] + check_cap[c]
    var_adj = np.empty(n_edges, dtype=np.int64)
    check_adj = np.empty(n_edges, dtype=np.int64)
    var_fill = np.zeros(n, dtype=np.int64)
    check_fill = np.zeros(m, dtype=np.int64)

    stamp_var = np.full(n, -1, dtype=np.int64)
    stamp_check = np.full(m, -1, dtype=np.int64)
    dist_check = np.zeros(m, dtype=np.int64)
    qv = np.empty(n, dtype=np.int64)
    qc = np.empty(m, dtype=np.int64)
    big = np.int64(1) << 60

    edge_idx = 0
    for v in range(n):
        for _ in range(var_deg[v]):
            gen = edge_idx
            # BFS from v over the current graph; checks get odd distances
            stamp_var[v] = gen
            qv[0] = v
            nv = 1
            d = 1
            while nv > 0:
                nc = 0
                for iq in range(nv):
                    vv = qv[iq]
                    for t in range(var_fill[vv]):
                        c = var_adj[var_ptr[vv] + t]
                        if stamp_check[c] != gen:
                            stamp_check[c] = gen
                            dist_check[c] = d
                            qc[nc] = c
                            nc += 1
                nv = 0
                for iq in range(nc):
                    c = qc[iq]
                    for t in range(check_fill[c]):
                        vv = check_adj[check_ptr[c] + t]
                        if stamp_var[vv] != gen:
                            stamp_var[vv] = gen
                            qv[nv] = vv
                            nv += 1
                d += 2
            # candidates: spare capacity, not already a neighbour of v
            best_dist = np.int64(-1)
            best_deg = big
            n_tie = 0
            for c in range(m):
                if check_fill[c] >= check_cap[c]:
                    continue
                dist = big if stamp_check[c] != gen else dist_check[c]
                if dist == 1:
                    continue
                if dist > best_dist or (dist == best_dist and check_fill[c] < best_deg):
                    best_dist = dist
                    best_deg = check_fill[c]
                    n_tie = 1
                elif dist == best_dist and check_fill[c] == best_deg:
                    n_tie += 1
            if n_tie == 0:
                return var_adj, check_adj, var_ptr, check_ptr, np.int64(v)
            pick = rand_vals[edge_idx] % n_tie
            chosen = np.int64(-1)
            for c in range(m):
                if check_fill[c] >= check_cap[c]:
                    continue
                dist = big if stamp_check[c] != gen else dist_check[c]
                if dist == best_dist and check_fill[c] == best_deg:
                    if pick == 0:
                        chosen = c
                        break
                    pick -= 1
            var_adj[var_ptr[v] + var_fill[v]] = chosen
            check_adj[check_ptr[chosen] + check_fill[chosen]] = v
            var_fill[v] += 1
            check_fill[chosen] += 1
            edge_idx += 1
    return var_adj, check_adj, var_ptr, check_ptr, np.int64(-1)


_peg_nb = njit(cache=True)(_peg_impl)


def peg_construct(lam: dict, rho: dict, n: int, seed: int,
                  n_checks: int | None = None) -> ParityCheckMatrix:
    """Build a Tanner graph matching edge-perspective profiles (lambda, rho).

    Node counts come from largest-remainder rounding of the node-perspective
    fractions; the check side is then repaired through its highest occupied
    degree class until the edge counts balance.  ``n_checks`` overrides the
    number of checks implied by rho (the repair then reshapes the check
    profile, keeping its support contiguous).  Edges are placed one variable
    at a time, each on a spare-capacity check at maximal graph distance, so
    short cycles appear only when unavoidable.  Deterministic given ``seed``.
    """
    _validate_edge_dist(lam, "lambda")
    _validate_edge_dist(rho, "rho")
    s_lam = sum(f / d for d, f in lam.items())
    var_counts = _largest_remainder({d: (f / d) / s_lam for d, f in lam.items()}, n)
    n_edges = sum(d * c for d, c in var_counts.items())
    if n_checks is None:
        s_rho = sum(f / d for d, f in rho.items())
        n_checks = int(round(n_edges * s_rho))
    check_counts = _fit_check_counts(rho, n_checks, n_edges)

    var_deg = np.repeat(
        np.array(sorted(var_counts), dtype=np.int64),
        np.array([var_counts[d] for d in sorted(var_counts)], dtype=np.int64),
    )
    check_cap = np.repeat(
        np.array(sorted(check_counts), dtype=np.int64),
        np.array([check_counts[d] for d in sorted(check_counts)], dtype=np.int64),
    )
    rng = np.random.default_rng(np.random.SeedSequence([0x9E6, int(seed)]))
    rand_vals = rng.integers(0, np.iinfo(np.int64).max, size=n_edges, dtype=np.int64)

    kernel = _peg_nb if use_numba() else _peg_impl
    var_adj, check_adj, var_ptr, check_ptr, fail = kernel(var_deg, check_cap, rand_vals)
    if fail >= 0:
        raise ValueError(
            f"infeasible degree sequence: no spare check available while wiring column {fail}"
        )
    rows = np.repeat(np.arange(check_ptr.shape[0] - 1), np.diff(check_ptr))
    return ParityCheckMatrix.from_edges(rows, check_adj, check_ptr.shape[0] - 1, n)


# ---------------------------------------------------------------------------
# Sum-product decoding
# ---------------------------------------------------------------------------

def init_llrs(y, params: ChannelParams, mode: LlrInitMode) -> np.ndarray:
    """Channel LLRs for the decoder (positive favours bit 1)."""
    y = np.asarray(y, dtype=np.complex128)
    if mode is LlrInitMode.M1:
        return np.atleast_1d(bit_llr(y, params))
    if mode is LlrInitMode.M0A:
        return -4.0 * y.real * math.sqrt(params.snr)
    if mode is LlrInitMode.M0B:
        return -4.0 * y.real * math.sqrt(params.snr / (1.0 + params.inr))
    raise ValueError(f"unknown init mode {mode!r}")


def check_to_variable(incoming, prod_eps: float = _PROD_EPS) -> np.ndarray:
    """Leave-one-out tanh-rule messages of a single parity check.

    Operates in the decoder's internal convention (positive favours bit 0).
    """
    t = np.tanh(0.5 * np.clip(np.asarray(incoming, dtype=np.float64), -_CLIP, _CLIP))
    d = t.shape[0]
    out = np.empty(d)
    for j in range(d):
        p = 1.0
        for i in range(d):
            if i != j:
                p *= t[i]
        out[j] = 2.0 * np.arctanh(np.clip(p, -(1.0 - prod_eps), 1.0 - prod_eps))
    return out


def _spa_impl(lam, edge_var, check_ptr, max_iter, clip, prod_eps):  # pragma: no cover - compiled
    n_edges = edge_var.shape[0]
    m = check_ptr.shape[0] - 1
    n = lam.shape[0]
    dmax = 0
    for c in range(m):
        d = check_ptr[c + 1] - check_ptr[c]
        if d > dmax:
            dmax = d
    c2v = np.zeros(n_edges)
    v2c = np.empty(n_edges)
    tf = np.empty(dmax)
    pre = np.empty(dmax)
    lam_tot = lam.copy()
    bits = np.zeros(n, dtype=np.uint8)
    hi = 1.0 - prod_eps
    for it in range(1, max_iter + 1):
        for e in range(n_edges):
            x = lam_tot[edge_var[e]] - c2v[e]
            if x > clip:
                x = clip
            elif x < -clip:
                x = -clip
            v2c[e] = x
        for c in range(m):
            s = check_ptr[c]
            d = check_ptr[c + 1] - s
            for j in range(d):
                tf[j] = math.tanh(0.5 * v2c[s + j])
            pre[0] = 1.0
            for j in range(1, d):
                pre[j] = pre[j - 1] * tf[j - 1]
            suf = 1.0
            for j in range(d - 1, -1, -1):
                p = pre[j] * suf
                if p > hi:
                    p = hi
                elif p < -hi:
                    p = -hi
                c2v[s + j] = 2.0 * math.atanh(p)
                suf *= tf[j]
        for v in range(n):
            lam_tot[v] = lam[v]
        for e in range(n_edges):
            lam_tot[edge_var[e]] += c2v[e]
        for v in range(n):
            bits[v] = 1 if lam_tot[v] < 0.0 else 0
        ok = True
        for c in range(m):
            parity = np.uint8(0)
            for e in range(check_ptr[c], check_ptr[c + 1]):
                parity ^= bits[edge_var[e]]
            if parity:
                ok = False
                break
        if ok:
            return bits, True, it
    return bits, False, max_iter


_spa_nb = njit(cache=True)(_spa_impl)


def _spa_np(lam, edge_var, check_ptr, max_iter, clip, prod_eps):
    m = check_ptr.shape[0] - 1
    n = lam.shape[0]
    deg = np.diff(check_ptr)
    row = np.repeat(np.arange(m), deg)
    slot = np.arange(edge_var.shape[0]) - check_ptr[row]
    dmax = int(deg.max())
    hi = 1.0 - prod_eps
    c2v = np.zeros(edge_var.shape[0])
    lam_tot = lam.copy()
    bits = np.zeros(n, dtype=np.uint8)
    for it in range(1, max_iter + 1):
        v2c = np.clip(lam_tot[edge_var] - c2v, -clip, clip)
        t = np.tanh(0.5 * v2c)
        mat = np.ones((m, dmax))
        mat[row, slot] = t
        fwd = np.cumprod(mat, axis=1)
        bwd = np.cumprod(mat[:, ::-1], axis=1)[:, ::-1]
        excl = np.ones_like(mat)
        excl[:, 1:] *= fwd[:, :-1]
        excl[:, :-1] *= bwd[:, 1:]
        c2v = 2.0 * np.arctanh(np.clip(excl[row, slot], -hi, hi))
        lam_tot = lam + np.bincount(edge_var, weights=c2v, minlength=n)
        bits = (lam_tot < 0.0).astype(np.uint8)
        if not np.bitwise_xor.reduceat(bits[edge_var], check_ptr[:-1]).any():
            return bits, True, it
    return bits, False, max_iter


def spa_decode(H: ParityCheckMatrix, llr, max_iter: int = 5):
    """Flooding sum-product decoding.

    ``llr`` follows the channel convention (positive favours bit 1); decisions
    are bit 1 iff the total LLR is positive.  Stops as soon as the hard
    decisions satisfy every check.  Returns (bits, converged, iterations).
    """
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape[0] != H.n:
        raise ValueError(f"llr length {llr.shape[0]} != n = {H.n}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if np.any(np.diff(H.check_ptr) == 0):
        raise ValueError("H has empty checks")
    lam = -llr
    kernel = _spa_nb if use_numba() else _spa_np
    bits, converged, iters = kernel(lam, H.edge_var, H.check_ptr, max_iter, _CLIP, _PROD_EPS)
    return np.asarray(bits, dtype=np.uint8), bool(converged), int(iters)


# ---------------------------------------------------------------------------
# alist interchange format
# ---------------------------------------------------------------------------

def write_alist(H: ParityCheckMatrix, path):
    """ASCII alist: dimensions, max degrees, degree lists, 1-indexed neighbours."""
    col_deg = H.col_degrees
    row_deg = H.row_degrees
    col_adj = [[] for _ in range(H.n)]
    for c in range(H.m):
        for v in H.edge_var[H.check_ptr[c]:H.check_ptr[c + 1]]:
            col_adj[v].append(c + 1)
    lines = [
        f"{H.n} {H.m}",
        f"{col_deg.max()} {row_deg.max()}",
        " ".join(str(d) for d in col_deg),
        " ".join(str(d) for d in row_deg),
    ]
    for v in range(H.n):
        lines.append(" ".join(str(c) for c in sorted(col_adj[v])))
    for c in range(H.m):
        lines.append(" ".join(str(v + 1) for v in H.edge_var[H.check_ptr[c]:H.check_ptr[c + 1]]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_alist(path) -> ParityCheckMatrix:
    """Read an alist file (zero-padded variants accepted)."""
    with open(path) as fh:
        rows_txt = [line.split() for line in fh if line.strip()]
    nums = [[int(tok) for tok in line] for line in rows_txt]
    n, m = nums[0]
    # skip max-degree line and the two degree lists; neighbour lists follow
    var_lists = nums[4:4 + n]
    rows, cols = [], []
    for v, checks in enumerate(var_lists):
        for c in checks:
            if c > 0:
                rows.append(c - 1)
                cols.append(v)
    return ParityCheckMatrix.from_edges(rows, cols, m, n)

"""Retrofitting authentication onto a deterministic base code.

Noise injection: each message m gets a fixed mean-shift table row t(m)
with t_i ~ N(0, (1 - f_i^2(m)) rho_delta) and the encoder transmits
x(m) + t(m) + f(m) . G_delta, where f(m) is the overlay's level vector.
The decoder re-runs the base decoder and then, per overlay level k
below 1, checks that the squared residuals on the decoded message's
level-k coordinates are no larger than a chi-square-calibrated
threshold ell (1 + delta); any failure yields the rejection symbol.

Decimation: a uniformly chosen subset of messages survives; decoding to
a non-survivor is rejected.  This trades a small rate loss for a
false-authentication guarantee that holds for *any* wrong message, not
just a targeted one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from . import bounds as bounds_mod
from .basecode import BaseCode
from .overlay import OverlayCode
from .streams import Role, one_shot_rng

REJECT = "!"


class AuthCodeError(ValueError):
    pass


@dataclass(frozen=True)
class DetectorOutcome:
    decoded: int | str              # message id, or REJECT
    base_decoded: int
    statistics: dict[float, float]  # level -> residual statistic
    threshold: float
    decimation_rejected: bool = False


@dataclass(frozen=True, eq=False)
class AuthCode:
    """A base code wrapped with overlay noise (and optionally decimated)."""

    base: BaseCode
    overlay: OverlayCode
    rho_delta: float
    delta: float
    t_table: np.ndarray             # (message_count, n)
    t_zero: bool = False
    decimated: frozenset[int] | None = None
    decimation_info: bounds_mod.DecimationBounds | None = None
    attempts: int = 1

    def __post_init__(self) -> None:
        if self.base.message_count != self.overlay.message_count:
            raise AuthCodeError("base and overlay must agree on message count")
        if self.base.n != self.overlay.n:
            raise AuthCodeError("base and overlay must agree on n")
        t = np.asarray(self.t_table, dtype=np.float64)
        if t.shape != self.base.codewords.shape:
            raise AuthCodeError("t_table must match the codeword table shape")
        object.__setattr__(self, "t_table", t)
        object.__setattr__(self, "_levels", self.overlay.level_matrix())
        idx = []
        for m in range(self.overlay.message_count):
            idx.append(tuple(
                np.fromiter(sorted(self.overlay.assignment[m][j]), dtype=np.int64) - 1
                for j in range(len(self.overlay.level_set))))
        object.__setattr__(self, "_test_indices", tuple(idx))

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def message_count(self) -> int:
        return self.base.message_count

    @property
    def ell(self) -> int:
        return self.overlay.ell

    @property
    def threshold(self) -> float:
        return self.overlay.ell * (1.0 + self.delta)

    @property
    def level_matrix(self) -> np.ndarray:
        return self._levels  # type: ignore[attr-defined]

    def test_indices(self, m: int) -> tuple[np.ndarray, ...]:
        """0-based coordinate arrays of message m, one per level in K."""
        return self._test_indices[m]  # type: ignore[attr-defined]

    @property
    def rate(self) -> float:
        """Noise injection keeps the base rate; decimation shrinks it to
        (1/n) ln |surviving messages|."""
        if self.decimated is None:
            return self.base.rate
        return math.log(len(self.decimated)) / self.n

    @property
    def power(self) -> float:
        """Exact max-message average transmit power:
        max_m (1/n)(sum (x+t)^2 + rho_delta sum f^2)."""
        mean_sq = np.sum((self.base.codewords + self.t_table) ** 2, axis=1)
        noise = self.rho_delta * np.sum(self.level_matrix**2, axis=1)
        return float(np.max(mean_sq + noise)) / self.n

    def is_valid_message(self, m: int) -> bool:
        if self.decimated is None:
            return 0 <= m < self.message_count
        return m in self.decimated or m == self.base.null_id


def inject_noise(base: BaseCode, overlay: OverlayCode, rho_delta: float,
                 delta: float, seed: int = 0, *, t_zero: bool = False,
                 enforce_bounds: bool = True,
                 retry_limit: int = 64) -> AuthCode:
    """Wrap ``base`` with overlay noise (the first code modification).

    The mean-shift table is resampled until both construction checks
    hold: the spurious codeword/shift correlation
    sum_i 2 t_i x_i <= 2n sqrt(2 omega (r+1) rho_delta) for every
    message, and the exact wrapped power staying under the analysed
    power bound.  ``t_zero`` pins the table to zero (the derandomised
    variant, power bound omega + rho_delta).
    """
    if rho_delta <= 0.0:
        raise AuthCodeError("rho_delta must be positive")
    if not 0.0 < delta < 1.0:
        raise AuthCodeError("delta must lie in (0,1)")
    if base.message_count != overlay.message_count:
        raise AuthCodeError("base and overlay must agree on message count")
    if base.n != overlay.n:
        raise AuthCodeError("base and overlay must agree on n")
    levels = overlay.level_matrix()
    t_var = (1.0 - levels**2) * rho_delta
    if t_zero:
        return AuthCode(base, overlay, rho_delta, delta,
                        np.zeros_like(base.codewords), t_zero=True)

    omega_h, rate_h = base.power, base.rate
    corr_cap = 2.0 * base.n * math.sqrt(2.0 * omega_h * (rate_h + 1.0) * rho_delta)
    power_cap = bounds_mod.injection_power_bound(
        omega_h, rate_h, rho_delta, base.n, len(overlay.level_set.extended),
        len(overlay.level_set))
    for attempt in range(retry_limit):
        rng = one_shot_rng(seed, Role.T_TABLE, attempt)
        t = rng.standard_normal(base.codewords.shape) * np.sqrt(t_var)
        code = AuthCode(base, overlay, rho_delta, delta, t,
                        attempts=attempt + 1)
        if not enforce_bounds:
            return code
        corr_ok = bool(np.all(np.sum(2.0 * t * base.codewords, axis=1) <= corr_cap))
        if corr_ok and code.power <= power_cap:
            return code
    raise AuthCodeError(
        f"mean-shift table failed the construction checks {retry_limit} times")


def auth_encode(code: AuthCode, m: int,
                rng: np.random.Generator | int = 0) -> np.ndarray:
    """One transmission of message m: x(m) + t(m) + f(m) . G_delta."""
    if isinstance(rng, (int, np.integer)):
        rng = one_shot_rng(int(rng), Role.DELTA)
    unit = rng.standard_normal(code.n)
    return auth_encode_batch(code, np.asarray([m]), unit[None, :])[0]


def auth_encode_batch(code: AuthCode, ms: np.ndarray,
                      unit_delta: np.ndarray) -> np.ndarray:
    """Vectorised encoder; ``unit_delta`` holds unit normals (B, n)."""
    scale = math.sqrt(code.rho_delta)
    return (code.base.codewords[ms] + code.t_table[ms]
            + code.level_matrix[ms] * (scale * unit_delta))


def detect_batch(code: AuthCode, ys: np.ndarray, base_decoded: np.ndarray,
                 rho_dec: float, *, detector: bool = True) -> np.ndarray:
    """Rejection mask for a batch: residual statistics over the decoded
    message's per-level coordinate sets, plus the decimation filter."""
    b = ys.shape[0]
    rejected = np.zeros(b, dtype=bool)
    ks = code.overlay.level_set.levels
    if detector:
        thr = code.threshold
        for m in np.unique(base_decoded):
            sel = np.flatnonzero(base_decoded == m)
            # same grouping as the encoder so clean level-0 coordinates
            # cancel bitwise (the rho_dec = 0 sentinel relies on this)
            center = code.base.codewords[m] + code.t_table[m]
            resid = ys[sel] - center
            fail = np.zeros(len(sel), dtype=bool)
            for j, k in enumerate(ks):
                idx = code.test_indices(int(m))[j]
                if idx.size == 0:
                    continue
                denom = k * k * code.rho_delta + rho_dec
                ssq = np.sum(resid[:, idx] ** 2, axis=1)
                if denom == 0.0:
                    # rho_dec = 0 diagnostic: a zero-variance level accepts
                    # only exactly-zero residuals.
                    stats = np.where(ssq == 0.0, 0.0, np.inf)
                else:
                    stats = ssq / denom
                fail |= stats > thr
            rejected[sel] = fail
    if code.decimated is not None:
        valid = np.fromiter(
            (code.is_valid_message(int(m)) for m in base_decoded),
            dtype=bool, count=b)
        rejected |= ~valid
    return rejected


def auth_decode_detect(code: AuthCode, y: np.ndarray, rho_dec: float, *,
                       detector: bool = True) -> DetectorOutcome:
    """Base decode then per-level residual tests; level 1 is never
    tested.  ``detector=False`` disables the residual tests (the
    delta -> infinity sentinel), leaving only decimation filtering."""
    if rho_dec < 0.0:
        raise AuthCodeError("rho_dec must be nonnegative")
    y = np.asarray(y, dtype=np.float64)
    m_hat = int(code.base.decode(y))
    resid = y - (code.base.codewords[m_hat] + code.t_table[m_hat])
    stats: dict[float, float] = {}
    rejected = False
    if detector:
        for j, k in enumerate(code.overlay.level_set.levels):
            idx = code.test_indices(m_hat)[j]
            denom = k * k * code.rho_delta + rho_dec
            ssq = float(np.sum(resid[idx] ** 2))
            stats[k] = (0.0 if ssq == 0.0 else math.inf) if denom == 0.0 \
                else ssq / denom
            rejected |= stats[k] > code.threshold
    decim_reject = not code.is_valid_message(m_hat)
    decoded: int | str = REJECT if (rejected or decim_reject) else m_hat
    return DetectorOutcome(decoded=decoded, base_decoded=m_hat,
                           statistics=stats, threshold=code.threshold,
                           decimation_rejected=decim_reject)


def sample_decimation_subset(message_count: int, size: int,
                             rng: np.random.Generator,
                             exclude: int | None = None) -> frozenset[int]:
    """Uniformly random size-``size`` subset of message ids (optionally
    excluding the null id)."""
    pool = np.array([m for m in range(message_count) if m != exclude])
    if size > pool.size:
        raise AuthCodeError("subset size exceeds candidate messages")
    return frozenset(int(v) for v in rng.choice(pool, size=size, replace=False))


def decimate(code: AuthCode, rho_dec: float, seed: int = 0, *,
             rho_adv: float | None = None,
             adversary_agnostic: bool = False,
             target_size_override: int | None = None) -> AuthCode:
    """Apply the decimation modification: keep a uniformly random subset
    of floor(exp(n r')) messages where r' is the decimated rate, and
    reject any decode outside it (the null message always survives).

    Raises with a per-term diagnostic when r' <= 0 or the surviving set
    would have fewer than two messages.  The analysed-rate precondition
    is evaluated and recorded on the result's ``decimation_info`` (its
    ``feasible`` flag) rather than enforced, since it needs message
    counts far beyond anything materialisable.  ``target_size_override``
    substitutes an explicit survivor count for diagnostic experiments.
    """
    if code.decimated is not None:
        raise AuthCodeError("code is already decimated")
    info = bounds_mod.decimation_bounds(
        code.n, code.overlay.level_set, code.overlay.gamma, code.delta,
        code.rho_delta, rho_dec, code.power, code.base.rate,
        rho_adv=rho_adv, adversary_agnostic=adversary_agnostic)
    size = target_size_override if target_size_override is not None \
        else info.target_size
    if size < 2 or info.r_decimated <= 0 and target_size_override is None:
        raise AuthCodeError(
            "decimation infeasible: surviving rate "
            f"{info.r_decimated:.6g} (rate term {info.terms['rate_term']:.6g} "
            f"- margin term {info.terms['margin_term']:.6g} "
            f"- quantization term {info.terms['quantization_term']:.6g}) "
            f"gives target size {info.target_size}")
    candidates = code.message_count - (1 if code.base.null_id is not None else 0)
    if size > candidates:
        raise AuthCodeError(
            f"target size {size} exceeds available messages {candidates}")
    rng = one_shot_rng(seed, Role.DECIMATION)
    surviving = sample_decimation_subset(code.message_count, size, rng,
                                         exclude=code.base.null_id)
    return replace(code, decimated=surviving, decimation_info=info)


def to_json_dict(code: AuthCode, base_ref: str, overlay_ref: str) -> dict[str, Any]:
    out: dict[str, Any] = {
        "base_ref": base_ref,
        "overlay_ref": overlay_ref,
        "rho_delta": code.rho_delta,
        "delta": code.delta,
        "t_table": code.t_table.tolist(),
        "decimated_ids": sorted(code.decimated) if code.decimated is not None else None,
    }
    if code.t_zero:
        out["t_zero"] = True
    return out


def from_json_dict(data: dict[str, Any], base: BaseCode,
                   overlay: OverlayCode) -> AuthCode:
    decim = data.get("decimated_ids")
    return AuthCode(base, overlay, float(data["rho_delta"]),
                    float(data["delta"]),
                    np.asarray(data["t_table"], dtype=np.float64),
                    t_zero=bool(data.get("t_zero", False)),
                    decimated=frozenset(decim) if decim is not None else None)

"""Optimal (and tunable) attacks against the authentication scheme.

The adversary observes V = X(m) + G_adv non-causally, knows every code
table, and chooses an additive channel input z.  Against a target
message m', the best it can do is subtract its MMSE estimate of the
transmitted signal and substitute the target's mean signal, driving the
decoder-side conditional mean of Y - x(m') - t(m') to zero; what
remains is independent noise whose per-coordinate variance is the
residual-variance law.  The per-level cancellation weight is exposed so
tests can confirm the MMSE choice actually maximises acceptance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .authcode import AuthCode


class AttackError(ValueError):
    pass

CustomAttack = Callable[[np.ndarray, int, AuthCode], np.ndarray]


@dataclass(frozen=True)
class AttackSpec:
    """Attack family selector: 'none', 'targeted', 'impersonation', or
    'custom' (a callable of (v, transmitted m, code) -> z)."""

    kind: str
    target: int | None = None
    custom: CustomAttack | None = None
    weight_scale: float | None = None   # scales the MMSE weight (grid tests)

    def __post_init__(self) -> None:
        if self.kind not in ("none", "targeted", "impersonation", "custom"):
            raise AttackError(f"unknown attack kind {self.kind!r}")
        if self.kind in ("targeted", "impersonation") and self.target is None:
            raise AttackError(f"{self.kind} attack needs a target message")
        if self.kind == "custom" and self.custom is None:
            raise AttackError("custom attack needs a callable")

    @classmethod
    def parse(cls, text: str) -> "AttackSpec":
        """Parse 'none', 'targeted:<id>', or 'impersonation:<id>'."""
        name, _, arg = text.strip().partition(":")
        if name == "none":
            return cls(kind="none")
        if name in ("targeted", "impersonation"):
            if not arg:
                raise AttackError(f"{name} attack needs ':<target id>'")
            return cls(kind=name, target=int(arg))
        raise AttackError(f"cannot parse attack spec {text!r}")


def no_attack(n: int) -> np.ndarray:
    return np.zeros(n)


def mmse_weight(level: float, rho_delta: float, rho_adv: float) -> float:
    """Cancellation weight f^2 rho_delta / (f^2 rho_delta + rho_adv);
    zero when the coordinate carries no injected noise."""
    injected = level * level * rho_delta
    if injected + rho_adv == 0.0:
        return 0.0
    return injected / (injected + rho_adv)


def _weights(code: AuthCode, m: int, rho_adv: float,
             weight_scale: float | None) -> np.ndarray:
    f = code.level_matrix[m]
    injected = f * f * code.rho_delta
    with np.errstate(invalid="ignore"):
        w = np.where(injected + rho_adv > 0.0,
                     injected / (injected + rho_adv), 0.0)
    if weight_scale is not None:
        w = weight_scale * w
    return w


def mmse_targeted_attack_batch(code: AuthCode, vs: np.ndarray, m: int,
                               m_target: int, rho_adv: float,
                               weight_scale: float | None = None) -> np.ndarray:
    """z = x(m') + t(m') - x(m) - t(m) - w . (v - x(m) - t(m)) rowwise."""
    if rho_adv < 0.0:
        raise AttackError("rho_adv must be nonnegative")
    if m == m_target:
        raise AttackError("target must differ from the transmitted message")
    mean_m = code.base.codewords[m] + code.t_table[m]
    mean_t = code.base.codewords[m_target] + code.t_table[m_target]
    w = _weights(code, m, rho_adv, weight_scale)
    return mean_t - mean_m - w * (vs - mean_m)


def mmse_targeted_attack(code: AuthCode, v: np.ndarray, m: int, m_target: int,
                         rho_adv: float,
                         weight_scale: float | None = None) -> np.ndarray:
    return mmse_targeted_attack_batch(
        code, np.asarray(v, dtype=np.float64)[None, :], m, m_target, rho_adv,
        weight_scale)[0]


def impersonation_attack(code: AuthCode, v: np.ndarray, m_target: int,
                         rho_adv: float,
                         weight_scale: float | None = None) -> np.ndarray:
    """Targeted attack launched from the null ('not transmitting')
    message, whose codeword is zero."""
    if code.base.null_id is None:
        raise AttackError("code has no null message to impersonate from")
    return mmse_targeted_attack(code, v, code.base.null_id, m_target,
                                rho_adv, weight_scale)


def mu_residual(code: AuthCode, v: np.ndarray, z: np.ndarray, m: int,
                m_target: int, rho_adv: float) -> np.ndarray:
    """Conditional mean of Y - x(m') - t(m') given (V, Z) = (v, z):
    x(m) + t(m) - x(m') - t(m') + z + w . (v - x(m) - t(m)).
    The MMSE targeted attack returns the unique z that nulls this."""
    mean_m = code.base.codewords[m] + code.t_table[m]
    mean_t = code.base.codewords[m_target] + code.t_table[m_target]
    w = _weights(code, m, rho_adv, None)
    return mean_m - mean_t + np.asarray(z) + w * (np.asarray(v) - mean_m)


def residual_variance_vector(code: AuthCode, m: int, rho_adv: float,
                             rho_dec: float) -> np.ndarray:
    """Per-coordinate variance of Y - x(m') - t(m') under the MMSE
    attack: the residual-variance law evaluated at f(m)."""
    f = code.level_matrix[m]
    injected = f * f * code.rho_delta
    with np.errstate(invalid="ignore"):
        cancel = np.where(injected + rho_adv > 0.0,
                          injected * rho_adv / (injected + rho_adv), 0.0)
    return cancel + rho_dec

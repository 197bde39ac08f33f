"""
워터필링 솔버
max Σ log(u'_i + v_i z_i)  s.t.  Σ z_i ≤ s, z ≥ 0 의 KKT 닫힌 해
"""
import math
from typing import Sequence, Tuple

import numpy as np

from .exceptions import PreconditionError, StructuralError
from ..models.results import WaterfillResult
from ..utils.logger import get_logger

logger = get_logger(__name__)


def _validate_inputs(u_prime, v, s) -> Tuple[np.ndarray, np.ndarray, float]:
    u_prime = np.asarray(u_prime, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u_prime.ndim != 1 or u_prime.shape != v.shape or u_prime.size == 0:
        raise StructuralError(
            f"u' 와 v 는 같은 길이의 1차원 벡터여야 합니다: {u_prime.shape}, {v.shape}"
        )
    s = float(s)
    if not math.isfinite(s) or s <= 0:
        raise PreconditionError(f"공급량은 양의 유한값이어야 합니다: {s}")
    if not (np.all(np.isfinite(u_prime)) and np.all(np.isfinite(v))):
        raise PreconditionError("u' 와 v 는 유한값이어야 합니다")
    if np.any(u_prime < 0) or np.any(v < 0):
        raise PreconditionError("u' 와 v 는 음수일 수 없습니다")
    return u_prime, v, s


def waterfill(u_prime: Sequence[float], v: Sequence[float], s: float) -> WaterfillResult:
    """
    단일 아이템 워터필링

    v_i > 0 인 에이전트만 대상으로 분기점 b_i = u'_i / v_i 를 오름차순 정렬한 뒤
    수위 L 이 다음 분기점을 넘지 않는 첫 활성 집합을 찾는다. z_i = max(L − b_i, 0), ν* = 1/L.

    Args:
        u_prime: 예상 효용 u'
        v: 아이템 가치
        s: 공급량 (> 0)

    Returns:
        WaterfillResult. 모든 v_i = 0 이면 z = 0, ν* = 0.
    """
    u_prime, v, s = _validate_inputs(u_prime, v, s)
    z = np.zeros_like(u_prime)

    candidates = np.flatnonzero(v > 0)
    if candidates.size == 0:
        return WaterfillResult(z=z, nu_star=0.0, post_utilities=u_prime.copy())

    breakpoints = u_prime[candidates] / v[candidates]
    order = np.argsort(breakpoints, kind="stable")
    b_sorted = breakpoints[order]

    count = b_sorted.size
    levels = (s + np.cumsum(b_sorted)) / np.arange(1, count + 1)
    stops = np.flatnonzero(levels[:-1] <= b_sorted[1:])
    k = int(stops[0]) + 1 if stops.size else count

    active_b = b_sorted[:k]
    # L − b_i = s/k + (mean(b_A) − b_i)
    amounts = s / k + (np.mean(active_b) - active_b)
    amounts = np.clip(amounts, 0.0, None)
    total = amounts.sum()
    if total > 0:
        amounts *= s / total
    else:
        amounts = np.full(k, s / k)

    z[candidates[order[:k]]] = amounts
    water_level = s / k + float(np.mean(active_b))
    post = u_prime + v * z

    logger.debug("워터필링: 활성 %d/%d, 수위 %.6g", k, count, water_level)
    return WaterfillResult(z=z, nu_star=1.0 / water_level, post_utilities=post)


def waterfill_objective(u_prime: Sequence[float], v: Sequence[float], z: Sequence[float]) -> float:
    """Σ log(u'_i + v_i z_i) (0 인 항이 있으면 -inf)"""
    post = np.asarray(u_prime, dtype=np.float64) + np.asarray(v, dtype=np.float64) * np.asarray(z, dtype=np.float64)
    if np.any(post <= 0):
        return -math.inf
    return math.fsum(np.log(post).tolist())


def gain_lower_bound_check(result: WaterfillResult, u_prime: Sequence[float],
                           v: Sequence[float], s: float) -> float:
    """
    로그 이득 하한 잔차

    LHS = Σ log(u'+vz) − Σ log u',  RHS = s·max_i v_i/(u'_i + v_i z_i)
    (u'_i + v_i z_i > 0 인 에이전트만). u'_i = 0 인데 z_i > 0 인 에이전트가 있으면 LHS = inf.

    Returns:
        LHS − RHS
    """
    u_prime, v, s = _validate_inputs(u_prime, v, s)
    z = np.asarray(result.z, dtype=np.float64)
    post = result.post_utilities

    mask = post > 0
    if not np.any(v[mask] > 0):
        return 0.0

    gained = mask & (z > 0)
    if np.any(u_prime[gained] == 0):
        return math.inf

    terms = np.log1p(v[gained] * z[gained] / u_prime[gained])
    lhs = math.fsum(terms.tolist())
    rhs = s * float(np.max(v[mask] / post[mask]))
    return lhs - rhs


def gain_residual_ok(residual: float, result: WaterfillResult, v: Sequence[float],
                     s: float, tolerance: float = 1e-9) -> bool:
    """잔차가 −tolerance·max(1, RHS) 이상인지 확인"""
    post = result.post_utilities
    mask = post > 0
    v = np.asarray(v, dtype=np.float64)
    rhs = s * float(np.max(v[mask] / post[mask])) if np.any(v[mask] > 0) else 0.0
    return residual >= -tolerance * max(1.0, abs(rhs))

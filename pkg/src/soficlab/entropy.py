"""Finite-scale entropy ``(1/|V|) log sep_delta(Map(O, xi), d^V)`` with explicit bound direction.

Three methods:

* ``exact``: every configuration is enumerated and the maximum separated set
  among good models is found exactly.
* ``greedy``: every configuration is enumerated, but there are too many good
  models for the exact search. A greedy delta-separated set gives the lower
  bound. A greedy (delta/2)-separated set is a closed (delta/2)-covering and
  gives the upper bound.
* ``sampled``: good models are rejection-sampled. The lower bound is the best
  of two bounds. One is a greedy separated set among the samples. The other is
  a volume bound: a confidence lower bound on ``|Map|`` divided by the volume
  of a closed d^V ball of radius delta, since a maximal separated set is such
  a covering. On cyclic maps the upper bound is a transfer-matrix count of
  strings with few locally forbidden windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import beta

from ._rng import map_ordered, rng_for
from .errors import ConfigError, PreconditionUnverified
from .groups import Integers, inverse_set, power_set, product_set
from .metrics import FinitePointSet, exact_separated, greedy_separated, log_ball_volume
from .shift import Configuration, MeasureModel, ModelTester, Neighborhood, Proposal, StabBlock, rejection_sample
from .sofic import RandomSoficModel, SoficMap
from .stabilizers import GoodVertexReport, StabKernel


class _NegInf:
    """Tagged minus infinity: the value assigned when no good model exists."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NEG_INF"

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def to_json(self):
        return "-inf"


NEG_INF = _NegInf()


def _json_value(v):
    return v.to_json() if v is NEG_INF else v


@dataclass
class EntropyEstimate:
    value_lower: object
    value_upper: object
    delta: float
    neighborhood: dict
    n: int
    model_count: int
    method: str
    details: dict = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return self.value_upper is NEG_INF

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["value_lower"] = _json_value(self.value_lower)
        out["value_upper"] = _json_value(self.value_upper)
        return out


def _log_count(c: int, n: int):
    return NEG_INF if c <= 0 else math.log(c) / n


def enumerate_good_models(O: Neighborhood, xi: SoficMap, cap: int = 16) -> np.ndarray:
    """All good models as rows; only for ``n * depth <= cap``."""
    m = O.depth
    if xi.n * m > cap:
        raise ConfigError(f"exhaustive enumeration needs n*depth <= {cap}")
    A = 2**m
    X = np.array(np.unravel_index(np.arange(A**xi.n), (A,) * xi.n)).T.astype(np.int64)
    return X[ModelTester(O, xi).check_batch(X)]


def _count_with_few_bad_windows(n: int, m: int, L: int, bad: np.ndarray, K: int) -> float:
    """log of the number of length-n strings with at most K bad length-L windows.

    ``bad`` is indexed by the window read left to right as base-2^m digits.
    """
    A = 2**m
    if K < 0:
        return -math.inf
    if n < L:
        return n * m * math.log(2)
    S = A ** (L - 1)
    cnt = np.zeros((S, K + 1))
    cnt[:, 0] = 1.0
    logscale = 0.0
    bad = bad.reshape(S, A)
    lo = S // A if L > 1 else 1
    for _ in range(n - L + 1):
        new = np.zeros_like(cnt)
        for c in range(A):
            b = bad[:, c]
            shifted = cnt.copy()
            shifted[b, 1:] = cnt[b, :-1]
            shifted[b, 0] = 0.0
            if L > 1:
                new.reshape(lo, A, K + 1)[:, c, :] += shifted.reshape(A, lo, K + 1).sum(axis=0)
            else:
                new += shifted
        top = new.max()
        if top <= 0:
            return -math.inf
        cnt = new / top
        logscale += math.log(top)
    return math.log(cnt.sum()) + logscale


def _window_event_bad(offsets_h: list, m: int, evaluate) -> tuple[int, np.ndarray]:
    """Tabulate a per-window event. The name at ``v`` reads ``x_{v-h}`` for each ``h``."""
    xs = [-h for h in offsets_h]
    a, b = min(xs), max(xs)
    L = b - a + 1
    A = 2**m
    if A**L > 1 << 22:
        raise ConfigError("window too wide for tabulation")
    W = np.array(np.unravel_index(np.arange(A**L), (A,) * L)).T.astype(np.int64)
    names = W[:, [-h - a for h in offsets_h]]
    return L, evaluate(names)


def transfer_upper_bound(O: Neighborhood, xi: SoficMap) -> dict | None:
    """Upper bounds on ``(1/n) log |Map(O, xi)|`` for rotations of Z/n.

    A good model has fewer than ``tv_radius * n`` windows whose pattern the
    reference measure gives probability 0, and (with a stabilizer block)
    fewer than ``eps * n`` names with a small approximate stabilizer. Counting
    linear strings under either condition alone, ignoring windows that wrap,
    bounds the number of good models from above.
    """
    if not isinstance(xi.group, Integers) or not xi.label.startswith("cyclic:"):
        return None
    n, m = xi.n, O.depth
    out = {}
    tv_h = sorted(O.window)
    ref = O.reference

    def support_event(names):
        return np.array([ref.pattern_prob(tuple(tv_h), tuple(int(s) for s in row)) == 0 for row in names])

    try:
        L, bad = _window_event_bad(tv_h, m, support_event)
        K = math.ceil(Fraction(O.tv_radius) * n) - 1
        out["support"] = _count_with_few_bad_windows(n, m, L, bad, K) / n
    except ConfigError:
        pass
    if O.stab is not None:
        st = O.stab
        group = xi.group
        small_only = StabBlock(st.M, st.delta, st.eps, st.F1, frozenset([0]))
        win = group.sorted(small_only.read_window(group))
        kern = StabKernel(group, win, m, small_only)
        try:
            L, bad = _window_event_bad(win, m, lambda names: kern.bad_masks(names)[0])
            K = math.ceil(Fraction(st.eps) * n) - 1
            out["small_stabilizer"] = _count_with_few_bad_windows(n, m, L, bad, K) / n
        except ConfigError:
            pass
    return out or None


def _clopper_pearson_lower(k: int, N: int, alpha: float) -> float:
    return 0.0 if k == 0 else float(beta.ppf(alpha, k, N - k + 1))


def finite_scale_entropy(mu: MeasureModel, xi: SoficMap, O: Neighborhood, delta: float, budget: int = 200,
                         seed: int | None = None, method: str = "auto", exact_cap: int = 24, enum_cap: int = 16,
                         proposal: Proposal | None = None, max_tries: int | None = None, volume_tries: int | None = None,
                         alpha: float = 1e-3, threads: int = 1) -> EntropyEstimate:
    """Bounds on ``(1/|V|) log sep_delta(Map(O, xi), d^V)``."""
    if delta <= 0:
        raise ConfigError("delta must be positive")
    n, m = xi.n, O.depth
    if method == "auto":
        method = "exhaustive" if n * m <= enum_cap else "sampled"
    desc = O.to_json()
    if method == "exhaustive":
        X = enumerate_good_models(O, xi, enum_cap)
        K = len(X)
        if K == 0:
            return EntropyEstimate(NEG_INF, NEG_INF, delta, desc, n, 0, "exact", {"good_models": 0})
        S = FinitePointSet(X, m)
        if K <= exact_cap:
            v = _log_count(exact_separated(S, delta, exact_cap), n)
            return EntropyEstimate(v, v, delta, desc, n, K, "exact", {"good_models": K})
        lo = len(greedy_separated(S, delta))
        hi = min(K, len(greedy_separated(S, delta / 2)))
        return EntropyEstimate(_log_count(lo, n), _log_count(hi, n), delta, desc, n, K, "greedy",
                               {"good_models": K, "greedy_delta": lo, "greedy_half_delta": hi})
    if method != "sampled":
        raise ConfigError(f"unknown method {method!r}")
    if seed is None:
        raise ConfigError("sampled estimation needs a seed")
    proposal = proposal or Proposal("iid")
    models, tries = rejection_sample(mu, xi, O, budget, max_tries or 10 * budget, seed, proposal, threads, stream=1)
    details: dict = {"sampled_models": len(models), "tries": tries, "proposal": proposal.kind}
    lower = NEG_INF
    if models:
        sel = greedy_separated(FinitePointSet.from_configurations(models), delta)
        lower = _log_count(len(sel), n)
        details["greedy_separated"] = len(sel)
    # volume bound from the uniform acceptance rate
    N = volume_tries or budget
    tester = ModelTester(O, xi)
    acc = sum(map_ordered(lambda i: tester(Proposal("uniform").draw(mu, xi, rng_for(seed, 2, i))), range(N), threads))
    cp = _clopper_pearson_lower(acc, N, alpha)
    details["uniform_acceptance"] = {"accepted": acc, "tries": N, "lower_confidence": cp, "alpha": alpha}
    if cp > 0:
        vol = log_ball_volume(n, m, delta, closed=True)
        vbound = m * math.log(2) + math.log(cp) / n - vol / n
        details["volume_bound"] = vbound
        details["log_ball_volume_per_vertex"] = vol / n
        if lower is NEG_INF or vbound > lower:
            lower = vbound
    upper = m * math.log(2)
    tb = transfer_upper_bound(O, xi)
    if tb:
        details["transfer_bounds"] = tb
        upper = min(upper, *tb.values())
    if upper == -math.inf:
        upper = NEG_INF
    return EntropyEstimate(lower, upper, delta, desc, n, len(models), "sampled", details)


def _trial_seed(seed: int, t: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(9, t)).generate_state(1)[0])


def _log_mean_exp(values: list, n: int):
    finite = [v * n for v in values if v is not NEG_INF]
    if not finite:
        return NEG_INF
    top = max(finite)
    return (top + math.log(sum(math.exp(v - top) for v in finite) / len(values))) / n


def random_sofic_entropy(mu: MeasureModel, model: RandomSoficModel, O: Neighborhood, delta: float, trials: int,
                         budget: int = 200, seed: int | None = None, threads: int = 1, **kw) -> EntropyEstimate:
    """Average the per-map count bounds (not their logs) over sampled sofic maps."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    if seed is None:
        raise ConfigError("a seed is required")
    ests = []
    for t in range(trials):
        s = _trial_seed(seed, t)
        xi = model.sample(s)
        ests.append(finite_scale_entropy(mu, xi, O, delta, budget, s, threads=threads, **kw))
    n = model.n
    lows = [e.value_lower for e in ests]
    highs = [e.value_upper for e in ests]
    finite_lows = [v for v in lows if v is not NEG_INF]
    spread = {
        "lower_min": min(finite_lows) if finite_lows else "-inf",
        "lower_max": max(finite_lows) if finite_lows else "-inf",
        "lower_std": float(np.std(finite_lows)) if finite_lows else 0.0,
        "per_trial_lower": [_json_value(v) for v in lows],
    }
    return EntropyEstimate(_log_mean_exp(lows, n), _log_mean_exp(highs, n), delta, O.to_json(), n,
                           sum(e.model_count for e in ests), ests[0].method if trials == 1 else f"random-{ests[0].method}",
                           {"trials": trials, "spread": spread})


def equivariance_check(x: Configuration, xi: SoficMap, v: int, g, F2, good: GoodVertexReport | None = None) -> bool:
    """``g^-1(Pi_{xi_g(v)} x)`` and ``Pi_v x`` agree on ``F2^3``.

    The agreement rests on the triple-product condition at ``v``, so a
    goodness report is required and that condition must hold at ``v``.
    """
    if good is None:
        raise PreconditionUnverified("goodness of v has not been established")
    if not good.triple_products[v]:
        raise PreconditionUnverified(f"vertex {v} fails the triple-product condition")
    group = xi.group
    W = group.sorted(power_set(F2, 3, group))
    inv, mul = group.inv, group.mul
    u = xi(g, v)
    for h in W:
        # (g^-1 Pi_u x)_h = (Pi_u x)_{gh} = x[xi_{(gh)^-1}(u)]
        if x.symbols[xi((inv(mul(g, h))), u)] != x.symbols[xi(inv(h), v)]:
            return False
    return True


def equivariance_violations(x: Configuration, xi: SoficMap, F2, good: GoodVertexReport) -> dict:
    """Run ``equivariance_check`` for every vertex passing the triple-product
    condition and every ``g`` in ``F2^3``, vectorized over vertices.

    Returns the number of (vertex, g) instances checked and the failing ones.
    """
    group = xi.group
    W = group.sorted(power_set(F2, 3, group))
    inv, mul = group.inv, group.mul
    xi.require([inv(mul(g, h)) for g in W for h in W], "window F2^6")
    verts = np.flatnonzero(good.triple_products)
    sym = x.symbols
    base = np.stack([sym[xi.perm(inv(h))[verts]] for h in W], axis=1)
    failures = []
    for g in W:
        u = xi.perm(g)[verts]
        moved = np.stack([sym[xi.perm(inv(mul(g, h)))[u]] for h in W], axis=1)
        bad = verts[(moved != base).any(axis=1)]
        failures.extend((int(v), g) for v in bad)
    return {"checked": len(verts) * len(W), "failures": failures}

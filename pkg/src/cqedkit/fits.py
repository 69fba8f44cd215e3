"""Parameter-extraction routines for simulated and measured traces.

All nonlinear fits run damped least squares (Levenberg-Marquardt) with
analytic Jacobians. Initialization rules:

* exponential time constants from a log-linear regression of the
  high-amplitude part of the trace;
* fringe frequency from the dominant discrete-spectrum bin;
* Lorentzian centers from local maxima of the spectrum.

Failures to converge are reported through `FitResult.converged` with the best
iterate retained, never raised.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import find_peaks

__all__ = [
    "FitResult",
    "fit_exponential",
    "fit_poissonian_decay",
    "fit_damped_fringes",
    "fit_lorentzian_multiplet",
    "fit_loglog_intercept",
    "fit_revival_period",
]


@dataclass(frozen=True)
class FitResult:
    """Named fitted parameters plus fit diagnostics."""

    params: dict
    residual_rms: float
    covariance: dict = field(default_factory=dict)
    converged: bool = True
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "params": {k: _jsonable(v) for k, v in sorted(self.params.items())},
            "residual_rms": _jsonable(self.residual_rms),
            "covariance": {k: _jsonable(v) for k, v in sorted(self.covariance.items())},
            "converged": self.converged,
            "flags": list(self.flags),
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)


def _jsonable(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    return v


def _as_xy(trace) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(trace, "x") and hasattr(trace, "values"):
        x, y = trace.x, trace.values
    else:
        x, y = trace
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("trace must provide matching 1-D x and value arrays")
    return x, y


def _lm(model, jac, p0, x, y, names, flags=()):
    """Levenberg-Marquardt core shared by the nonlinear fitters."""
    res = least_squares(
        lambda p: model(p, x) - y,
        x0=np.asarray(p0, dtype=float),
        jac=lambda p: jac(p, x),
        method="lm",
        xtol=1e-13,
        ftol=1e-13,
        gtol=1e-13,
        max_nfev=20000,
    )
    converged = res.status > 0
    if not converged:
        flags = tuple(flags) + ("non_convergence",)
    n, m = x.size, len(names)
    rms = float(np.sqrt(np.mean(res.fun**2)))
    cov = {}
    if n > m:
        try:
            jtj_inv = np.linalg.inv(res.jac.T @ res.jac)
            sigma2 = float(np.sum(res.fun**2)) / (n - m)
            for k, name in enumerate(names):
                cov[name] = float(jtj_inv[k, k] * sigma2)
        except np.linalg.LinAlgError:
            flags = tuple(flags) + ("singular_covariance",)
    params = dict(zip(names, (float(v) for v in res.x)))
    return params, rms, cov, converged, tuple(flags)


def _decay_time_seed(t, u, fallback):
    """Log-linear regression of the high-amplitude samples of u ~ exp(-t/T)."""
    mask = u > 0.2 * np.max(u)
    if np.count_nonzero(mask) >= 3:
        slope = np.polyfit(t[mask], np.log(u[mask]), 1)[0]
        if slope < 0:
            return -1.0 / slope
    return fallback


def fit_exponential(trace) -> FitResult:
    """Fit A exp(-t/T) + offset. Params: amplitude, t_decay, offset."""
    t, y = _as_xy(trace)
    if t.size < 8:
        raise ValueError("need at least 8 points")
    if np.ptp(y) < 1e-12 * max(1.0, float(np.max(np.abs(y)))):
        return FitResult(
            params={"amplitude": 0.0, "t_decay": math.inf, "offset": float(np.mean(y))},
            residual_rms=float(np.std(y)),
            converged=True,
            flags=("constant_trace",),
        )
    c0 = float(y[-1])
    a0 = float(y[0] - c0)
    if a0 == 0.0:
        a0 = float(np.max(y) - c0) or 1.0
    u = np.abs(y - c0) / abs(a0)
    t0 = _decay_time_seed(t, np.clip(u, 1e-12, None), (t[-1] - t[0]) / 3.0)

    def model(p, tt):
        return p[0] * np.exp(-tt / p[1]) + p[2]

    def jac(p, tt):
        e = np.exp(-tt / p[1])
        return np.column_stack([e, p[0] * e * tt / p[1] ** 2, np.ones_like(tt)])

    params, rms, cov, ok, flags = _lm(
        model, jac, [a0, t0, c0], t, y, ("amplitude", "t_decay", "offset")
    )
    return FitResult(params, rms, cov, ok, flags)


def fit_poissonian_decay(trace) -> FitResult:
    """Fit the empty-cavity probability A exp(-n0 exp(-t/T1)) + offset.

    Params: amplitude, n0, t1, offset. Values must lie in (0, 1].
    """
    t, y = _as_xy(trace)
    if t.size < 8:
        raise ValueError("need at least 8 points")
    if np.any(y <= 0) or np.any(y > 1.0 + 1e-6):
        raise ValueError("Poissonian-decay fit expects probabilities in (0, 1]")
    a0 = float(np.max(y))
    u = -np.log(np.clip(y / (a0 * (1.0 + 1e-12)), 1e-300, 1.0))
    if np.max(u) < 1e-6:
        return FitResult(
            params={"amplitude": a0, "n0": 0.0, "t1": math.inf, "offset": 0.0},
            residual_rms=float(np.std(y)),
            converged=True,
            flags=("degenerate_flat",),
        )
    n00 = float(np.max(u))
    t10 = _decay_time_seed(t, np.clip(u, 1e-12, None), (t[-1] - t[0]) / 3.0)

    def model(p, tt):
        return p[0] * np.exp(-p[1] * np.exp(-tt / p[2])) + p[3]

    def jac(p, tt):
        e = np.exp(-tt / p[2])
        core = np.exp(-p[1] * e)
        return np.column_stack(
            [
                core,
                -p[0] * core * e,
                -p[0] * core * p[1] * e * tt / p[2] ** 2,
                np.ones_like(tt),
            ]
        )

    params, rms, cov, ok, flags = _lm(
        model, jac, [a0, n00, t10, 0.0], t, y, ("amplitude", "n0", "t1", "offset")
    )
    return FitResult(params, rms, cov, ok, flags)


def fit_damped_fringes(trace) -> FitResult:
    """Fit A exp(-t/T2) cos(2 pi f t + phi) + offset.

    Params: amplitude, t2, frequency, phase, offset. Falls back to the plain
    exponential when no oscillation is resolved (flag "no_fringes").
    """
    t, y = _as_xy(trace)
    if t.size < 8:
        raise ValueError("need at least 8 points")
    span = t[-1] - t[0]
    c0 = float(np.mean(y))
    z = y - c0
    dt = float(np.mean(np.diff(t)))
    spec = np.fft.rfft(z)
    freqs = np.fft.rfftfreq(t.size, dt)
    k = 1 + int(np.argmax(np.abs(spec[1:]))) if spec.size > 1 else 0
    f0 = float(freqs[k]) if k else 0.0

    if f0 * span < 0.75:
        base = fit_exponential(trace)
        params = {
            "amplitude": base.params["amplitude"],
            "t2": base.params["t_decay"],
            "frequency": 0.0,
            "phase": 0.0,
            "offset": base.params["offset"],
        }
        return FitResult(
            params, base.residual_rms, base.covariance, base.converged,
            base.flags + ("no_fringes",),
        )

    flags: tuple[str, ...] = ()
    if f0 * span < 4.0:
        flags = ("few_periods",)
    a0 = float(np.max(np.abs(z)))
    phi0 = float(np.angle(spec[k]))
    peaks, _ = find_peaks(np.abs(z))
    if peaks.size >= 3:
        t20 = _decay_time_seed(t[peaks], np.abs(z[peaks]), span)
    else:
        t20 = span

    def model(p, tt):
        return p[0] * np.exp(-tt / p[1]) * np.cos(2.0 * np.pi * p[2] * tt + p[3]) + p[4]

    def jac(p, tt):
        e = np.exp(-tt / p[1])
        th = 2.0 * np.pi * p[2] * tt + p[3]
        c, s = np.cos(th), np.sin(th)
        return np.column_stack(
            [
                e * c,
                p[0] * e * c * tt / p[1] ** 2,
                -p[0] * e * s * 2.0 * np.pi * tt,
                -p[0] * e * s,
                np.ones_like(tt),
            ]
        )

    params, rms, cov, ok, more = _lm(
        model,
        jac,
        [a0, t20, f0, phi0, c0],
        t,
        y,
        ("amplitude", "t2", "frequency", "phase", "offset"),
        flags,
    )
    params["t2"] = abs(params["t2"])
    params["frequency"] = abs(params["frequency"])
    return FitResult(params, rms, cov, ok, more)


def fit_lorentzian_multiplet(spectrum, n_peaks: int) -> FitResult:
    """Fit a sum of unit-height-scaled Lorentzians.

    model = sum_k w_k (G_k/2)^2 / ((f - c_k)^2 + (G_k/2)^2)

    Params: centers (sorted ascending), fwhms, weights; plus spacing_mean and
    spacing_spread when more than one peak is present.
    """
    f, y = _as_xy(spectrum)
    n_peaks = int(n_peaks)
    if n_peaks < 1:
        raise ValueError("n_peaks must be >= 1")
    df = float(np.mean(np.diff(f)))
    idx, props = find_peaks(y, prominence=2e-3 * float(np.max(y)))
    flags: tuple[str, ...] = ()
    if idx.size < n_peaks:
        flags = ("unresolved_peaks",)
        n_fit = max(1, idx.size)
    else:
        order = np.argsort(props["prominences"])[::-1][:n_peaks]
        idx = np.sort(idx[order])
        n_fit = n_peaks
    if idx.size == 0:
        idx = np.array([int(np.argmax(y))])
        n_fit = 1

    centers0 = f[idx][:n_fit]
    heights0 = y[idx][:n_fit]
    widths0 = []
    for i in idx[:n_fit]:
        above = y > 0.5 * y[i]
        # count contiguous half-max points around the peak
        left = i
        while left > 0 and above[left - 1]:
            left -= 1
        right = i
        while right < y.size - 1 and above[right + 1]:
            right += 1
        widths0.append(max((right - left) * df, 2.0 * df))
    p0 = np.concatenate([centers0, widths0, heights0])

    def split(p):
        return p[:n_fit], p[n_fit : 2 * n_fit], p[2 * n_fit :]

    def model(p, ff):
        c, w, a = split(p)
        u = (w / 2.0) ** 2
        d2 = (ff[:, None] - c[None, :]) ** 2
        return np.sum(a[None, :] * u[None, :] / (d2 + u[None, :]), axis=1)

    def jac(p, ff):
        c, w, a = split(p)
        u = (w / 2.0) ** 2
        d = ff[:, None] - c[None, :]
        den = d**2 + u[None, :]
        lor = u[None, :] / den
        d_c = a[None, :] * u[None, :] * 2.0 * d / den**2
        d_w = a[None, :] * (d**2) / den**2 * (w[None, :] / 2.0)
        d_a = lor
        return np.hstack([d_c, d_w, d_a])

    names = (
        [f"center_{k}" for k in range(n_fit)]
        + [f"fwhm_{k}" for k in range(n_fit)]
        + [f"weight_{k}" for k in range(n_fit)]
    )
    raw, rms, cov, ok, more = _lm(model, jac, p0, f, y, names, flags)

    centers = np.array([raw[f"center_{k}"] for k in range(n_fit)])
    fwhms = np.abs([raw[f"fwhm_{k}"] for k in range(n_fit)])
    weights = np.array([raw[f"weight_{k}"] for k in range(n_fit)])
    order = np.argsort(centers)
    params = {
        "centers": [float(c) for c in centers[order]],
        "fwhms": [float(w) for w in np.asarray(fwhms)[order]],
        "weights": [float(a) for a in weights[order]],
        "n_peaks": n_fit,
    }
    if n_fit >= 2:
        gaps = np.diff(centers[order])
        params["spacing_mean"] = float(np.mean(gaps))
        params["spacing_spread"] = float(np.std(gaps))
        if np.any(gaps < 0.5 * (fwhms[order][:-1] + fwhms[order][1:]) / 2.0):
            more = more + ("overlapping_peaks",)
    return FitResult(params, rms, cov, ok, more)


def fit_loglog_intercept(data) -> FitResult:
    """Intercept-only regression of log Q = log g - log y (slope fixed at -1).

    `data` provides (y, Q) pairs (e.g. a QMeasurementSet). Params: g_seam
    with a one-standard-error interval (g_low, g_high) from the residual
    variance, plus the free-slope diagnostic slope_free.
    """
    if hasattr(data, "y") and hasattr(data, "q"):
        y, q = np.asarray(data.y, float), np.asarray(data.q, float)
    else:
        pairs = [(float(a), float(b)) for a, b in data]
        y = np.array([p[0] for p in pairs])
        q = np.array([p[1] for p in pairs])
    if y.size < 2:
        raise ValueError("need at least 2 (y, Q) points")
    if np.any(y <= 0) or np.any(q <= 0):
        raise ValueError("all y and Q values must be positive")

    s = np.log(q) + np.log(y)
    mu = float(np.mean(s))
    r = s - mu
    rms = float(np.sqrt(np.mean(r**2)))
    se = float(np.std(r, ddof=1) / math.sqrt(s.size)) if s.size > 1 else 0.0
    slope_free = float(np.polyfit(np.log(y), np.log(q), 1)[0])
    g = math.exp(mu)
    params = {
        "g_seam": g,
        "g_low": g * math.exp(-se),
        "g_high": g * math.exp(se),
        "slope_free": slope_free,
    }
    return FitResult(params, rms, covariance={"log_g": se**2}, converged=True)


def fit_revival_period(trace, threshold: float = 0.5) -> FitResult:
    """Extract the revival period from a collapse-revival contrast trace.

    Peaks above `threshold` x max are indexed to the nearest integer multiple
    of the median peak spacing; the period is the least-squares line through
    the origin. Params: period, n_revivals, peak_times.
    """
    t, y = _as_xy(trace)
    idx, _ = find_peaks(y, height=threshold * float(np.max(y)))
    if idx.size == 0:
        return FitResult(
            params={"period": math.nan, "n_revivals": 0, "peak_times": []},
            residual_rms=math.nan,
            converged=False,
            flags=("no_revivals",),
        )
    tp = t[idx]
    p0 = float(np.median(np.diff(tp))) if tp.size > 1 else float(tp[0])
    k = np.maximum(1, np.round(tp / p0)).astype(int)
    period = float(np.sum(tp * k) / np.sum(k**2))
    resid = tp - k * period
    return FitResult(
        params={
            "period": period,
            "n_revivals": int(tp.size),
            "peak_times": [float(v) for v in tp],
        },
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        converged=True,
    )

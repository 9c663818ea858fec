"""Time-knotted joint-target trajectories (the planner's decision variable)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidStateError, PlanExhaustedError


@dataclass(frozen=True)
class ActionSpline:
    """Piecewise-linear joint-target trajectory on strictly increasing knots."""

    times: np.ndarray     # (n,) s
    values: np.ndarray    # (n, 12) rad

    def validate(self, joint_limits: np.ndarray | None = None) -> None:
        if self.times.ndim != 1 or len(self.times) < 2:
            raise InvalidStateError("spline needs at least two knots")
        if self.values.shape != (len(self.times), 12):
            raise InvalidStateError("knot values must be (n, 12)")
        if np.any(np.diff(self.times) <= 0.0):
            raise InvalidStateError("knot times must be strictly increasing")
        if not (np.all(np.isfinite(self.times)) and np.all(np.isfinite(self.values))):
            raise InvalidStateError("spline contains non-finite entries")
        if joint_limits is not None:
            lo, hi = joint_limits[:, 0], joint_limits[:, 1]
            if np.any(self.values < lo - 1e-12) or np.any(self.values > hi + 1e-12):
                raise InvalidStateError("knot values violate joint limits")

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])

    def evaluate(self, t: float) -> np.ndarray:
        """Linear interpolation, clamped to the end values outside the knots."""
        if t <= self.times[0]:
            return self.values[0].copy()
        if t >= self.times[-1]:
            return self.values[-1].copy()
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        t0, t1 = self.times[i], self.times[i + 1]
        alpha = (t - t0) / (t1 - t0)
        return (1.0 - alpha) * self.values[i] + alpha * self.values[i + 1]


def constant_spline(targets: np.ndarray, t0: float, horizon: float,
                    knots: int = 2) -> ActionSpline:
    times = np.linspace(t0, t0 + horizon, knots)
    values = np.tile(np.asarray(targets, dtype=float), (knots, 1))
    return ActionSpline(times=times, values=values)


def shift_plan(spline: ActionSpline, t_now: float) -> ActionSpline:
    """Re-anchor a receding-horizon plan at t_now.

    Knots before t_now are dropped (an interpolated boundary knot is inserted
    at t_now) and the final knot is duplicated at t_now + span so the shifted
    plan covers the same horizon length.
    """
    if t_now < spline.times[0] - 1e-12:
        raise InvalidStateError("cannot shift a plan backwards in time")
    if t_now > spline.times[-1] + 1e-12:
        raise PlanExhaustedError(
            f"plan ends at {spline.times[-1]:.4f} s, queried at {t_now:.4f} s"
        )
    span = spline.span
    keep = spline.times > t_now + 1e-12
    times = [t_now]
    values = [spline.evaluate(t_now)]
    for t, v in zip(spline.times[keep], spline.values[keep]):
        times.append(float(t))
        values.append(v.copy())
    end = t_now + span
    if times[-1] < end - 1e-12:
        times.append(end)
        values.append(values[-1].copy())
    return ActionSpline(times=np.array(times), values=np.vstack(values))

"""Discrete-time model of a multi-stage manufacturing line.

Buffers hold work in process, machines move material between buffers at
controllable hourly rates, and every machine carries a health state in
[0, 1] that wears with throughput and recovers during maintenance hours.
Health feeds back into effective processing capacity and into the energy
needed per unit produced, which is what couples maintenance timing to
electricity cost.

All functions here are pure and operate on immutable inputs; the arrays
stored on :class:`PlantModel` are marked read-only after validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PlantModel",
    "PlantState",
    "derive_outflow_matrix",
    "step_inventory",
    "step_health",
    "effective_capacity",
    "energy_intensity",
    "step_energy",
    "maintenance_cost",
    "validate_maintenance",
]


def _vector(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def derive_outflow_matrix(inflow_matrix) -> np.ndarray:
    """Build the withdrawal-tracking matrix from the network topology.

    Entry (i, j) is -1 exactly where machine j draws from buffer i
    (negative inflow entry) and 0 elsewhere.
    """
    b_s = np.asarray(inflow_matrix, dtype=float)
    if not np.isin(b_s, (-1.0, 0.0, 1.0)).all():
        raise ValueError("inflow matrix entries must be in {-1, 0, 1}")
    return np.where(b_s < 0, -1.0, 0.0)


@dataclass(frozen=True)
class PlantModel:
    """Static description of the line: topology, degradation, energy, bounds.

    Attributes:
        n_buffers / n_machines / n_products: network dimensions.
        inflow_matrix: (n_buffers, n_machines) in {-1, 0, 1}; +1 where a
            machine delivers into a buffer, -1 where it draws from one.
        demand_matrix: (n_buffers, n_products) in {-1, 0}; -1 where a
            product ships from a buffer.
        outflow_matrix: derived from inflow_matrix, tracks withdrawals only.
        degradation_rates: health lost per unit of throughput, per machine.
        restoration_rates: health gained per maintenance hour, per machine.
        capacity_loss_fraction: fraction of capacity lost at zero health.
        as_new_capacity: units/hour at full health.
        as_new_energy_intensity: kWh/unit at full health.
        energy_degradation_penalty: relative energy-intensity growth at
            zero health.
        buffer_min / buffer_max: inventory box bounds, units.
        pm_cost_per_hour: currency per machine-hour of maintenance.
        step_hours: length of one control step.
    """

    n_buffers: int
    n_machines: int
    n_products: int
    inflow_matrix: np.ndarray
    demand_matrix: np.ndarray
    degradation_rates: np.ndarray
    restoration_rates: np.ndarray
    capacity_loss_fraction: np.ndarray
    as_new_capacity: np.ndarray
    as_new_energy_intensity: np.ndarray
    energy_degradation_penalty: np.ndarray
    buffer_max: np.ndarray
    buffer_min: np.ndarray | None = None
    pm_cost_per_hour: float = 100.0
    step_hours: float = 1.0
    outflow_matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        n_x, n_u, n_p = self.n_buffers, self.n_machines, self.n_products
        b_s = np.asarray(self.inflow_matrix, dtype=float)
        if b_s.shape != (n_x, n_u):
            raise ValueError(f"inflow_matrix must be ({n_x}, {n_u}), got {b_s.shape}")
        if not np.isin(b_s, (-1.0, 0.0, 1.0)).all():
            raise ValueError("inflow_matrix entries must be in {-1, 0, 1}")
        # a machine feeds at most one buffer and draws from at most one
        if ((b_s == 1).sum(axis=0) > 1).any() or ((b_s == -1).sum(axis=0) > 1).any():
            raise ValueError("each inflow_matrix column may hold at most one +1 and one -1")

        w_s = np.asarray(self.demand_matrix, dtype=float)
        if w_s.shape != (n_x, n_p):
            raise ValueError(f"demand_matrix must be ({n_x}, {n_p}), got {w_s.shape}")
        if not np.isin(w_s, (-1.0, 0.0)).all():
            raise ValueError("demand_matrix entries must be in {-1, 0}")

        object.__setattr__(self, "inflow_matrix", _frozen(b_s))
        object.__setattr__(self, "demand_matrix", _frozen(w_s))
        object.__setattr__(self, "outflow_matrix", _frozen(derive_outflow_matrix(b_s)))

        vectors = {
            "degradation_rates": _vector(self.degradation_rates, n_u, "degradation_rates"),
            "restoration_rates": _vector(self.restoration_rates, n_u, "restoration_rates"),
            "capacity_loss_fraction": _vector(
                self.capacity_loss_fraction, n_u, "capacity_loss_fraction"
            ),
            "as_new_capacity": _vector(self.as_new_capacity, n_u, "as_new_capacity"),
            "as_new_energy_intensity": _vector(
                self.as_new_energy_intensity, n_u, "as_new_energy_intensity"
            ),
            "energy_degradation_penalty": _vector(
                self.energy_degradation_penalty, n_u, "energy_degradation_penalty"
            ),
            "buffer_max": _vector(self.buffer_max, n_x, "buffer_max"),
            "buffer_min": (
                np.zeros(n_x)
                if self.buffer_min is None
                else _vector(self.buffer_min, n_x, "buffer_min")
            ),
        }
        for name, arr in vectors.items():
            if name != "buffer_min" and (arr < 0).any():
                raise ValueError(f"{name} must be nonnegative")
            object.__setattr__(self, name, _frozen(arr))
        kappa = vectors["capacity_loss_fraction"]
        if (kappa > 1).any():
            raise ValueError("capacity_loss_fraction must lie in [0, 1]")
        if (vectors["buffer_min"] > vectors["buffer_max"]).any():
            raise ValueError("buffer_min must not exceed buffer_max")
        if self.pm_cost_per_hour < 0 or self.step_hours <= 0:
            raise ValueError("pm_cost_per_hour must be >= 0 and step_hours > 0")


@dataclass(frozen=True)
class PlantState:
    """Buffer inventories and machine health at one time step."""

    inventory: np.ndarray
    health: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inventory", _frozen(np.asarray(self.inventory, dtype=float)))
        h = np.asarray(self.health, dtype=float)
        if ((h < 0) | (h > 1)).any():
            raise ValueError("health must lie in [0, 1]")
        object.__setattr__(self, "health", _frozen(h))

    def check_against(self, model: PlantModel) -> None:
        if self.inventory.shape != (model.n_buffers,) or self.health.shape != (model.n_machines,):
            raise ValueError("state dimensions do not match the model")
        if (self.inventory < model.buffer_min - 1e-9).any() or (
            self.inventory > model.buffer_max + 1e-9
        ).any():
            raise ValueError("inventory violates buffer bounds")


def validate_maintenance(m, n_machines: int) -> np.ndarray:
    """Coerce a maintenance activation vector and require binary entries."""
    arr = np.asarray(m, dtype=float)
    if arr.shape != (n_machines,):
        raise ValueError(f"maintenance vector must have shape ({n_machines},)")
    if not np.isin(arr, (0.0, 1.0)).all():
        raise ValueError("maintenance entries must be 0 or 1")
    return arr


def step_inventory(x, u, d, model: PlantModel) -> np.ndarray:
    """Advance buffer levels one step: x + B_s u + W_s d.

    No clamping is applied; keeping the result inside the buffer box is the
    caller's constraint responsibility.
    """
    x = _vector(x, model.n_buffers, "x")
    u = _vector(u, model.n_machines, "u")
    d = _vector(d, model.n_products, "d")
    return x + model.inflow_matrix @ u + model.demand_matrix @ d


def step_health(h, u, m, model: PlantModel) -> np.ndarray:
    """Advance machine health one step and clamp to [0, 1].

    Wear is proportional to throughput, restoration to maintenance time.
    The clamp applies only in plant simulation; the scheduling QP uses box
    constraints instead.
    """
    h = _vector(h, model.n_machines, "h")
    u = _vector(u, model.n_machines, "u")
    m = validate_maintenance(m, model.n_machines)
    nxt = h - model.degradation_rates * u + model.restoration_rates * m
    return np.clip(nxt, 0.0, 1.0)


def effective_capacity(h, model: PlantModel) -> np.ndarray:
    """Health-dependent capacity: C = C_bar * (1 - kappa * (1 - h))."""
    h = _vector(h, model.n_machines, "h")
    return model.as_new_capacity * (1.0 - model.capacity_loss_fraction * (1.0 - h))


def energy_intensity(h, model: PlantModel) -> np.ndarray:
    """Health-dependent kWh/unit: eps = E_bar * (1 + gamma * (1 - h))."""
    h = _vector(h, model.n_machines, "h")
    return model.as_new_energy_intensity * (
        1.0 + model.energy_degradation_penalty * (1.0 - h)
    )


def step_energy(u, h, model: PlantModel) -> float:
    """Energy drawn over one step: dt * eps(h)' u, in kWh."""
    u = _vector(u, model.n_machines, "u")
    return float(model.step_hours * energy_intensity(h, model) @ u)


def maintenance_cost(m, model: PlantModel) -> float:
    """Instantaneous PM cost: per-machine-hour rate times active count."""
    m = validate_maintenance(m, model.n_machines)
    return float(model.pm_cost_per_hour * np.abs(m).sum())

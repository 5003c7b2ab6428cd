"""Aggregated analysis of a single state, as emitted by ``hodokit analyze``."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources

from .core import State, SystemParams, conserved
from .hodograph import ConicClass, conic_from_state, velocity_circle
from .scattering import analyze_scattering

CONVENTION = "j = |J| = m|x × v|; R = k/j; Lambda = j^2/(m k); h = m k^2 (e^2 - 1)/(2 j^2)"
ANGLE_KEYS = ("theta_star", "theta_0", "Theta", "Psi", "deflection")


def _vec(a) -> list[float]:
    return [float(c) for c in a]


@dataclass(frozen=True)
class AnalysisReport:
    inputs: dict
    conserved: dict
    hodograph: dict
    scattering: dict | None
    convention: str = CONVENTION
    angle_unit: str = "rad"

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["scattering"] is None:
            del d["scattering"]
        return d

    def to_json(self) -> str:
        # repr-based float output is the shortest string that round-trips exactly
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> AnalysisReport:
        return cls(
            inputs=d["inputs"],
            conserved=d["conserved"],
            hodograph=d["hodograph"],
            scattering=d.get("scattering"),
            convention=d.get("convention", CONVENTION),
            angle_unit=d.get("angle_unit", "rad"),
        )

    @classmethod
    def from_json(cls, text: str) -> AnalysisReport:
        return cls.from_dict(json.loads(text))


def scattering_block(s: State, p: SystemParams, degrees: bool = False) -> dict:
    sc = analyze_scattering(s, p)
    block = {
        "theta_star": sc.theta_star,
        "theta_0": sc.theta_0,
        "Theta": sc.Theta,
        "Psi": sc.Psi,
        "deflection": sc.deflection,
        "v_in": _vec(sc.v_in),
        "v_out": _vec(sc.v_out),
        "d_in": _vec(sc.d_in),
        "d_out": _vec(sc.d_out),
        "energy_radius": sc.energy_radius,
        "hyperbola_center": _vec(sc.hyperbola_center),
    }
    if degrees:
        for key in ANGLE_KEYS:
            block[key] = math.degrees(block[key])
    return block


def build_report(s: State, p: SystemParams, degrees: bool = False) -> AnalysisReport:
    cons = conserved(s, p)
    circle = velocity_circle(s, p)
    orbit = conic_from_state(s, p)
    f = orbit.frame
    hodo = {
        "center": _vec(circle.center),
        "R": circle.radius,
        "e": orbit.e,
        "Lambda": orbit.semi_latus,
        "class": orbit.cls.value,
        "frame": {"e1": _vec(f.e1), "e2": _vec(f.e2), "e3": _vec(f.e3)},
    }
    scat = scattering_block(s, p, degrees) if orbit.cls is ConicClass.HYPERBOLA else None
    return AnalysisReport(
        inputs={"m": p.m, "k": p.k, "x": _vec(s.x), "v": _vec(s.v), "t": s.t},
        conserved={"J": _vec(cons.J), "j": cons.j, "h": cons.h},
        hodograph=hodo,
        scattering=scat,
        angle_unit="deg" if degrees else "rad",
    )


def load_schema() -> dict:
    text = resources.files("hodokit").joinpath("schemas/analysis_report.schema.json").read_text("utf-8")
    return json.loads(text)

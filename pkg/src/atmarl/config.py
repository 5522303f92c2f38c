"""Scenario and experiment-plan configuration.

Scenario files are INI-style text: one ``[scenario]`` section for slice-wide
settings and one ``[service:<name>]`` section per carried service, e.g.::

    [scenario]
    bandwidth_mbps = 10.0
    distribution = uniform
    noise_pct = 5.0
    seed = 7

    [service:cv0]
    kind = CV
    demand_mbps = 0.8
    ue_count = 32
    kpi_target = 4.0
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .errors import ScenarioError
from .slice_sim import (
    DEFAULT_BANDWIDTH_MBPS,
    DistributionKind,
    DistributionSpec,
    ServiceKind,
    ServiceSpec,
)

DEFAULT_QOE_TARGET = 4.0
DEFAULT_PL_TARGET = 2.0

_KIND_ALIASES = {
    "cv": ServiceKind.CV,
    "urllc": ServiceKind.URLLC,
    "miot": ServiceKind.MIOT,
}


@dataclass(frozen=True)
class ScenarioConfig:
    services: list[ServiceSpec]
    distribution: DistributionSpec
    bandwidth_mbps: float = DEFAULT_BANDWIDTH_MBPS
    noise_pct: float = 5.0
    seed: int = 7

    @property
    def intent_count(self) -> int:
        return len(self.services)


def _parse_kind(raw: str) -> ServiceKind:
    try:
        return _KIND_ALIASES[raw.strip().lower()]
    except KeyError:
        raise ScenarioError(f"unknown service kind {raw!r}") from None


def _parse_distribution(raw_kind: str, raw_weights: str | None) -> DistributionSpec:
    try:
        kind = DistributionKind(raw_kind.strip().capitalize())
    except ValueError:
        raise ScenarioError(f"unknown distribution {raw_kind!r}") from None
    weights = None
    if raw_weights:
        weights = [float(tok) for tok in raw_weights.replace(",", " ").split()]
    return DistributionSpec.of(kind, weights)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario file."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ScenarioError(f"cannot read scenario file {path}")
    if "scenario" not in parser:
        raise ScenarioError(f"{path}: missing [scenario] section")
    sc = parser["scenario"]
    distribution = _parse_distribution(
        sc.get("distribution", "uniform"), sc.get("dist_weights", None)
    )
    services = []
    instance_counters: dict[ServiceKind, int] = {}
    for section in parser.sections():
        if not section.startswith("service:"):
            continue
        svc = parser[section]
        kind = _parse_kind(svc.get("kind", section.split(":", 1)[1]))
        idx = instance_counters.get(kind, 0)
        instance_counters[kind] = idx + 1
        default_target = DEFAULT_QOE_TARGET if kind is ServiceKind.CV else DEFAULT_PL_TARGET
        services.append(
            ServiceSpec(
                kind=kind,
                instance_id=idx,
                demand_per_ue=svc.getfloat("demand_mbps"),
                ue_count=svc.getint("ue_count"),
                kpi_target=svc.getfloat("kpi_target", default_target),
            )
        )
    config = ScenarioConfig(
        services=services,
        distribution=distribution,
        bandwidth_mbps=sc.getfloat("bandwidth_mbps", DEFAULT_BANDWIDTH_MBPS),
        noise_pct=sc.getfloat("noise_pct", 5.0),
        seed=sc.getint("seed", 7),
    )
    validate_scenario(config)
    return config


def validate_scenario(config: ScenarioConfig):
    if not config.services:
        raise ScenarioError("scenario must declare at least one service")
    if config.bandwidth_mbps <= 0:
        raise ScenarioError("bandwidth_mbps must be positive")
    if config.noise_pct < 0:
        raise ScenarioError("noise_pct must be nonnegative")


def default_scenario(
    distribution: DistributionKind = DistributionKind.UNIFORM,
    seed: int = 7,
    five_intents: bool = False,
) -> ScenarioConfig:
    """The stock 3-intent scenario (or the 5-intent scaling variant)."""
    if five_intents:
        services = [
            ServiceSpec(ServiceKind.CV, 0, 0.4, 48, DEFAULT_QOE_TARGET),
            ServiceSpec(ServiceKind.URLLC, 0, 0.2, 17, DEFAULT_PL_TARGET),
            ServiceSpec(ServiceKind.URLLC, 1, 0.2, 17, DEFAULT_PL_TARGET),
            ServiceSpec(ServiceKind.MIOT, 0, 0.1, 26, DEFAULT_PL_TARGET),
            ServiceSpec(ServiceKind.MIOT, 1, 0.1, 26, DEFAULT_PL_TARGET),
        ]
    else:
        services = [
            ServiceSpec(ServiceKind.CV, 0, 0.4, 52, DEFAULT_QOE_TARGET),
            ServiceSpec(ServiceKind.URLLC, 0, 0.2, 68, DEFAULT_PL_TARGET),
            ServiceSpec(ServiceKind.MIOT, 0, 0.1, 104, DEFAULT_PL_TARGET),
        ]
    return ScenarioConfig(
        services=services,
        distribution=DistributionSpec.of(distribution),
        seed=seed,
    )


def write_scenario(config: ScenarioConfig, path: str | Path):
    """Serialize a scenario back to the INI format (used by demos/tests)."""
    parser = configparser.ConfigParser()
    parser["scenario"] = {
        "bandwidth_mbps": repr(config.bandwidth_mbps),
        "distribution": config.distribution.kind.value.lower(),
        "dist_weights": " ".join(repr(w) for w in config.distribution.weights),
        "noise_pct": repr(config.noise_pct),
        "seed": str(config.seed),
    }
    for svc in config.services:
        parser[f"service:{svc.name}"] = {
            "kind": svc.kind.value,
            "demand_mbps": repr(svc.demand_per_ue),
            "ue_count": str(svc.ue_count),
            "kpi_target": repr(svc.kpi_target),
        }
    with open(path, "w") as fh:
        parser.write(fh)

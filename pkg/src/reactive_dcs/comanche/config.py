"""Platform, topology and workload parameters of the Comanche HTTP server."""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from ..errors import ConfigError
from ..synchro.types import PEID

COMPONENTS = ("F", "A", "D", "FS1", "FS2", "L")
REQUIRED = ("F", "A", "D", "FS1")
LIFECYCLE_MANAGED = ("FS2", "L")
# short tags used in command output names (c_mig2f2, c_startH2, ...)
TAGS = {"F": "f", "A": "a", "D": "d", "FS1": "f1", "FS2": "f2", "L": "l"}
COMMAND_TAGS = {"FS2": "H2", "L": "L"}
MONITORED = ("FS1", "FS2", "L")
FIFO_INPUTS = {"FS1": "fifoH1F", "FS2": "fifoH2F", "L": "fifoL2F"}
FE_SOURCES = ("below", "full", "empty")


@dataclass(frozen=True)
class Binding:
    client: str
    interface: str
    server: str
    f: int
    c: int


@dataclass(frozen=True)
class PlatformConfig:
    pe_count: int = 4
    processors: tuple = (("pe0", "pe1"), ("pe2", "pe3"))
    same_core: int = 200
    same_processor: int = 500
    other_processor: int = 1000
    max_load: tuple = (5000, 5000, 5000, 5000)
    disable_pe: str = "pe3"

    @property
    def pes(self):
        return PEID.symbols[: self.pe_count]

    def distance(self, p, q):
        if p == q:
            return self.same_core
        for proc in self.processors:
            if p in proc and q in proc:
                return self.same_processor
        return self.other_processor

    def distance_matrix(self):
        return [[self.distance(p, q) for q in self.pes] for p in self.pes]


@dataclass(frozen=True)
class Topology:
    components: tuple = COMPONENTS
    bindings: tuple = (
        Binding("F", "a", "A", 1, 500),
        Binding("A", "d", "D", 1, 1000),
        Binding("A", "l", "L", 1, 4000),
        Binding("D", "f1", "FS1", 1, 1500),
        Binding("D", "f2", "FS2", 1, 1500),
    )
    migratable: tuple = ("FS1", "FS2", "D")
    lifecycle_managed: tuple = LIFECYCLE_MANAGED
    placement: tuple = (("F", "pe0"), ("A", "pe0"), ("D", "pe3"), ("FS1", "pe1"), ("FS2", "pe3"), ("L", "pe2"))

    @property
    def place(self):
        return dict(self.placement)

    def bindings_of(self, comp):
        return [b for b in self.bindings if comp in (b.client, b.server)]


@dataclass(frozen=True)
class ModelOptions:
    fe_source: str = "below"


@dataclass(frozen=True)
class SimOptions:
    threshold: int = 8
    latency: tuple = (("start", 4),)
    service: tuple = (("F", 1), ("A", 1), ("D", 1), ("FS1", 2), ("FS2", 2), ("L", 1))
    periodic: int = 0


@dataclass(frozen=True)
class ComancheConfig:
    platform: PlatformConfig = field(default_factory=PlatformConfig)
    topology: Topology = field(default_factory=Topology)
    model: ModelOptions = field(default_factory=ModelOptions)
    sim: SimOptions = field(default_factory=SimOptions)

    def validate(self):
        p, t = self.platform, self.topology
        if p.pe_count not in (2, 4):
            raise ConfigError("pes must be 2 or 4")
        if len(p.max_load) != p.pe_count or any(m <= 0 for m in p.max_load):
            raise ConfigError("every PE needs a positive workload bound")
        if p.disable_pe not in p.pes:
            raise ConfigError(f"disable_pe {p.disable_pe!r} is not a platform PE")
        for proc in p.processors:
            for pe in proc:
                if pe not in p.pes:
                    raise ConfigError(f"processor lists unknown PE {pe!r}")
        for c in t.components:
            if c not in COMPONENTS:
                raise ConfigError(f"unknown component {c!r}")
        place = t.place
        for c in t.components:
            if place.get(c) not in p.pes:
                raise ConfigError(f"component {c!r} has no valid initial PE")
        for b in t.bindings:
            if b.client not in t.components or b.server not in t.components:
                raise ConfigError(f"binding {b.client}.{b.interface} -> {b.server} references an unknown component")
            if b.f < 0 or b.c < 0:
                raise ConfigError("binding frequency and cost must be non-negative")
        for c in t.migratable:
            if c not in t.components:
                raise ConfigError(f"migratable component {c!r} is not in the topology")
        for c in t.lifecycle_managed:
            if c not in LIFECYCLE_MANAGED:
                raise ConfigError(f"only {', '.join(LIFECYCLE_MANAGED)} have a lifecycle")
        if self.model.fe_source not in FE_SOURCES:
            raise ConfigError(f"fe_source must be one of {', '.join(FE_SOURCES)}")
        return self


DEFAULT_CONFIG = ComancheConfig()


def _int(section, key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {value!r}") from None


def parse_config(text, base=DEFAULT_CONFIG):
    """Read an INI-style configuration on top of `base`."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    known = {"platform", "bounds", "placement", "bindings", "model", "sim"}
    for s in cp.sections():
        if s not in known:
            raise ConfigError(f"unknown section [{s}]")
    platform, topo, model, sim = base.platform, base.topology, base.model, base.sim
    if cp.has_section("platform"):
        sec = cp["platform"]
        kw = {}
        for key, value in sec.items():
            if key == "pes":
                kw["pe_count"] = _int("platform", key, value)
            elif key == "processors":
                kw["processors"] = tuple(tuple(g.split()) for g in value.split(";") if g.strip())
            elif key in ("same_core", "same_processor", "other_processor"):
                kw[key] = _int("platform", key, value)
            elif key == "disable_pe":
                kw["disable_pe"] = value.strip()
            else:
                raise ConfigError(f"[platform] unknown key {key!r}")
        if "pe_count" in kw and kw["pe_count"] != platform.pe_count:
            kw.setdefault("max_load", (platform.max_load[0],) * kw["pe_count"])
            if kw["pe_count"] == 2:
                kw.setdefault("processors", (("pe0", "pe1"),))
                kw.setdefault("disable_pe", "pe1")
        platform = replace(platform, **kw)
    if cp.has_section("bounds"):
        loads = list(platform.max_load)
        for key, value in cp["bounds"].items():
            if key == "max":
                loads = [_int("bounds", key, value)] * platform.pe_count
        for key, value in cp["bounds"].items():
            if key == "max":
                continue
            if key not in platform.pes:
                raise ConfigError(f"[bounds] unknown PE {key!r}")
            loads[platform.pes.index(key)] = _int("bounds", key, value)
        platform = replace(platform, max_load=tuple(loads))
    if cp.has_section("placement"):
        place = dict(topo.placement)
        for key, value in cp["placement"].items():
            place[key] = value.strip()
        topo = replace(topo, placement=tuple((c, place[c]) for c in topo.components if c in place))
    if cp.has_section("bindings"):
        bindings = []
        for key, value in cp["bindings"].items():
            if "." not in key:
                raise ConfigError(f"[bindings] key {key!r} must be CLIENT.INTERFACE")
            client, itf = key.split(".", 1)
            parts = value.split()
            if len(parts) != 3:
                raise ConfigError(f"[bindings] {key}: expected 'SERVER f c', got {value!r}")
            bindings.append(Binding(client, itf, parts[0], _int("bindings", key, parts[1]),
                                    _int("bindings", key, parts[2])))
        topo = replace(topo, bindings=tuple(bindings))
    if cp.has_section("model"):
        for key, value in cp["model"].items():
            if key == "migratable":
                topo = replace(topo, migratable=tuple(value.split()))
            elif key == "lifecycle":
                topo = replace(topo, lifecycle_managed=tuple(value.split()))
            elif key == "fe_source":
                model = replace(model, fe_source=value.strip())
            else:
                raise ConfigError(f"[model] unknown key {key!r}")
    if cp.has_section("sim"):
        lat = dict(sim.latency)
        svc = dict(sim.service)
        kw = {}
        for key, value in cp["sim"].items():
            if key == "threshold":
                kw["threshold"] = _int("sim", key, value)
            elif key == "periodic":
                kw["periodic"] = _int("sim", key, value)
            elif key.startswith("latency."):
                lat[key.split(".", 1)[1]] = _int("sim", key, value)
            elif key.startswith("service."):
                svc[key.split(".", 1)[1]] = _int("sim", key, value)
            else:
                raise ConfigError(f"[sim] unknown key {key!r}")
        sim = replace(sim, latency=tuple(sorted(lat.items())), service=tuple(svc.items()), **kw)
    return ComancheConfig(platform, topo, model, sim).validate()


def load_config(path=None):
    if path is None:
        return DEFAULT_CONFIG
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None

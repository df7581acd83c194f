"""Map registry and the ``name:key=value,...`` spec-string parser."""

from __future__ import annotations

from . import hamiltonian, maps
from .maps import PlanarMap

# builder, allowed keys, required keys
_REGISTRY = {
    "cat": (lambda **kw: maps.cat_map(), (), ()),
    "standard": (lambda **kw: maps.standard_map(**kw), ("k",), ()),
    "identity": (lambda **kw: maps.identity_map(), (), ()),
    "rotation": (lambda **kw: maps.rotation_map(**kw), ("alpha",), ("alpha",)),
    "zscale": (lambda **kw: maps.zscale_map(**kw), ("c",), ()),
    "sphere_pendulum": (lambda **kw: hamiltonian.sphere_pendulum(**kw),
                        ("t", "step"), ()),
}


class MapSpecError(ValueError):
    """Unresolvable map spec string."""


def map_names() -> list:
    return sorted(_REGISTRY)


def resolve(spec: str) -> PlanarMap:
    """Build a map from ``name`` or ``name:key=value,key=value``.

    Keys are case-insensitive and stored lowercase; values are floats.
    """
    spec = spec.strip()
    name, _, tail = spec.partition(":")
    name = name.strip().lower()
    if name not in _REGISTRY:
        raise MapSpecError(f"unknown map name: {name!r} (known: {', '.join(map_names())})")
    builder, allowed, required = _REGISTRY[name]
    kwargs = {}
    if tail:
        for item in tail.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise MapSpecError(f"malformed parameter {item!r} in {spec!r}")
            key = key.strip().lower()
            if key not in allowed:
                raise MapSpecError(f"map {name!r} takes no parameter {key!r}")
            try:
                kwargs[key] = float(value)
            except ValueError as exc:
                raise MapSpecError(f"non-numeric value in {item!r}") from exc
    missing = [k for k in required if k not in kwargs]
    if missing:
        raise MapSpecError(f"map {name!r} requires parameters: {', '.join(missing)}")
    return builder(**kwargs)

"""Columnar text files for fields and manifold jets.

Fields: a header line `# field dim=.. cutoff=.. freq_dim=.. rho=.. r=.. is_real=..`
then one line per mode `k_1 .. k_n re im`, all modes of the box in C order,
numbers with 17 significant digits so that values round-trip exactly.
"""

import itertools
import pathlib

import numpy as np

from spectral_torus import errors
from spectral_torus.models import models


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _parse_header(line: str, kind: str, path: pathlib.Path) -> dict[str, str]:
    parts = line.split()
    if len(parts) < 2 or parts[0] != "#" or parts[1] != kind:
        raise errors.FieldFormatError(str(path), f"expected a '# {kind}' header")
    header = {}
    for item in parts[2:]:
        key, _, value = item.partition("=")
        header[key] = value
    return header


def write_field(
    u: models.SpectralField, path: pathlib.Path, space: models.SpaceParams | None = None
) -> None:
    space = space or models.SpaceParams()
    lines = [
        f"# field dim={u.dim} cutoff={u.cutoff} freq_dim={u.freq_dim}"
        f" rho={_fmt(space.rho)} r={_fmt(space.r)} is_real={str(u.is_real).lower()}"
    ]
    line = range(-u.cutoff, u.cutoff + 1)
    for k in itertools.product(line, repeat=u.n_axes):
        value = u.coeffs[tuple(ki + u.cutoff for ki in k)]
        lines.append(
            " ".join(str(ki) for ki in k) + f" {_fmt(value.real)} {_fmt(value.imag)}"
        )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def read_field(path: pathlib.Path) -> tuple[models.SpectralField, models.SpaceParams]:
    text = path.read_text().splitlines()
    if not text:
        raise errors.FieldFormatError(str(path), "empty file")
    header = _parse_header(text[0], "field", path)
    try:
        dim = int(header["dim"])
        cutoff = int(header["cutoff"])
        freq_dim = int(header.get("freq_dim", "0"))
        space = models.SpaceParams(rho=float(header["rho"]), r=float(header["r"]))
        is_real = header["is_real"] == "true"
        n_axes = dim + freq_dim
        coeffs = np.zeros((2 * cutoff + 1,) * n_axes, dtype=np.complex128)
        for row in text[1:]:
            parts = row.split()
            if len(parts) != n_axes + 2:
                raise ValueError(f"row with {len(parts)} columns: {row!r}")
            k = tuple(int(part) + cutoff for part in parts[:n_axes])
            coeffs[k] = complex(float(parts[-2]), float(parts[-1]))
    except (KeyError, ValueError, IndexError) as exc:
        raise errors.FieldFormatError(str(path), str(exc)) from exc
    field_cls = models.EvolutionField if freq_dim else models.SpectralField
    field = field_cls(
        dim=dim, cutoff=cutoff, coeffs=coeffs, is_real=is_real, freq_dim=freq_dim
    )
    return field, space


def write_jet(jet: models.ManifoldJet, path: pathlib.Path) -> None:
    """One line per nonzero coefficient: `degree l_1 .. l_b h a b re im`.

    Unused index columns are -1 (a and b for degree 0, b for degree 1). The
    hyperbolic index h refers to the `# mode` lines after the header.
    """
    lines = [
        f"# jet freq_dim={jet.freq_dim} theta_modes={jet.theta_modes}"
        f" n_hyperbolic={len(jet.hyperbolic)} n_center={jet.n_center}"
    ]
    for h, (k, sign) in enumerate(jet.hyperbolic):
        lines.append(f"# mode {h} k={','.join(str(ki) for ki in k)} sign={sign}")
    offset = jet.theta_modes
    for degree, array in enumerate((jet.constant, jet.linear, jet.quadratic)):
        for index in zip(*np.nonzero(array)):
            value = array[index]
            l = [str(int(i) - offset) for i in index[: jet.freq_dim]]
            rest = [int(i) for i in index[jet.freq_dim :]]
            rest += [-1] * (3 - len(rest))
            lines.append(
                f"{degree} {' '.join(l)} {' '.join(str(i) for i in rest)}"
                f" {_fmt(value.real)} {_fmt(value.imag)}"
            )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def read_jet(path: pathlib.Path) -> models.ManifoldJet:
    text = path.read_text().splitlines()
    if not text:
        raise errors.FieldFormatError(str(path), "empty file")
    header = _parse_header(text[0], "jet", path)
    try:
        freq_dim = int(header["freq_dim"])
        theta_modes = int(header["theta_modes"])
        n_center = int(header["n_center"])
        hyperbolic = []
        rows = []
        for row in text[1:]:
            if row.startswith("# mode"):
                fields = dict(item.partition("=")[::2] for item in row.split()[3:])
                k = tuple(int(ki) for ki in fields["k"].split(","))
                hyperbolic.append((k, int(fields["sign"])))
            else:
                rows.append(row.split())
        jet = models.ManifoldJet.zeros(freq_dim, theta_modes, hyperbolic, n_center)
        arrays = [np.array(jet.constant), np.array(jet.linear), np.array(jet.quadratic)]
        for parts in rows:
            degree = int(parts[0])
            l = [int(part) + theta_modes for part in parts[1 : 1 + freq_dim]]
            rest = [int(part) for part in parts[1 + freq_dim : 4 + freq_dim]][: degree + 1]
            arrays[degree][tuple(l + rest)] = complex(float(parts[-2]), float(parts[-1]))
    except (KeyError, ValueError, IndexError) as exc:
        raise errors.FieldFormatError(str(path), str(exc)) from exc
    return jet.with_coefficients(*arrays)

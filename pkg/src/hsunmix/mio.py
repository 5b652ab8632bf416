"""Plain-text matrix, label, and scene persistence.

Matrices are CSV with one row per line, every value printed with 17
significant digits so float64 round-trips bit-exactly.  A dictionary
may carry a ``<stem>.labels`` sidecar holding one label per line.
Scenes persist as a directory of CSVs plus a JSON metadata file.
"""

import json
from pathlib import Path

import numpy as np

from .errors import InputDataError
from .pruning import SpectralDictionary
from .simulate import SceneSpec, SyntheticScene, dmer_of, snr_of

_FMT = "%.17g"


def write_matrix(path, A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    path = Path(path)
    with path.open("w") as fh:
        for row in A:
            fh.write(",".join(_FMT % v for v in row))
            fh.write("\n")
    return path


def read_matrix(path):
    path = Path(path)
    rows = []
    width = None
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise InputDataError(f"{path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        try:
            row = [float(v) for v in fields]
        except ValueError as exc:
            raise InputDataError(f"{path}, line {lineno}: {exc}") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputDataError(
                f"{path}, line {lineno}: expected {width} values, "
                f"got {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise InputDataError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def labels_path(path):
    return Path(path).with_suffix(".labels")


def write_labels(path, labels):
    path = Path(path)
    path.write_text("".join(f"{name}\n" for name in labels))
    return path


def read_labels(path):
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise InputDataError(f"{path}: {exc}") from exc
    labels = [line.strip() for line in lines if line.strip()]
    if not labels:
        raise InputDataError(f"{path}: no labels")
    return labels


def write_dictionary(path, dictionary):
    """Write spectra to ``path`` and labels to the ``.labels`` sidecar."""
    path = write_matrix(path, dictionary.spectra)
    write_labels(labels_path(path), dictionary.labels)
    return path


def read_dictionary(path):
    """Read spectra from ``path``; labels come from the ``.labels``
    sidecar when present and are generated otherwise."""
    spectra = read_matrix(path)
    sidecar = labels_path(path)
    labels = read_labels(sidecar) if sidecar.exists() else None
    try:
        return SpectralDictionary(spectra, labels)
    except ValueError as exc:
        raise InputDataError(f"{path}: {exc}") from exc


def write_json(path, payload):
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputDataError(f"{path}: {exc}") from exc


def save_scene(directory, scene):
    """Persist a scene as CSVs plus ``scene.json`` metadata."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / "observations.csv", scene.Y)
    write_dictionary(directory / "dictionary.csv", scene.dictionary)
    write_matrix(directory / "abundances.csv", scene.S)
    write_matrix(directory / "coefficients.csv", scene.C)
    meta = {
        "materials": scene.spec.materials,
        "pixels": scene.spec.pixels,
        "dmer_db": scene.spec.dmer_db,
        "snr_db": scene.spec.snr_db,
        "seed": scene.spec.seed,
        "truth_indices": scene.truth_indices.tolist(),
        "delta": scene.delta,
        "sigma2": scene.sigma2,
        "signal_energy": scene.signal_energy,
        "ref_norm": scene.ref_norm,
        "realized_dmer_db": dmer_of(scene),
        "realized_snr_db": snr_of(scene),
    }
    write_json(directory / "scene.json", meta)
    return directory


def load_scene(directory):
    directory = Path(directory)
    meta = read_json(directory / "scene.json")
    spec = SceneSpec(
        materials=meta["materials"],
        pixels=meta["pixels"],
        dmer_db=float(meta["dmer_db"]),
        snr_db=float(meta["snr_db"]),
        seed=meta["seed"],
    )
    return SyntheticScene(
        Y=read_matrix(directory / "observations.csv"),
        dictionary=read_dictionary(directory / "dictionary.csv"),
        truth_indices=np.asarray(meta["truth_indices"], dtype=int),
        S=np.atleast_2d(read_matrix(directory / "abundances.csv")),
        C=read_matrix(directory / "coefficients.csv"),
        delta=float(meta["delta"]),
        sigma2=float(meta["sigma2"]),
        signal_energy=float(meta["signal_energy"]),
        ref_norm=float(meta["ref_norm"]),
        spec=spec,
    )

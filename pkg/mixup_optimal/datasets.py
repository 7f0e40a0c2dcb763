"""Dataset generators and loaders.

Constructive datasets:

- :func:`alternating_line` — X_m^k, the points 0..m−1 labeled cyclically;
- :func:`four_point_cross` — two classes on the coordinate axes;
- :func:`two_moons` — two noisy semicircles;
- :func:`gaussian_binary` — i.i.d. N(0, I_d) points with alternating labels.

External data is read from CSV (:func:`load_csv`) or IDX files
(:func:`load_idx`, :func:`load_mnist`); :func:`fetch_mnist` downloads the
IDX files once.
"""

from __future__ import annotations

import csv
import gzip
import logging
import math
import re
from pathlib import Path

import numpy as np
import requests
from numpy.typing import NDArray

from mixup_optimal.constants import (
    DOWNLOAD_TIMEOUT,
    IDX_IMAGES_MAGIC,
    IDX_LABELS_MAGIC,
    MNIST_BASE_URL,
    MNIST_FILES,
)
from mixup_optimal.exceptions import (
    ConfigError,
    ContractError,
    DatasetError,
    DatasetParseError,
    IdxFormatError,
)
from mixup_optimal.models.dataset import LabeledDataset

logger = logging.getLogger(__name__)

_LINE_SPEC = re.compile(r"^x(\d+)k(\d+)$")


# ---------------------------------------------------------------------------
# Constructive datasets
# ---------------------------------------------------------------------------


def alternating_line(m: int, k: int) -> LabeledDataset:
    """The points {0, …, m−1} ⊂ R with label (i mod k) + 1.

    Raises
    ------
    DatasetError
        If ``k > m`` (some class would be empty) or ``m < 2``/``k < 2``.
    """
    if m < 2 or k < 2:
        raise DatasetError(f"alternating_line needs m >= 2 and k >= 2, got ({m}, {k})")
    if k > m:
        raise DatasetError(f"class {m + 1} empty: k={k} exceeds m={m}")
    points = np.arange(m, dtype=np.float64).reshape(-1, 1)
    labels = np.arange(m) % k + 1
    return LabeledDataset(points=points, labels=labels, k=k, name=f"x{m}k{k}")


def four_point_cross() -> LabeledDataset:
    """X_1 = {(0, 1), (0, −1)} and X_2 = {(1, 0), (−1, 0)}."""
    points = np.array([[0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [-1.0, 0.0]])
    labels = np.array([1, 1, 2, 2])
    return LabeledDataset(points=points, labels=labels, k=2, name="cross")


def two_moons(
    n_per_class: int, separation: float, noise_sd: float, seed: int
) -> LabeledDataset:
    """Two interleaved semicircles.

    Class 1 is ``(cos t, sin t) + η`` and class 2 is
    ``(1 − cos t, −sin t − separation) + η`` with t ~ U[0, π] and
    η ~ N(0, noise_sd² I₂).  The first ``n_per_class`` rows are class 1.
    """
    if n_per_class < 1:
        raise ContractError(f"n_per_class must be >= 1, got {n_per_class}")
    if noise_sd < 0:
        raise ContractError(f"noise_sd must be >= 0, got {noise_sd}")
    rng = np.random.default_rng(seed)
    t1 = rng.uniform(0.0, math.pi, n_per_class)
    t2 = rng.uniform(0.0, math.pi, n_per_class)
    upper = np.column_stack([np.cos(t1), np.sin(t1)])
    lower = np.column_stack([1.0 - np.cos(t2), -np.sin(t2) - separation])
    points = np.vstack([upper, lower])
    if noise_sd > 0:
        points = points + rng.normal(0.0, noise_sd, size=points.shape)
    labels = np.repeat([1, 2], n_per_class)
    return LabeledDataset(
        points=points, labels=labels, k=2, name=f"moons-s{separation:g}-n{noise_sd:g}"
    )


def moon_offset_probes(
    n_per_class: int, separation: float, offset: float
) -> LabeledDataset:
    """Points pushed ``offset`` outward from each noise-free moon arc.

    Probes sit on evenly spaced arc parameters and carry the label of the
    arc they were pushed off; the offset is along the arc's outward normal.
    """
    t = np.linspace(0.0, math.pi, n_per_class)
    radius = 1.0 + offset
    upper = np.column_stack([radius * np.cos(t), radius * np.sin(t)])
    lower = np.column_stack(
        [1.0 - radius * np.cos(t), -radius * np.sin(t) - separation]
    )
    return LabeledDataset(
        points=np.vstack([upper, lower]),
        labels=np.repeat([1, 2], n_per_class),
        k=2,
        name="moon-probes",
    )


def gaussian_binary(n: int, d: int, seed: int) -> LabeledDataset:
    """n i.i.d. N(0, I_d) points labeled class 1, 2, 1, 2, …

    ``d > n`` is not enforced here; the linear experiments check it.
    """
    if n < 2 or d < 1:
        raise ContractError(f"gaussian_binary needs n >= 2 and d >= 1, got ({n}, {d})")
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((n, d))
    labels = np.arange(n) % 2 + 1
    return LabeledDataset(points=points, labels=labels, k=2, name=f"gauss-n{n}-d{d}")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def load_csv(path: str | Path) -> LabeledDataset:
    """Read a dataset from CSV with header ``label,f0,f1,...``.

    Rows are kept in file order and ``k`` is the largest label.

    Raises
    ------
    DatasetParseError
        On an empty file, a bad header, ragged rows or non-numeric fields;
        ``line`` carries the 1-based line number.
    DatasetError
        If a class index in ``1..k`` has no points.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DatasetParseError(f"{path}: empty file", path=str(path), line=1)
        header = [h.strip() for h in header]
        if header[0] != "label" or len(header) < 2:
            raise DatasetParseError(
                f"{path}:1: header must be 'label,f0,f1,...'", path=str(path), line=1
            )
        width = len(header)
        labels: list[int] = []
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise DatasetParseError(
                    f"{path}:{line_no}: expected {width} fields, got {len(row)}",
                    path=str(path),
                    line=line_no,
                )
            try:
                label = int(row[0])
                values = [float(v) for v in row[1:]]
            except ValueError:
                raise DatasetParseError(
                    f"{path}:{line_no}: non-numeric field in {row!r}",
                    path=str(path),
                    line=line_no,
                ) from None
            if label < 1:
                raise DatasetParseError(
                    f"{path}:{line_no}: labels must be positive, got {label}",
                    path=str(path),
                    line=line_no,
                )
            labels.append(label)
            rows.append(values)
    if not rows:
        raise DatasetParseError(f"{path}: no data rows", path=str(path), line=2)
    return LabeledDataset(
        points=np.asarray(rows, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        k=max(labels),
        name=path.stem,
    )


def write_csv(ds: LabeledDataset, path: str | Path) -> None:
    """Write *ds* in the format read by :func:`load_csv`."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", *(f"f{c}" for c in range(ds.n))])
        for label, row in zip(ds.labels, ds.points):
            writer.writerow([int(label), *(repr(float(v)) for v in row)])


# ---------------------------------------------------------------------------
# IDX / MNIST
# ---------------------------------------------------------------------------


def _read_bytes(path: Path) -> bytes:
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":
        try:
            return gzip.decompress(raw)
        except (OSError, EOFError) as exc:
            raise IdxFormatError(
                f"{path}: corrupt gzip stream", path=str(path)
            ) from exc
    return raw


def _parse_idx_images(path: Path) -> NDArray[np.uint8]:
    data = _read_bytes(path)
    if len(data) < 16:
        raise IdxFormatError(f"{path}: truncated header", path=str(path))
    magic = int.from_bytes(data[0:4], "big")
    if magic != IDX_IMAGES_MAGIC:
        raise IdxFormatError(
            f"{path}: bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}",
            path=str(path),
        )
    count, rows, cols = (int.from_bytes(data[o : o + 4], "big") for o in (4, 8, 12))
    expected = 16 + count * rows * cols
    if len(data) < expected:
        raise IdxFormatError(
            f"{path}: truncated, {len(data)} bytes for {count} images of {rows}x{cols}",
            path=str(path),
        )
    pixels = np.frombuffer(data, dtype=np.uint8, count=count * rows * cols, offset=16)
    return pixels.reshape(count, rows * cols)


def _parse_idx_labels(path: Path) -> NDArray[np.uint8]:
    data = _read_bytes(path)
    if len(data) < 8:
        raise IdxFormatError(f"{path}: truncated header", path=str(path))
    magic = int.from_bytes(data[0:4], "big")
    if magic != IDX_LABELS_MAGIC:
        raise IdxFormatError(
            f"{path}: bad label magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}",
            path=str(path),
        )
    count = int.from_bytes(data[4:8], "big")
    if len(data) < 8 + count:
        raise IdxFormatError(
            f"{path}: truncated, expected {count} labels", path=str(path)
        )
    return np.frombuffer(data, dtype=np.uint8, count=count, offset=8)


def load_idx(
    images_path: str | Path,
    labels_path: str | Path,
    fraction: float = 1.0,
    seed: int = 0,
) -> LabeledDataset:
    """Read an IDX image/label pair (plain or gzip-compressed).

    Pixels are scaled to [0, 1] and flattened; class = digit + 1.  When
    ``fraction < 1`` a uniform sample of ⌈fraction·N⌉ rows is kept, without
    replacement and in file order.

    Raises
    ------
    IdxFormatError
        On a bad magic number, a truncated file or mismatched counts; the
        message names the offending file.
    """
    if not 0.0 < fraction <= 1.0:
        raise ContractError(f"fraction must lie in (0, 1], got {fraction}")
    images_path, labels_path = Path(images_path), Path(labels_path)
    images = _parse_idx_images(images_path)
    digits = _parse_idx_labels(labels_path)
    if images.shape[0] != digits.shape[0]:
        raise IdxFormatError(
            f"{labels_path}: {digits.shape[0]} labels for {images.shape[0]} images "
            f"in {images_path}",
            path=str(labels_path),
        )
    total = images.shape[0]
    keep = math.ceil(fraction * total)
    if keep < total:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(total, size=keep, replace=False))
        images, digits = images[idx], digits[idx]
    labels = digits.astype(np.int64) + 1
    logger.info("loaded %d of %d IDX rows from %s", keep, total, images_path.name)
    return LabeledDataset(
        points=images.astype(np.float64) / 255.0,
        labels=labels,
        k=int(labels.max()),
        name=images_path.name.split(".")[0],
    )


def _find_idx(directory: Path, filename: str) -> Path:
    for candidate in (directory / filename, directory / filename.removesuffix(".gz")):
        if candidate.exists():
            return candidate
    raise DatasetError(f"{filename} not found in {directory}")


def load_mnist(
    directory: str | Path, split: str = "train", fraction: float = 1.0, seed: int = 0
) -> LabeledDataset:
    """Load the MNIST ``train`` or ``test`` split from *directory*."""
    if split not in ("train", "test"):
        raise ContractError(f"split must be 'train' or 'test', got {split!r}")
    directory = Path(directory)
    return load_idx(
        _find_idx(directory, MNIST_FILES[f"{split}_images"]),
        _find_idx(directory, MNIST_FILES[f"{split}_labels"]),
        fraction=fraction,
        seed=seed,
    )


def mnist_available(directory: str | Path | None) -> bool:
    """``True`` when all four MNIST IDX files are present in *directory*."""
    if not directory:
        return False
    try:
        for filename in MNIST_FILES.values():
            _find_idx(Path(directory), filename)
    except DatasetError:
        return False
    return True


def fetch_mnist(
    directory: str | Path, base_url: str = MNIST_BASE_URL
) -> dict[str, Path]:
    """Download the four MNIST IDX archives into *directory*.

    Files already present are left alone.

    Returns
    -------
    dict[str, Path]:
        Local path for each key of :data:`~mixup_optimal.constants.MNIST_FILES`.

    Raises
    ------
    DatasetError
        If a download fails or the mirror answers with an error status.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for key, filename in MNIST_FILES.items():
        target = directory / filename
        paths[key] = target
        if target.exists():
            logger.info("%s already present", target)
            continue
        url = base_url.rstrip("/") + "/" + filename
        logger.info("downloading %s", url)
        try:
            resp = requests.get(url, timeout=DOWNLOAD_TIMEOUT)
            resp.raise_for_status()
        except requests.RequestException as exc:
            raise DatasetError(f"cannot download {url}: {exc}") from exc
        target.write_bytes(resp.content)
        logger.info("  cached to %s (%d bytes)", target, len(resp.content))
    return paths


# ---------------------------------------------------------------------------
# CLI dataset specs
# ---------------------------------------------------------------------------


def from_spec(
    spec: str,
    *,
    separation: float = 0.5,
    noise_sd: float = 0.1,
    n_per_class: int = 500,
    n: int = 20,
    d: int = 650,
    seed: int = 0,
    mnist_dir: str | Path | None = None,
    fraction: float = 1.0,
) -> LabeledDataset:
    """Resolve a dataset name such as ``x3k2`` or ``moons``.

    Accepted names: ``x<m>k<k>``, ``cross``, ``moons``, ``gaussian``,
    ``csv:<path>`` and ``mnist`` (training split).

    Raises
    ------
    ConfigError
        If the name is not recognised.
    """
    match = _LINE_SPEC.match(spec)
    if match:
        return alternating_line(int(match.group(1)), int(match.group(2)))
    if spec == "cross":
        return four_point_cross()
    if spec == "moons":
        return two_moons(n_per_class, separation, noise_sd, seed)
    if spec == "gaussian":
        return gaussian_binary(n, d, seed)
    if spec.startswith("csv:"):
        return load_csv(spec[4:])
    if spec == "mnist":
        if mnist_dir is None:
            raise ConfigError("mnist dataset needs mnist_dir", field="mnist_dir")
        return load_mnist(mnist_dir, "train", fraction, seed)
    raise ConfigError(f"unknown dataset {spec!r}", field="dataset")

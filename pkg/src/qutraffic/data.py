"""Dataset ingestion and preprocessing.

Datasets live either in class subdirectories of netpbm images
(``red|stop``, ``yellow|warning``, ``green|go``; PGM P2/P5 with maxval 255,
PPM P3/P6 sources are luma-converted) or in a single header-free
``dataset.csv`` with rows ``label,p0,...,p{k-1}`` (square pixel counts).
Images are box-filtered down to the requested side on load.

A deterministic synthetic traffic-light generator provides a desk-scale
stand-in dataset: each class brightens one pixel (2x2) or one quadrant
(4x4) of an otherwise dark frame, plus seeded Gaussian brightness noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encodings import GrayImage

CLASS_NAMES = ("red", "yellow", "green")
_DIR_ALIASES = ({"red", "stop"}, {"yellow", "warning"}, {"green", "go"})

BRIGHT = 220
DARK = 30


class DataFormatError(ValueError):
    """Malformed image file, CSV row, or dataset directory layout."""


@dataclass
class Dataset:
    samples: list[tuple[GrayImage, int]]
    class_names: tuple[str, ...] = CLASS_NAMES

    def __post_init__(self):
        for _, label in self.samples:
            if not 0 <= label < len(self.class_names):
                raise ValueError(f"label {label} out of range")

    def __len__(self) -> int:
        return len(self.samples)

    def counts(self) -> tuple[int, ...]:
        counts = [0] * len(self.class_names)
        for _, label in self.samples:
            counts[label] += 1
        return tuple(counts)

    def class_probs(self) -> np.ndarray:
        """Per-class prevalence N_c = count_c / total."""
        counts = np.asarray(self.counts(), dtype=float)
        return counts / counts.sum()

    def labels(self) -> np.ndarray:
        return np.array([label for _, label in self.samples], dtype=int)


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def _netpbm_tokens(data: bytes):
    """Yield (token, end_offset) skipping whitespace and ``#`` comments."""
    i, n = 0, len(data)
    while i < n:
        c = data[i : i + 1]
        if c in b" \t\r\n":
            i += 1
        elif c == b"#":
            j = data.find(b"\n", i)
            i = n if j < 0 else j + 1
        else:
            j = i
            while j < n and data[j : j + 1] not in b" \t\r\n#":
                j += 1
            yield data[i:j], j
            i = j


def read_pgm(path) -> GrayImage:
    """Read a netpbm image: P2/P5 grayscale, or P3/P6 color via luma."""
    path = Path(path)
    data = path.read_bytes()
    tokens = _netpbm_tokens(data)
    try:
        magic, _ = next(tokens)
    except StopIteration:
        raise DataFormatError(f"{path}: empty file") from None
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise DataFormatError(f"{path}: unsupported netpbm magic {magic!r}")
    header = []
    end = 0
    for token, end in tokens:
        header.append(token)
        if len(header) == 3:
            break
    if len(header) < 3:
        raise DataFormatError(f"{path}: truncated header")
    try:
        width, height, maxval = (int(t) for t in header)
    except ValueError:
        raise DataFormatError(f"{path}: non-numeric header field") from None
    if width < 1 or height < 1:
        raise DataFormatError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise DataFormatError(f"{path}: maxval must be 255, got {maxval}")
    channels = 3 if magic in (b"P3", b"P6") else 1
    count = width * height * channels
    if magic in (b"P2", b"P3"):
        values = []
        for token, _ in tokens:
            try:
                values.append(int(token))
            except ValueError:
                raise DataFormatError(f"{path}: non-numeric pixel {token!r}") from None
        if len(values) != count:
            raise DataFormatError(
                f"{path}: expected {count} pixel values, got {len(values)}"
            )
    else:
        raw = data[end + 1 : end + 1 + count]
        if len(raw) < count:
            raise DataFormatError(f"{path}: truncated pixel data")
        values = list(raw)
    if any(v < 0 or v > 255 for v in values):
        raise DataFormatError(f"{path}: pixel value out of range [0, 255]")
    if channels == 3:
        values = [
            _round_half_up(0.299 * r + 0.587 * g + 0.114 * b)
            for r, g, b in zip(values[0::3], values[1::3], values[2::3])
        ]
    return GrayImage(width, height, tuple(values))


def write_pgm(path, image: GrayImage) -> None:
    """Write an ASCII (P2) PGM file, one image row per line."""
    lines = ["P2", f"{image.width} {image.height}", "255"]
    for r in range(image.height):
        row = image.pixels[r * image.width : (r + 1) * image.width]
        lines.append(" ".join(str(p) for p in row))
    Path(path).write_text("\n".join(lines) + "\n")


def resize_area(image: GrayImage, side: int) -> GrayImage:
    """Box-filter downsample: floor-partition blocks, means rounded half-up."""
    if side < 1:
        raise ValueError("target side must be positive")
    if image.width < side or image.height < side:
        raise ValueError(
            f"cannot resize {image.width}x{image.height} image up to {side}x{side}"
        )
    arr = np.asarray(image.pixels, dtype=float).reshape(image.height, image.width)
    row_edges = [(g * image.height) // side for g in range(side + 1)]
    col_edges = [(g * image.width) // side for g in range(side + 1)]
    pixels = []
    for r in range(side):
        for c in range(side):
            block = arr[row_edges[r] : row_edges[r + 1], col_edges[c] : col_edges[c + 1]]
            pixels.append(_round_half_up(float(block.mean())))
    return GrayImage(side, side, tuple(pixels))


def _load_csv(path: Path, side: int) -> Dataset:
    samples = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values = [int(field) for field in line.split(",")]
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: non-integer field") from None
        if len(values) < 2:
            raise DataFormatError(f"{path}:{lineno}: row needs a label and pixels")
        label, pixels = values[0], values[1:]
        if not 0 <= label < len(CLASS_NAMES):
            raise DataFormatError(f"{path}:{lineno}: label {label} out of range")
        src = math.isqrt(len(pixels))
        if src * src != len(pixels):
            raise DataFormatError(
                f"{path}:{lineno}: pixel count {len(pixels)} is not a square"
            )
        if any(p < 0 or p > 255 for p in pixels):
            raise DataFormatError(f"{path}:{lineno}: pixel value out of range [0, 255]")
        image = GrayImage(src, src, tuple(pixels))
        if src != side:
            try:
                image = resize_area(image, side)
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
        samples.append((image, label))
    return Dataset(samples)


def write_dataset_csv(dataset: Dataset, path) -> None:
    lines = [
        ",".join([str(label)] + [str(p) for p in image.pixels])
        for image, label in dataset.samples
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def load_dataset(root, side: int) -> Dataset:
    """Load a dataset directory (class subdirectories or dataset.csv)."""
    root = Path(root)
    if not root.is_dir():
        raise DataFormatError(f"{root}: not a directory")
    csv_path = root / "dataset.csv"
    if csv_path.is_file():
        return _load_csv(csv_path, side)
    samples = []
    for label, aliases in enumerate(_DIR_ALIASES):
        class_dirs = [root / name for name in sorted(aliases) if (root / name).is_dir()]
        if not class_dirs:
            raise DataFormatError(
                f"{root}: missing class directory for {CLASS_NAMES[label]!r} "
                f"(expected one of {sorted(aliases)})"
            )
        for class_dir in class_dirs:
            for file in sorted(class_dir.iterdir()):
                if file.suffix.lower() in (".pgm", ".ppm"):
                    image = read_pgm(file)
                    try:
                        image = resize_area(image, side)
                    except ValueError as exc:
                        raise DataFormatError(f"{file}: {exc}") from None
                    samples.append((image, label))
    if not samples:
        raise DataFormatError(f"{root}: no images found")
    return Dataset(samples)


@dataclass(frozen=True)
class SyntheticSpec:
    per_class: int
    side: int = 2
    brightness_sigma: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.per_class < 1:
            raise ValueError("per_class must be >= 1")
        if self.side not in (2, 4):
            raise ValueError("side must be 2 or 4")
        if self.brightness_sigma < 0:
            raise ValueError("brightness_sigma must be >= 0")


def class_template(label: int, side: int) -> np.ndarray:
    """One bright pixel (2x2) or quadrant (4x4) on a dark frame per class."""
    if label not in (0, 1, 2):
        raise ValueError(f"label {label} out of range")
    arr = np.full((side, side), float(DARK))
    if side == 2:
        arr.flat[label] = float(BRIGHT)
    elif side == 4:
        r, c = ((0, 0), (0, 2), (2, 0))[label]
        arr[r : r + 2, c : c + 2] = float(BRIGHT)
    else:
        raise ValueError("side must be 2 or 4")
    return arr


def gen_synthetic(spec: SyntheticSpec) -> Dataset:
    """Deterministic synthetic dataset: class templates plus Gaussian noise."""
    rng = np.random.default_rng(spec.seed)
    samples = []
    for label in range(len(CLASS_NAMES)):
        template = class_template(label, spec.side)
        for _ in range(spec.per_class):
            noisy = template + rng.normal(0.0, spec.brightness_sigma, size=template.shape)
            pixels = np.clip(np.floor(noisy + 0.5), 0, 255).astype(int)
            samples.append(
                (GrayImage(spec.side, spec.side, tuple(pixels.reshape(-1))), label)
            )
    return Dataset(samples)


def stratified_split(
    dataset: Dataset, train_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Per-class seeded shuffle and split; every class lands in both halves."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    for name, count in zip(dataset.class_names, dataset.counts()):
        if count < 2:
            raise ValueError(
                f"class {name!r} needs >= 2 samples to appear in both splits, has {count}"
            )
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label in range(len(dataset.class_names)):
        members = [s for s in dataset.samples if s[1] == label]
        order = rng.permutation(len(members))
        k = _round_half_up(len(members) * train_fraction)
        k = min(max(k, 1), len(members) - 1)
        for position, index in enumerate(order):
            (train if position < k else test).append(members[index])
    return Dataset(train), Dataset(test)

"""Finite multisets of complex values with a 1D/2D dimensionality tag.

Both the arithmetic family sweeps and the random-model draws produce these;
downstream statistics (characteristic functions, discrepancy, small values)
consume them without caring which side they came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

REAL_TOL = 1e-9


@dataclass(frozen=True)
class ComplexSampleSet:
    """values: complex samples; labels: optional parallel integer labels.

    dimension is 1 when the generating setup is declared real (self-dual at
    the working height), in which case every value must be real to REAL_TOL.
    ``meta`` carries provenance (N, Y, t, provider, seed, ...) for reports.
    """

    values: np.ndarray
    labels: np.ndarray | None = None
    dimension: int = 2
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != values.shape:
                raise ValueError("labels must parallel values")
            object.__setattr__(self, "labels", labels)
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if self.dimension == 1 and len(values) and np.abs(values.imag).max() > REAL_TOL:
            raise ValueError(
                "dimension=1 sample set has non-real values "
                f"(max |Im| = {np.abs(values.imag).max():.3g})"
            )

    def __len__(self) -> int:
        return len(self.values)


def format_float(x: float) -> str:
    """Fixed 17-significant-digit decimal; round-trips float64 exactly."""
    return f"{x:.17g}"


def write_samples_csv(path_or_file, samples: ComplexSampleSet, label_name="label"):
    """CSV export: header ``label,re,im`` (or ``re,im`` without labels)."""
    close = False
    if hasattr(path_or_file, "write"):
        fh = path_or_file
    else:
        fh = open(path_or_file, "w", encoding="ascii", newline="\n")
        close = True
    try:
        for key in sorted(samples.meta):
            fh.write(f"# {key} = {samples.meta[key]}\n")
        if samples.labels is not None:
            fh.write(f"{label_name},re,im\n")
            for lab, v in zip(samples.labels, samples.values):
                fh.write(
                    f"{int(lab)},{format_float(v.real)},{format_float(v.imag)}\n"
                )
        else:
            fh.write("re,im\n")
            for v in samples.values:
                fh.write(f"{format_float(v.real)},{format_float(v.imag)}\n")
    finally:
        if close:
            fh.close()

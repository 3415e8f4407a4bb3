"""
Dimension tables and their TSV/JSON exports.
"""

import json
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

Key = Tuple[int, ...]


class DimensionTable:
    """Map from a grading key (bidegree or tridegree) to a dimension, with optional basis labels."""

    def __init__(self, axes: Sequence[str], name: str = ""):
        self.axes = tuple(axes)
        self.name = name
        self._dims: Dict[Key, int] = {}
        self._labels: Dict[Key, List[str]] = {}
        self._bases: Dict[Key, List[Any]] = {}

    def set(self, key: Key, dim: int, labels: Optional[List[str]] = None,
            basis: Optional[List[Any]] = None) -> None:
        key = tuple(key)
        if len(key) != len(self.axes):
            raise ValueError(f"key {key} does not match axes {self.axes}")
        if dim < 0:
            raise ValueError(f"negative dimension at {key}")
        self._dims[key] = dim
        if labels is not None:
            self._labels[key] = list(labels)
        if basis is not None:
            self._bases[key] = list(basis)

    def add(self, key: Key, dim: int = 1, label: Optional[str] = None) -> None:
        key = tuple(key)
        self.set(key, self._dims.get(key, 0) + dim)
        if label is not None:
            self._labels.setdefault(key, []).append(label)

    def __getitem__(self, key: Key) -> int:
        return self._dims.get(tuple(key), 0)

    def __contains__(self, key: Key) -> bool:
        return tuple(key) in self._dims

    def __iter__(self):
        return iter(sorted(self._dims))

    def __len__(self):
        return len(self._dims)

    def items(self) -> List[Tuple[Key, int]]:
        return [(k, self._dims[k]) for k in sorted(self._dims)]

    def nonzero(self) -> List[Tuple[Key, int]]:
        return [(k, d) for k, d in self.items() if d]

    def labels(self, key: Key) -> List[str]:
        return list(self._labels.get(tuple(key), []))

    def basis(self, key: Key) -> List[Any]:
        return list(self._bases.get(tuple(key), []))

    def total(self) -> int:
        return sum(self._dims.values())

    def project(self, axes: Sequence[str], mapping) -> "DimensionTable":
        """Sum dimensions along a key map (e.g. tridegree -> bidegree)."""
        projected = DimensionTable(axes, self.name)
        for key, dim in self.items():
            if dim:
                projected.add(mapping(key), dim)
                for label in self.labels(key):
                    projected._labels.setdefault(tuple(mapping(key)), []).append(label)
        return projected

    def mismatches(self, other: "DimensionTable",
                   keys: Optional[Iterable[Key]] = None) -> List[Dict[str, Any]]:
        """Cells where the two tables disagree (missing keys count as 0)."""
        if keys is None:
            keys = set(self._dims) | set(other._dims)
        failures = []
        for key in sorted(set(tuple(k) for k in keys)):
            if self[key] != other[key]:
                failures.append({"cell": list(key), "expected": other[key], "actual": self[key]})
        return failures

    def rows(self, with_labels: bool = True, skip_zero: bool = True) -> List[List[Any]]:
        out = []
        for key, dim in self.items():
            if skip_zero and not dim:
                continue
            row: List[Any] = list(key) + [dim]
            if with_labels:
                row.append(",".join(self.labels(key)))
            out.append(row)
        return out

    def to_tsv(self, with_labels: bool = True) -> str:
        header = list(self.axes) + ["dim"] + (["labels"] if with_labels else [])
        lines = ["\t".join(header)]
        for row in self.rows(with_labels):
            lines.append("\t".join(str(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "axes": list(self.axes),
            "cells": [dict(zip(list(self.axes) + ["dim", "labels"], row))
                      for row in self.rows(with_labels=True)],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def __repr__(self):
        return f"DimensionTable({self.name!r}, axes={self.axes}, cells={len(self)}, total={self.total()})"

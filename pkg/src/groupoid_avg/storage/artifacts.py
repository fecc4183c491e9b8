"""
Artifact storage for groupoid averaging runs.
Reads and writes groupoids, pseudo-representations, metrics, cochains, traces
and run reports as JSON and CSV files under one output directory.
"""

import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ..cohomology.cochains import Cochain0, Cochain1, Cochain2
from ..errors import ScenarioError
from ..groupoid.core import FiniteGroupoid
from ..linalg.fiber import FiberMetric, VectorBundle
from ..reps.iteration import ConvergenceTrace, TraceRecord
from ..reps.pseudorep import PseudoRep

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRACE_FIELDS = ["i", "b", "r", "step", "quad_slack"]


def matrices_to_json(matrices: Sequence[np.ndarray]) -> List[Any]:
    """Row-major nested lists, one entry per matrix."""
    return [np.asarray(m, dtype=float).tolist() for m in matrices]


def bundle_to_dict(bundle: VectorBundle) -> Dict[str, Any]:
    return {"dims": list(bundle.dims)}


def bundle_from_dict(data: Dict[str, Any]) -> VectorBundle:
    return VectorBundle(tuple(int(d) for d in data["dims"]))


def metric_to_dict(metric: FiberMetric) -> Dict[str, Any]:
    return {"kind": "gram", "matrices": matrices_to_json(metric.gram)}


def metric_from_dict(data: Dict[str, Any], bundle: VectorBundle) -> FiberMetric:
    kind = data.get("kind", "euclidean")
    if kind == "euclidean":
        return FiberMetric.euclidean(bundle)
    if kind == "gram":
        if len(data["matrices"]) != len(bundle.dims):
            raise ScenarioError(f"Metric has {len(data['matrices'])} Gram matrices for "
                                f"{len(bundle.dims)} objects")
        return FiberMetric([np.array(m, dtype=float).reshape(d, d) for m, d in zip(data["matrices"], bundle.dims)])
    raise ScenarioError(f"Unknown metric kind '{kind}'")


def rep_to_dict(rep: PseudoRep) -> Dict[str, Any]:
    return {"bundle": bundle_to_dict(rep.bundle), "rep": {"matrices": matrices_to_json(rep.maps)}}


def rep_from_dict(data: Dict[str, Any], groupoid: FiniteGroupoid,
                  bundle: Optional[VectorBundle] = None) -> PseudoRep:
    """Accepts {"rep": {"matrices": ...}} or the inner {"matrices": ...} object."""
    inner = data.get("rep", data)
    if bundle is None:
        bundle = bundle_from_dict(data["bundle"]) if "bundle" in data else \
            VectorBundle.constant(groupoid.n_objects, 1)
    matrices = inner["matrices"]
    if len(matrices) != groupoid.n_arrows:
        raise ScenarioError(f"Representation has {len(matrices)} matrices for {groupoid.n_arrows} arrows")
    maps = []
    for a, m in enumerate(matrices):
        rows, cols = bundle.dims[groupoid.target[a]], bundle.dims[groupoid.source[a]]
        arr = np.array(m, dtype=float)
        maps.append(arr.reshape(rows, cols) if arr.size == rows * cols else arr)
    return PseudoRep(groupoid, bundle, tuple(maps))


def cochain_to_dict(cochain: Union[Cochain0, Cochain1, Cochain2]) -> Dict[str, Any]:
    """One value per object / arrow / composable pair (pairs in lexicographic order)."""
    if isinstance(cochain, Cochain2):
        return {"degree": 2,
                "pairs": [list(p) for p in cochain.values],
                "values": [np.asarray(v).tolist() for v in cochain.values.values()]}
    degree = 0 if isinstance(cochain, Cochain0) else 1
    return {"degree": degree, "values": [np.asarray(v).tolist() for v in cochain.values]}


def cochain_from_dict(data: Dict[str, Any]) -> Union[Cochain0, Cochain1, Cochain2]:
    values = [np.array(v, dtype=float) for v in data["values"]]
    degree = int(data["degree"])
    if degree == 0:
        return Cochain0(tuple(values))
    if degree == 1:
        return Cochain1(tuple(values))
    if degree == 2:
        return Cochain2({(int(p[0]), int(p[1])): v for p, v in zip(data["pairs"], values)})
    raise ScenarioError(f"Unsupported cochain degree {degree}")


def _csv_value(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def _csv_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


class ArtifactStore:
    """
    Manages the files of averaging runs:
    - groupoid, representation, metric and cochain JSON files
    - convergence traces as CSV, with JSON summaries
    - run reports
    """

    def __init__(self, output_dir: Optional[PathLike] = None):
        """
        Args:
            output_dir: Directory for written artifacts. Defaults to ./runs
        """
        self.output_dir = Path(output_dir) if output_dir is not None else Path("runs")

    def path_for(self, name: PathLike) -> Path:
        """Absolute and explicitly relative paths are kept; bare names go under output_dir."""
        path = Path(name)
        if path.is_absolute() or path.parent != Path("."):
            return path
        return self.output_dir / path

    def write_json(self, name: PathLike, data: Dict[str, Any]) -> Path:
        path = self.path_for(name)
        os.makedirs(path.parent, exist_ok=True)
        with open(path, "w") as f:
            json.dump(data, f, indent=2)
        logger.debug("wrote %s", path)
        return path

    @staticmethod
    def read_json(path: PathLike) -> Dict[str, Any]:
        """Load a JSON file; decoding errors become ScenarioError with the line number."""
        path = Path(path)
        if not path.exists():
            raise ScenarioError("file not found", path=str(path))
        with open(path, "r") as f:
            text = f.read()
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioError(e.msg, path=str(path), line=e.lineno)

    # groupoids, representations, metrics, cochains

    def save_groupoid(self, groupoid: FiniteGroupoid, name: PathLike = "groupoid.json") -> Path:
        return self.write_json(name, groupoid.to_dict())

    def load_groupoid(self, path: PathLike) -> FiniteGroupoid:
        return FiniteGroupoid.from_dict(self.read_json(path))

    def save_rep(self, rep: PseudoRep, name: PathLike = "rep.json") -> Path:
        return self.write_json(name, rep_to_dict(rep))

    def load_rep(self, path: PathLike, groupoid: FiniteGroupoid,
                 bundle: Optional[VectorBundle] = None) -> PseudoRep:
        try:
            return rep_from_dict(self.read_json(path), groupoid, bundle)
        except KeyError as e:
            raise ScenarioError(f"missing key {e}", path=str(path))

    def save_metric(self, metric: FiberMetric, name: PathLike = "metric.json") -> Path:
        return self.write_json(name, {"bundle": bundle_to_dict(metric.bundle), "metric": metric_to_dict(metric)})

    def load_metric(self, path: PathLike) -> FiberMetric:
        data = self.read_json(path)
        try:
            return metric_from_dict(data["metric"], bundle_from_dict(data["bundle"]))
        except KeyError as e:
            raise ScenarioError(f"missing key {e}", path=str(path))

    def save_cochain(self, cochain: Union[Cochain0, Cochain1, Cochain2],
                     name: PathLike = "cochain.json") -> Path:
        return self.write_json(name, cochain_to_dict(cochain))

    def load_cochain(self, path: PathLike) -> Union[Cochain0, Cochain1, Cochain2]:
        try:
            return cochain_from_dict(self.read_json(path))
        except KeyError as e:
            raise ScenarioError(f"missing key {e}", path=str(path))

    # traces and reports

    def write_trace(self, trace: ConvergenceTrace, name: PathLike = "trace.csv") -> Path:
        """CSV with header i,b,r,step,quad_slack; empty cells where a value is undefined."""
        path = self.path_for(name)
        os.makedirs(path.parent, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=TRACE_FIELDS, lineterminator="\n")
            writer.writeheader()
            for rec in trace.records:
                writer.writerow({
                    "i": rec.i,
                    "b": _csv_value(rec.b),
                    "r": _csv_value(rec.r),
                    "step": _csv_value(rec.step),
                    "quad_slack": _csv_value(rec.quad_slack),
                })
        return path

    @staticmethod
    def read_trace(path: PathLike) -> List[TraceRecord]:
        path = Path(path)
        if not path.exists():
            raise ScenarioError("file not found", path=str(path))
        records = []
        with open(path, "r", newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != TRACE_FIELDS:
                raise ScenarioError(f"unexpected trace header {reader.fieldnames}", path=str(path), line=1)
            for row in reader:
                records.append(TraceRecord(i=int(row["i"]), b=float(row["b"]), r=float(row["r"]),
                                           step=_csv_float(row["step"]),
                                           quad_slack=_csv_float(row["quad_slack"])))
        return records

    def write_summary(self, trace: ConvergenceTrace, name: PathLike = "summary.json") -> Path:
        return self.write_json(name, trace.summary())

    def load_trace(self, csv_path: PathLike, summary_path: PathLike) -> ConvergenceTrace:
        summary = self.read_json(summary_path)
        return ConvergenceTrace(records=self.read_trace(csv_path), epsilon=summary["epsilon"],
                                b0=summary["b0"], r0=summary["r0"],
                                certified=summary.get("certified", True),
                                terminated_reason=summary["reason"])

    def write_report(self, report: Dict[str, Any], name: PathLike = "report.json") -> Path:
        return self.write_json(name, report)

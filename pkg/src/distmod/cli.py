"""Batch command-line runner.

Subcommands build a graph, a distance matrix, powers, and a kernel from
flags, run one analysis, and write all artifacts plus the exact run
configuration into the output directory. Nothing is written until the
computation has finished, so a failed run leaves no partial artifacts, and
``replay`` re-executes a stored configuration to reproduce a directory
byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distances import (
    DistanceMatrix,
    distance_from_adjacency_rows,
    distance_from_attributes,
    distance_hop,
    load_distance_file,
)
from .errors import DistModError, ValidationError
from .graph import Graph, NodeAttributes, drop_isolated_nodes, load_attributes, load_edge_list
from .multiscale import sigma_grid, sweep
from .nullmodel import (
    DistanceFunction,
    build_null_matrix,
    learn_distance_function,
    make_power_spec,
    modularity_matrix,
)
from .optimize import OptimizerConfig, louvain_optimize
from .sampling import sample_null_graphs, write_sample_summary

__all__ = ["RunConfig", "main", "run_config_from_args"]


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run; stored verbatim in the output.

    The output directory itself is intentionally not part of the record, so
    a replay into a fresh directory produces byte-identical artifacts.
    """

    command: str
    edges: str
    attrs: str | None = None
    distances: str | None = None
    distance_source: str = "hops"
    metric: str = "euclidean"
    power: str = "degree"
    power_file: str | None = None
    f: str = "gauss"
    sigma: float | None = None
    bins: int = 10
    seed: int = 0
    max_passes: int = 100
    sweep_order: str = "shuffle"
    grid: int = 10
    grid_scale: str = "log"
    count: int = 100
    drop_isolated: bool = False

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown run-config keys: {sorted(unknown)}")
        return cls(**data)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fmt(x: float) -> str:
    return repr(float(x))


def _load_graph(cfg: RunConfig) -> tuple[Graph, NodeAttributes | None]:
    g = load_edge_list(cfg.edges)
    attrs = load_attributes(cfg.attrs, g) if cfg.attrs else None
    if cfg.drop_isolated:
        g, attrs, _ = drop_isolated_nodes(g, attrs)
    return g, attrs


def _build_distances(cfg: RunConfig, g: Graph, attrs: NodeAttributes | None) -> DistanceMatrix:
    source = cfg.distance_source
    if source == "hops":
        return distance_hop(g)
    if source == "rows":
        if cfg.metric not in ("euclidean", "jaccard"):
            raise ValidationError(f"row distances support euclidean or jaccard, not {cfg.metric!r}")
        return distance_from_adjacency_rows(g, cfg.metric)
    if source == "attrs":
        if attrs is None:
            raise ValidationError("--distance-source attrs needs --attrs")
        if cfg.metric == "euclidean":
            order = 2.0
        elif cfg.metric == "manhattan":
            order = 1.0
        elif cfg.metric.startswith("minkowski:"):
            order = float(cfg.metric.split(":", 1)[1])
        else:
            raise ValidationError(f"attribute distances support euclidean, manhattan, or minkowski:R, not {cfg.metric!r}")
        return distance_from_attributes(attrs, order)
    if source == "file":
        if not cfg.distances:
            raise ValidationError("--distance-source file needs --distances")
        return load_distance_file(cfg.distances, g.n, g.node_labels)
    raise ValidationError(f"unknown distance source {source!r}")


def _load_power_file(path: str, g: Graph) -> np.ndarray:
    index = g.label_index
    raw = np.full(g.n, np.nan)
    with open(path, "r", encoding="utf-8") as stream:
        for lineno, line in enumerate(stream, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ValidationError(f"power file line {lineno}: expected 'label value'")
            if parts[0] not in index:
                continue
            raw[index[parts[0]]] = float(parts[1])
    if np.isnan(raw).any():
        missing = int(np.flatnonzero(np.isnan(raw))[0])
        labels = g.node_labels or tuple(str(i) for i in range(g.n))
        raise ValidationError(f"power file is missing node {labels[missing]!r}")
    return raw


def _build_powers(cfg: RunConfig, g: Graph, attrs: NodeAttributes | None):
    if cfg.power in ("degree", "uniform"):
        return make_power_spec(g, cfg.power)
    if cfg.power.startswith("attr:"):
        if attrs is None:
            raise ValidationError("--power attr:COL needs --attrs")
        return make_power_spec(g, "attribute", attrs.column(cfg.power.split(":", 1)[1]))
    if cfg.power == "file":
        if not cfg.power_file:
            raise ValidationError("--power file needs --power-file")
        return make_power_spec(g, "explicit", _load_power_file(cfg.power_file, g))
    raise ValidationError(f"unknown power kind {cfg.power!r}")


def _parse_kernel_flag(flag: str) -> tuple[str, float]:
    kind, _, suffix = flag.partition(":")
    exponent = float(suffix) if suffix else 2.0
    return kind, exponent


def _build_kernel(cfg: RunConfig, g: Graph, dmat: DistanceMatrix) -> DistanceFunction:
    kind, exponent = _parse_kernel_flag(cfg.f)
    if kind in ("gauss", "rational", "window") and cfg.sigma is None:
        raise ValidationError(f"--f {kind} needs --sigma")
    if kind == "gauss":
        return DistanceFunction.gaussian(cfg.sigma, exponent)
    if kind == "rational":
        return DistanceFunction.rational(cfg.sigma, exponent)
    if kind == "window":
        return DistanceFunction.window(cfg.sigma)
    if kind == "constant":
        return DistanceFunction.constant()
    if kind == "learned":
        return learn_distance_function(g, dmat, cfg.bins)
    raise ValidationError(f"unknown kernel {cfg.f!r}")


def _optimizer_config(cfg: RunConfig) -> OptimizerConfig:
    return OptimizerConfig(seed=cfg.seed, max_passes=cfg.max_passes, sweep_order=cfg.sweep_order)


def _partition_json(partition, q: float, sigma, spec, seed: int) -> str:
    return _json_text(
        {
            "labels": [int(x) for x in partition.labels],
            "q": q,
            "sigma": sigma,
            "spec": spec,
            "seed": seed,
        }
    )


def _matrix_csv(matrix: np.ndarray, labels) -> str:
    lines = [",".join(labels)]
    for row in matrix:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _write_artifacts(out: str, artifacts: dict[str, str]) -> None:
    root = Path(out)
    for rel, content in artifacts.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")


def cmd_detect(cfg: RunConfig, out: str) -> int:
    g, attrs = _load_graph(cfg)
    dmat = _build_distances(cfg, g, attrs)
    powers = _build_powers(cfg, g, attrs)
    kernel = _build_kernel(cfg, g, dmat)
    nm = build_null_matrix(powers, dmat, kernel)
    result = louvain_optimize(g, nm, _optimizer_config(cfg))
    trace_lines = [
        json.dumps(
            {
                "level": rec.level,
                "supernodes": rec.supernodes,
                "communities": rec.communities,
                "q": rec.q,
                "gain_residual": rec.gain_residual,
            },
            sort_keys=True,
        )
        for rec in result.levels
    ]
    artifacts = {
        "run_config.json": cfg.to_json(),
        "partition.json": _partition_json(result.partition, result.q, cfg.sigma, nm.config, cfg.seed),
        "audit.json": _json_text(nm.audit()),
        "trace.jsonl": "\n".join(trace_lines) + "\n",
    }
    _write_artifacts(out, artifacts)
    return 0


def cmd_nullmodel(cfg: RunConfig, out: str) -> int:
    g, attrs = _load_graph(cfg)
    dmat = _build_distances(cfg, g, attrs)
    powers = _build_powers(cfg, g, attrs)
    kernel = _build_kernel(cfg, g, dmat)
    nm = build_null_matrix(powers, dmat, kernel)
    labels = g.node_labels or tuple(str(i) for i in range(g.n))
    artifacts = {
        "run_config.json": cfg.to_json(),
        "null_matrix.csv": _matrix_csv(nm.p, labels),
        "modularity_matrix.csv": _matrix_csv(modularity_matrix(g, nm), labels),
        "audit.json": _json_text(nm.audit()),
    }
    _write_artifacts(out, artifacts)
    return 0


def cmd_sweep(cfg: RunConfig, out: str) -> int:
    g, attrs = _load_graph(cfg)
    dmat = _build_distances(cfg, g, attrs)
    powers = _build_powers(cfg, g, attrs)
    kind, exponent = _parse_kernel_flag(cfg.f)
    kernel_kind = {"gauss": "gaussian", "rational": "rational", "window": "window"}.get(kind)
    if kernel_kind is None:
        raise ValidationError(f"sweep needs a sigma-parameterized kernel (gauss/rational/window), got {cfg.f!r}")
    grid = sigma_grid(dmat, cfg.grid, cfg.grid_scale)
    result = sweep(g, dmat, powers, kernel_kind, grid, _optimizer_config(cfg), exponent=exponent)

    rows = ["sigma,q,c,nmi_prev,nmi_ng"]
    for rec in result.records:
        prev = "" if rec.nmi_prev is None else _fmt(rec.nmi_prev)
        rows.append(f"{_fmt(rec.sigma)},{_fmt(rec.q)},{rec.communities},{prev},{_fmt(rec.nmi_reference)}")
    artifacts = {
        "run_config.json": cfg.to_json(),
        "sweep.csv": "\n".join(rows) + "\n",
        "partitions/reference.json": _partition_json(
            result.reference_partition, result.reference_q, None, {"power": cfg.power, "f": {"kind": "constant"}}, cfg.seed
        ),
    }
    for idx, rec in enumerate(result.records):
        spec = {"power": cfg.power, "f": {"kind": kernel_kind, "sigma": rec.sigma, "exponent": exponent}}
        artifacts[f"partitions/record_{idx:03d}.json"] = _partition_json(
            rec.partition, rec.q, rec.sigma, spec, cfg.seed
        )
    _write_artifacts(out, artifacts)
    return 0


def cmd_sample(cfg: RunConfig, out: str) -> int:
    g, attrs = _load_graph(cfg)
    dmat = _build_distances(cfg, g, attrs)
    powers = _build_powers(cfg, g, attrs)
    kernel = _build_kernel(cfg, g, dmat)
    nm = build_null_matrix(powers, dmat, kernel)
    batch = sample_null_graphs(nm, cfg.count, seed=cfg.seed)
    buf = io.StringIO()
    write_sample_summary(batch, buf)
    artifacts = {
        "run_config.json": cfg.to_json(),
        "samples.csv": buf.getvalue(),
    }
    _write_artifacts(out, artifacts)
    return 0


_COMMANDS = {
    "detect": cmd_detect,
    "nullmodel": cmd_nullmodel,
    "sweep": cmd_sweep,
    "sample": cmd_sample,
}


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        edges=args.edges,
        attrs=args.attrs,
        distances=args.distances,
        distance_source=args.distance_source,
        metric=args.metric,
        power=args.power,
        power_file=args.power_file,
        f=args.f,
        sigma=args.sigma,
        bins=args.bins,
        seed=args.seed,
        max_passes=args.max_passes,
        sweep_order=args.sweep_order,
        grid=args.grid,
        grid_scale=args.grid_scale,
        count=args.count,
        drop_isolated=args.drop_isolated,
    )


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--edges", required=True, help="edge-list file: 'src dst [multiplicity]' per line")
    parser.add_argument("--attrs", default=None, help="node attribute CSV (id column first)")
    parser.add_argument("--distances", default=None, help="distance CSV for --distance-source file")
    parser.add_argument("--distance-source", default="hops", choices=("rows", "hops", "attrs", "file"))
    parser.add_argument("--metric", default="euclidean", help="euclidean, manhattan, minkowski:R, or jaccard")
    parser.add_argument("--power", default="degree", help="degree, uniform, attr:COL, or file")
    parser.add_argument("--power-file", default=None, help="'label value' lines for --power file")
    parser.add_argument("--f", default="gauss", help="gauss[:R], rational[:R], constant, window, or learned")
    parser.add_argument("--sigma", type=float, default=None, help="field range for gauss/rational/window")
    parser.add_argument("--bins", type=int, default=10, help="bin count for --f learned")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-passes", type=int, default=100)
    parser.add_argument("--sweep-order", default="shuffle", choices=("shuffle", "index"))
    parser.add_argument("--grid", type=int, default=10, help="sigma grid size (sweep)")
    parser.add_argument("--grid-scale", default="log", choices=("log", "linear"))
    parser.add_argument("--count", type=int, default=100, help="sample count (sample)")
    parser.add_argument("--drop-isolated", action="store_true", help="drop zero-degree nodes before analysis")
    parser.add_argument("--out", required=True, help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distmod", description="Distance-aware modularity analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, summary in (
        ("detect", "detect communities and write the partition"),
        ("nullmodel", "export the null and modularity matrices"),
        ("sweep", "run detection over a sigma grid"),
        ("sample", "draw random graphs from the null model"),
    ):
        _add_common_flags(sub.add_parser(name, help=summary))
    replay = sub.add_parser("replay", help="re-run a stored run_config.json")
    replay.add_argument("config", help="path to a run_config.json")
    replay.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            cfg = RunConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
            handler = _COMMANDS.get(cfg.command)
            if handler is None:
                raise ValidationError(f"stored config has unknown command {cfg.command!r}")
            return handler(cfg, args.out)
        cfg = run_config_from_args(args)
        return _COMMANDS[args.command](cfg, args.out)
    except (DistModError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

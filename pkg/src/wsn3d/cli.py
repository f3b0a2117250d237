"""Command-line entry point: ``wsn3d {terrain,embed,deploy,breach,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import gridio
from .breach import build_contour_graph, optimal_breach
from .errors import Wsn3dError
from .harness import AXES, ExperimentConfig, emit, sweep
from .manifold import DEFAULT_REG, embed_terrain
from .sensing import SensingMap, SensingModel, deploy_uniform, sensing_map
from .terrain import random_terrain
from .watershed import contours_of

log = logging.getLogger("wsn3d")


def _size(text: str) -> tuple[int, int]:
    try:
        length, width = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LxW, got {text!r}")
    return length, width


def cmd_terrain(args) -> int:
    length, width = args.size
    terrain = random_terrain(
        args.seed, args.peaks, length, width, args.rho, args.eta, (args.omega_min, args.omega_max)
    )
    gridio.write_terrain(args.out, terrain)
    log.info("wrote %dx%d terrain to %s", length, width, args.out)
    return 0


def cmd_embed(args) -> int:
    terrain = gridio.read_terrain(args.terrain)
    emb = embed_terrain(terrain, args.k, args.reg, args.scale)
    gridio.write_embedding(args.out, emb)
    log.info("embedded %d points (k=%d) to %s", emb.n, args.k, args.out)
    return 0


def cmd_deploy(args) -> int:
    emb = gridio.read_embedding(args.embedding)
    model = SensingModel(
        alpha=args.alpha, beta=args.beta, a=args.cost_factor,
        d_r=None if args.dr <= 0 else args.dr, cost_mode=args.cost_mode,
    )
    dep = deploy_uniform(args.seed, args.count, emb)
    smap = sensing_map(model, emb, dep)
    gridio.write_grid(args.out, smap.grid(), args.seed)
    if args.nodes_out:
        Path(args.nodes_out).write_text("".join(f"{p}\n" for p in dep.node_points))
    return 0


def cmd_breach(args) -> int:
    probs, seed = gridio.read_grid(args.map)
    smap = SensingMap(probs.ravel(), None, None, probs.shape)
    ws = contours_of(smap, args.levels, args.connectivity)
    if args.labels_out:
        gridio.write_labels(args.labels_out, ws.labels, seed)
    result = optimal_breach(build_contour_graph(ws, smap))
    text = json.dumps(result.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweep(args) -> int:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    if args.axis and args.axis != data.get("axis"):
        # grid values in the file belong to the file's own axis
        data["axis"] = args.axis
        data["values"] = []
    if args.fresh_terrain:
        data["fresh_terrain"] = True
    if args.unsafe:
        data["unsafe"] = True
    if args.trials is not None:
        data["trials"] = args.trials
    cfg = ExperimentConfig.from_dict(data)
    result = sweep(cfg, jobs=args.jobs)
    for path in emit(result, args.out):
        log.info("wrote %s", path)
    for pt in result.points:
        print(f"{cfg.axis}={pt.value}: p_opt={pt.mean_p_opt:.4f} coverage={pt.mean_coverage:.4f} failures={pt.failures}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsn3d", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("terrain", help="generate a multi-peak terrain grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--peaks", type=int, default=20)
    p.add_argument("--size", type=_size, default=(50, 50))
    p.add_argument("--rho", type=float, default=1000.0)
    p.add_argument("--eta", type=float, default=4.0)
    p.add_argument("--omega-min", type=float, default=1.0)
    p.add_argument("--omega-max", type=float, default=100.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_terrain)

    p = sub.add_parser("embed", help="reduce a terrain to the plane with LLE")
    p.add_argument("--terrain", required=True)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--reg", type=float, default=DEFAULT_REG)
    p.add_argument("--scale", choices=("metric", "unit", "none"), default="metric")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("deploy", help="deploy sensors and write the sensing map")
    p.add_argument("--embedding", required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--beta", type=float, default=0.3)
    p.add_argument("--cost-factor", type=float, default=4.0)
    p.add_argument("--dr", type=float, default=10.0, help="sensing radius; <= 0 disables it")
    p.add_argument("--cost-mode", choices=("slope", "printed"), default="slope")
    p.add_argument("--nodes-out", help="optional file listing the chosen point indices")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_deploy)

    p = sub.add_parser("breach", help="watershed a sensing map and find the breach path")
    p.add_argument("--map", required=True)
    p.add_argument("--levels", type=int, default=256)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    p.add_argument("--labels-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_breach)

    p = sub.add_parser("sweep", help="run a seeded parameter sweep")
    p.add_argument("--config")
    p.add_argument("--axis", choices=AXES)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--trials", type=int)
    p.add_argument("--fresh-terrain", action="store_true")
    p.add_argument("--unsafe", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (Wsn3dError, OSError, ValueError) as exc:
        log.error("error: %s", exc)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

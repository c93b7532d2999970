"""Command-line entry point: ``ftgcl gen-views | train | eval | demo-barbell``."""
import argparse
import json
import logging
import os
import sys

import numpy as np

from . import views as views_mod
from .encoder import embed
from .errors import FtgclError, InvalidArgument, NotFound
from .evaluate import edge_homophily, link_pred_eval, logistic_probe, random_split, split_edges
from .graph import Dataset, barbell, load_dataset
from .topo import egonets, nystrom_embed, save_embedding, structural_embedding
from .train import TrainConfig, load_checkpoint, save_checkpoint, train

log = logging.getLogger("ftgcl")


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _holdout(dataset, seed):
    graph, edge_sets = split_edges(dataset.graph, 0.05, 0.10, seed)
    return Dataset(graph, dataset.features, dataset.labels, dict(dataset.splits)), edge_sets


def cmd_gen_views(args):
    ds = load_dataset(args.data)
    os.makedirs(args.out, exist_ok=True)
    fpg = views_mod.rank_neighbors(ds.features, args.kmax, views_mod.FEATURE)
    m = min(args.basis, ds.graph.n)
    emb = structural_embedding(
        ds.graph, m=m, t=args.wl_iters, extractor=args.subgraph, gamma=args.gamma,
        walk_len=args.walk_len, radius=args.radius, seed=args.seed,
    )
    tpg = views_mod.rank_neighbors(emb.R, args.kmax, views_mod.TOPOLOGY)
    views_mod.save_ranking(fpg, os.path.join(args.out, "fpg.tsv"))
    views_mod.save_ranking(tpg, os.path.join(args.out, "tpg.tsv"))
    save_embedding(emb, os.path.join(args.out, "topo_embedding.csv"))
    _write_json(os.path.join(args.out, "views.json"), {
        "k_max": args.kmax, "gamma": args.gamma, "walk_len": args.walk_len, "basis": m,
        "wl_iters": args.wl_iters, "subgraph": args.subgraph, "seed": args.seed,
    })
    return 0


_OVERRIDES = {
    "kmax": "k_max", "d": "d", "d_prime": "d_prime", "lr": "lr", "tau": "tau",
    "weight_decay": "weight_decay", "activation": "activation", "iterations": "iterations",
    "seed": "seed",
}


def _config(args):
    raw = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    for flag, name in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            raw[name] = value
    return TrainConfig.from_dict(raw)


def _load_views(views_dir, k_max):
    rankings = []
    for name in ("fpg.tsv", "tpg.tsv"):
        path = os.path.join(views_dir, name)
        if not os.path.isfile(path):
            raise NotFound(f"missing {path}")
        r = views_mod.load_ranking(path)
        if r.k_max < k_max:
            raise InvalidArgument(f"{path} holds {r.k_max} neighbors per node; config asks for k_max={k_max}")
        if r.k_max > k_max:
            r = views_mod.NeighborRanking(
                r.neighbors[:, :k_max], r.similarities[:, :k_max],
                np.minimum(r.lengths, k_max), r.space, k_max,
            )
        rankings.append(r)
    return rankings


def cmd_train(args):
    ds = load_dataset(args.data)
    cfg = _config(args)
    if args.holdout_seed is not None:
        ds, _ = _holdout(ds, args.holdout_seed)
    fpg = tpg = None
    if args.views:
        if args.holdout_seed is not None:
            log.warning("precomputed views were built on the full graph; topology view may leak held-out edges")
        fpg, tpg = _load_views(args.views, cfg.k_max)
    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    log_path = os.path.join(out_dir, "train_log.jsonl")
    with open(log_path, "w", encoding="utf-8") as fh:
        def emit(rec):
            fh.write(json.dumps(rec) + "\n")

        result = train(ds, cfg, args.variant, fpg, tpg, on_step=emit)
    save_checkpoint(result.state, args.out)
    return 0


def _split_indices(ds, args):
    if args.splits:
        with open(args.splits, encoding="utf-8") as fh:
            raw = json.load(fh)
        splits = {k: np.asarray(v, dtype=np.int64) for k, v in raw.items()}
    elif ds.splits:
        splits = ds.splits
    else:
        splits = random_split(ds.graph.n, labels=ds.labels, seed=args.seed)
    if "train" not in splits or "test" not in splits:
        raise InvalidArgument("splits must define 'train' and 'test'")
    return splits


def cmd_eval(args):
    ds = load_dataset(args.data)
    metrics = {
        "task": args.task, "accuracy": None, "macro_f1": None, "auc": None, "ap": None,
        "homophily": None, "seed": args.seed, "split": None,
    }
    if args.task in ("classify", "linkpred") and not args.ckpt:
        raise InvalidArgument(f"--ckpt is required for task {args.task}")
    if args.task == "homophily":
        if ds.labels is None:
            raise InvalidArgument("homophily needs labels.txt")
        metrics["homophily"] = edge_homophily(ds.graph, ds.labels)
        metrics["edge_counting"] = "undirected edges once" if not ds.graph.directed else "one per directed edge"
        if args.views:
            k = args.k or None
            for name in ("fpg.tsv", "tpg.tsv"):
                r = views_mod.load_ranking(os.path.join(args.views, name))
                view = views_mod.materialize_view(r, ds.features, k or r.k_max)
                metrics[f"homophily_{r.space}"] = edge_homophily(view.graph, ds.labels)
            metrics["view_k"] = k or r.k_max
            metrics["view_edge_counting"] = "one per directed edge"
    elif args.task == "classify":
        if ds.labels is None:
            raise InvalidArgument("classification needs labels.txt")
        state = load_checkpoint(args.ckpt)
        splits = _split_indices(ds, args)
        Z = embed(state.encoder, ds.graph, ds.features)
        acc, f1 = logistic_probe(Z, ds.labels, splits["train"], splits["test"], l2=args.l2)
        metrics.update(accuracy=acc, macro_f1=f1, split="test")
    else:
        state = load_checkpoint(args.ckpt)
        holdout_seed = args.seed if args.holdout_seed is None else args.holdout_seed
        train_ds, edge_sets = _holdout(ds, holdout_seed)
        Z = embed(state.encoder, train_ds.graph, ds.features)
        auc, ap = link_pred_eval(Z, edge_sets["test_pos"], edge_sets["test_neg"])
        metrics.update(auc=auc, ap=ap, split="test", holdout_seed=holdout_seed)
    _write_json(args.out, metrics)
    return 0


def cmd_demo_barbell(args):
    g = barbell(args.m1, args.m2)
    emb = nystrom_embed(egonets(g, args.radius), g.n, args.wl_iters, rng=args.seed)
    save_embedding(emb, args.out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ftgcl", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-views", help="rank feature and topology neighbors")
    g.add_argument("--data", required=True)
    g.add_argument("--kmax", type=int, default=8)
    g.add_argument("--gamma", type=int, default=30)
    g.add_argument("--walk-len", type=int, default=10)
    g.add_argument("--basis", type=int, default=200)
    g.add_argument("--wl-iters", type=int, default=3)
    g.add_argument("--subgraph", choices=("walk", "egonet"), default="walk")
    g.add_argument("--radius", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_views)

    t = sub.add_parser("train", help="contrastive training")
    t.add_argument("--data", required=True)
    t.add_argument("--views")
    t.add_argument("--variant", choices=("ft", "f", "t", "ft-nl"), default="ft")
    t.add_argument("--config")
    t.add_argument("--out", required=True)
    t.add_argument("--holdout-seed", type=int, help="drop the link-prediction test edges before training")
    t.add_argument("--kmax", type=int)
    t.add_argument("--d", type=int)
    t.add_argument("--d-prime", type=int)
    t.add_argument("--lr", type=float)
    t.add_argument("--tau", type=float)
    t.add_argument("--weight-decay", type=float)
    t.add_argument("--activation", choices=("relu", "elu", "prelu"))
    t.add_argument("--iterations", type=int)
    t.add_argument("--seed", type=int)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="downstream evaluation")
    e.add_argument("--data", required=True)
    e.add_argument("--ckpt")
    e.add_argument("--task", choices=("classify", "linkpred", "homophily"), required=True)
    e.add_argument("--splits")
    e.add_argument("--views")
    e.add_argument("--k", type=int)
    e.add_argument("--l2", type=float, default=1e-3)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--holdout-seed", type=int)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("demo-barbell", help="local-topology coordinates of a barbell graph")
    b.add_argument("--m1", type=int, default=6)
    b.add_argument("--m2", type=int, default=2)
    b.add_argument("--radius", type=int, default=1)
    b.add_argument("--wl-iters", type=int, default=2)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="embedding.csv")
    b.set_defaults(func=cmd_demo_barbell)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 2 on usage errors, 0 for --help
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (FtgclError, OSError, json.JSONDecodeError) as exc:
        print(f"ftgcl {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

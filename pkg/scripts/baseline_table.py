#!/usr/bin/env python3
"""Run the scripted baselines on fresh seeds and print a summary table.

The oracle rows anchor the top of the score range (they should sit at 1.0);
the random-proposal rows are the naive baseline that any communicating agent
ought to beat. Logs land under --out if given.
"""

import argparse

from parley.harness import RunConfig, run_selfplay

ROLES = {
    "matching": ("agent-0", "agent-1"),
    "itinerary": ("user", "assistant"),
    "mediation": ("user-0", "user-1", "assistant"),
}


def endpoints(task, kind, seed0=0):
    if kind == "oracle":
        return {r: "oracle" for r in ROLES[task]}
    return {r: f"random:{seed0 + i}" for i, r in enumerate(ROLES[task])}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--episodes", type=int, default=50)
    ap.add_argument("--start-seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    seeds = list(range(args.start_seed, args.start_seed + args.episodes))
    print(f"{'task':<12}{'agent':<10}{'episodes':>9}{'mean':>9}{'sem':>9}{'words':>9}")
    for task in ROLES:
        for kind in ("random", "oracle"):
            out_dir = f"{args.out}/{task}-{kind}" if args.out else None
            cfg = RunConfig(task=task, seeds=seeds, endpoints=endpoints(task, kind),
                            out_dir=out_dir)
            s = run_selfplay(cfg)
            mean = f"{s.score_mean:.3f}" if s.score_mean is not None else "-"
            sem = f"{s.score_sem:.3f}" if s.score_sem is not None else "-"
            words = f"{s.words_mean:.1f}" if s.words_mean is not None else "-"
            print(f"{task:<12}{kind:<10}{s.terminated:>9}{mean:>9}{sem:>9}{words:>9}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Reference external agent speaking the bridge wire format over stdio.

Reads one action-request JSON object per line and answers with one reply
line. This mirrors what an LLM wrapper would do; here the policy is the
random baseline plus a demo search call, so the bridge path can be exercised
end to end:

    parley selfplay --task itinerary --agent assistant="cmd:python3 scripts/stdio_agent.py"
"""

import json
import sys

import numpy as np


def decide(req: dict, rng: np.random.Generator) -> dict:
    legal = req.get("legal", [])
    view = req.get("view", {})
    if "accept" in legal:
        return {"type": "action", "kind": "accept"}
    if "propose" in legal:
        task = view.get("task")
        if task == "itinerary" and req.get("search_result") is None:
            return {"type": "search", "query": "Search(fields=[name, price], sort_by=[price])"}
        if task == "matching":
            perm = rng.permutation(view["k"]).tolist()
            return {"type": "action", "kind": "propose",
                    "proposal": {"kind": "matching",
                                 "reviewer_for_paper": [int(x) for x in perm]}}
        if task == "itinerary":
            names = [s["name"] for s in view["sites"]]
            picks = rng.choice(len(names), size=view["k"], replace=False)
            return {"type": "action", "kind": "propose",
                    "proposal": {"kind": "itinerary",
                                 "sites": [names[int(i)] for i in picks]}}
        if task == "mediation":
            flights = {f"user-{i}": int(rng.integers(0, len(u["flights"])))
                       for i, u in enumerate(view["users"])}
            return {"type": "action", "kind": "propose",
                    "proposal": {"kind": "mediation", "flights": flights}}
    recipient = "user-0" if view.get("task") == "mediation" and view.get("role") == "assistant" \
        else None
    return {"type": "action", "kind": "message", "recipient": recipient, "text": "ok"}


def main():
    rng = np.random.default_rng(0)
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        sys.stdout.write(json.dumps(decide(req, rng)) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()

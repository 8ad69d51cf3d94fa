"""Independent recomputation of the fixture statistics with exact fractions.

Usage: python3 oracle.py market_16.csv N1 N2 [TRAIN_ROWS]
"""
import csv
import sys
from fractions import Fraction


def load(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return rows


def main():
    path, n1, n2 = sys.argv[1], int(sys.argv[2]), int(sys.argv[3])
    rows = load(path)
    train = int(sys.argv[4]) if len(sys.argv) > 4 else len(rows)
    a = [Fraction(r["price"]) for r in rows]
    masks = []
    for t in range(n2, len(rows)):
        s1 = sum(a[t - n1 : t + 1]) / (n1 + 1)
        s2 = sum(a[t - n2 : t + 1]) / (n2 + 1)
        bits = [a[t] >= s1, a[t] >= s2, s1 >= s2]
        for prefix in ("econ_", "pol_", "soc_"):
            bits.append(any(r == "1" for k, r in rows[t].items() if k.startswith(prefix)))
        masks.append(sum(1 << i for i, b in enumerate(bits) if b))
    print("masks", masks)

    # statistics over the training prefix only
    train_masks = masks[: max(0, train - n2)]
    incs = {}
    for k, m in enumerate(train_masks):
        t = k + n2
        incs.setdefault(m, []).append(a[t] - a[t - 1])
    means = {m: sum(v) / len(v) for m, v in incs.items()}
    print("train_masks", train_masks)
    for m in sorted(means):
        print("mean", m, means[m], float(means[m]), "count", len(incs[m]))
    policy = {m: (0b01 if v > 0 else 0b10 if v < 0 else 0) for m, v in means.items()}
    print("policy", {m: policy[m] for m in sorted(policy)})
    n = len(train_masks)
    p = {}
    for m in train_masks:
        p[m] = p.get(m, 0) + Fraction(1, n)
    print("p", {m: str(p[m]) for m in sorted(p)})
    pstar = {}
    for m in train_masks:
        x = policy[m] | (m << 2)
        pstar[x] = pstar.get(x, 0) + Fraction(1, n)
    print("pstar", {x: str(pstar[x]) for x in sorted(pstar)})
    ev = sum(pr * (means[x >> 2] * (1 if x & 1 else 0) - means[x >> 2] * (1 if x & 2 else 0)) for x, pr in pstar.items())
    print("E_pstar_V", ev, float(ev))


main()

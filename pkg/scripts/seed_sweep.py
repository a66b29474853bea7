"""Check the seeded acceptance bands over a range of seeds and report pass rates.

    python3 scripts/seed_sweep.py 0 90

The MH-distance run for m2 is skipped; it costs about 12 s per seed.
"""

import argparse

from gendiag.diagnostics import NearestNeighbor, psrf, run_generalized_diagnostic, standard_diagnostics
from gendiag.distances import Euclidean
from gendiag.samplers import X3, kl_binned, mh_draws, mh_run, occupancy, scenario


def check(seed):
    same = True
    for name in ("m3", "m4"):
        cs = mh_run(scenario(name, seed=seed))
        s = standard_diagnostics(cs)
        g = run_generalized_diagnostic(cs, Euclidean(), NearestNeighbor())
        same &= abs(g.ess - s.ess) / s.ess <= 0.10 and abs(g.psrf - s.psrf) <= 0.05
    d1, _ = mh_draws(scenario("m1", seed=seed))
    d2, _ = mh_draws(scenario("m2", seed=seed))
    return {
        "generalized=standard": same,
        "m1 PSRF>=1.2, m2 PSRF<=1.05": psrf(d1) >= 1.2 and psrf(d2) <= 1.05,
        "occupancy in [0.1, 0.2]": 0.10 <= occupancy(d2, -1, 1) <= 0.20,
        "KL ratio >= 3": kl_binned(X3, d2) / kl_binned(X3, d1) >= 3,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("start", type=int)
    ap.add_argument("stop", type=int)
    args = ap.parse_args()
    seeds = range(args.start, args.stop)
    totals, all_ok = {}, []
    for seed in seeds:
        res = check(seed)
        for k, v in res.items():
            totals[k] = totals.get(k, 0) + v
        if all(res.values()):
            all_ok.append(seed)
        print(seed, " ".join("ok" if v else "--" for v in res.values()), flush=True)
    for k, v in totals.items():
        print(f"{k:<30} {v}/{len(seeds)}")
    print("seeds passing all:", all_ok)


if __name__ == "__main__":
    main()

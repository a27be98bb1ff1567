"""Time the compiled and pure-Python kernels on the same inputs.

    python benchmarks/bench_kernels.py [--seconds 60] [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from masseur import _kernels_py
from masseur.admittance import AdmittanceParams
from masseur.contact import SkinModel
from masseur.techniques import PressParams, press_command

try:
    from masseur import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def press_inputs(seconds, adm, skin):
    t = np.arange(int(round(seconds / adm.T))) * adm.T
    cmds = [press_command(ti, PressParams(), skin) for ti in t.tolist()]
    f_d = np.array([c.f_d for c in cmds])
    ref = [np.array([getattr(c.ref, a) for c in cmds]) for a in ("x_e", "xd_e", "xdd_e")]
    return f_d, ref


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seconds", type=float, default=60.0, help="simulated time per call")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    adm, skin = AdmittanceParams(), SkinModel()
    f_d, (x, xd, xdd) = press_inputs(args.seconds, adm, skin)
    n = len(f_d)
    rng = np.random.default_rng(0)
    f_e = rng.uniform(0, 40, n)

    def loop(mod):
        return lambda: mod.force_loop(f_d, x, xd, xdd, x[0], 0.0, adm.m, adm.b, adm.sigma, adm.T,
                                      skin.k, skin.n, skin.c, False, 20.0, 7.33, 0.0015)

    def rollout(mod):
        return lambda: mod.admittance_rollout(f_e, f_d, adm.m, adm.b, adm.sigma, adm.T)

    backends = [("python", _kernels_py)] + ([("cython", _kernels_c)] if _kernels_c else [])
    print(f"{n} ticks per call, best of {args.repeat}")
    print(f"{'kernel':<12}{'backend':<10}{'seconds':>10}{'ticks/s':>14}")
    best = {}
    for kname, make in (("force_loop", loop), ("rollout", rollout)):
        for bname, mod in backends:
            s = min(timeit.repeat(make(mod), number=1, repeat=args.repeat))
            best[kname, bname] = s
            print(f"{kname:<12}{bname:<10}{s:>10.4f}{n / s:>14.3g}")
        if _kernels_c:
            print(f"{kname:<12}{'speedup':<10}{best[kname, 'python'] / best[kname, 'cython']:>10.1f}x")
    if not _kernels_c:
        print("compiled extension not built; only the Python backend was timed")


if __name__ == "__main__":
    main()

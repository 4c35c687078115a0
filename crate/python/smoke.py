"""Quick check of the Python bindings: generate, run, optimise, check, reduce."""

import json
from fractions import Fraction

import roldarp


def frac(s):
    return Fraction(s)


def main():
    inst, witness = roldarp.gen_fig1(6, "3", "1", "1/8")
    assert len(json.loads(inst)["requests"]) == 9
    assert isinstance(json.loads(witness), list)

    sbp, _ = roldarp.run_sbp(inst)
    assert frac(sbp) == Fraction(19, 8), sbp

    for seed in range(5):
        g = roldarp.gen_random(4, 5, seed, f=6)
        sbp, _ = roldarp.run_sbp(g)
        opt, sched = roldarp.optimal_offline(g)
        assert frac(opt) >= frac(sbp)
        report = json.loads(roldarp.check_bound(g, "thm4"))
        assert report["bound"] == "THM4" and report["holds"]
        b = roldarp.to_bipartite(g)
        assert frac(roldarp.optimal_offline(b)[0]) == frac(opt)

    try:
        roldarp.check_bound(roldarp.gen_random(4, 5, 0), "thm7")
    except ValueError as e:
        assert str(e).startswith("HYPOTHESIS_VIOLATED"), e
    else:
        raise AssertionError("expected a hypothesis error")

    print("python bindings ok")


if __name__ == "__main__":
    main()

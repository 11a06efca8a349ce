#!/usr/bin/env python3
"""Reference oracle for the numerical constants frozen in the test suite.

Recomputes collision products, dispersion bounds, schedule solves, and
iteration-count arithmetic with 50-digit mpmath floats and exact fractions,
entirely independent of the Rust implementation's double-precision tricks.
Run it and paste the printed values into the tests when they change.
"""

from fractions import Fraction
import math

import mpmath as mp

mp.mp.dps = 50

HALF = mp.mpf(1) / 2


def entropy(x):
    x = mp.mpf(x)
    if x == 0 or x == 1:
        return mp.mpf(0)
    return -x * mp.log(x, 2) - (1 - x) * mp.log(1 - x, 2)


def inv_entropy(y):
    """H^{-1}(y) on [0, 1/2], bisection to 1e-40."""
    y = mp.mpf(y)
    lo, hi = mp.mpf(0), HALF
    while hi - lo > mp.mpf("1e-40"):
        mid = (lo + hi) / 2
        if entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def lsa_p(i):
    return min(HALF, mp.mpf("1.6") * mp.log(i + 1, 2) / i)


def lsa_schedule(n):
    return [lsa_p(i) for i in range(1, n + 1)]


def theoretical_schedule(n, k):
    log2k = mp.log(k, 2)
    p = [HALF]
    for i in range(2, n + 1):
        delta = mp.mpf(i) / (i + log2k)
        raw = 16 / inv_entropy(delta) * mp.log(i, 2) / i
        p.append(min(HALF, raw, p[-1]))
    return p


def q(pvec, w, m):
    prod = mp.mpf(1)
    for j in range(m):
        x = 1 - 2 * pvec[j]
        prod *= HALF + HALF * x**w
    return prod


def r(pvec, w, m):
    return q(pvec, w, m) - mp.mpf(2) ** (-m)


def cs_closed(w, n, ell):
    return 2 * (8 * mp.e * mp.sqrt(mp.mpf(n) * ell) / w) ** w


def cs_tightened(w, n, ell):
    if w > n:
        return mp.mpf(0)
    return min(cs_closed(w, n, ell), mp.mpf(math.comb(n, w)), mp.mpf(2) ** ell)


def bound(pvec, m, n, k, kind):
    ell = int(mp.ceil(m + mp.log(k, 2)))
    coeff = cs_closed if kind == "closed" else cs_tightened
    total = 1 - mp.mpf(2) ** (-m)
    for w in range(1, ell + 1):
        total += coeff(w, n, ell) * r(pvec, w, m)
    return total


def find_qs(pvec, k, rho, kind):
    n = len(pvec)
    rho = mp.mpf(rho)
    last_fail = 0
    for m in range(1, n + 1):
        if bound(pvec, m, n, k, kind) > rho:
            last_fail = m
    if last_fail == n:
        return None
    return last_fail + 1


def solve_schedule(n, k, rho, qs, kind, tol=mp.mpf("1e-4")):
    """Greedy per-row bisection for the sparsest feasible schedule.

    Row i gets the smallest density in (0, min(1/2, p_{i-1})] keeping
    bound(i) <= rho; rows below qs and rows where even the cap fails stay
    at the cap.
    """
    rho = mp.mpf(rho)
    p = []
    saturated = 0
    for i in range(1, n + 1):
        cap = HALF if i == 1 else min(HALF, p[-1])

        def feasible(cand):
            trial = p + [cand]
            return bound(trial, i, n, k, kind) <= rho

        if i < qs:
            p.append(cap)
            continue
        if not feasible(cap):
            p.append(cap)
            saturated += 1
            continue
        lo, hi = mp.mpf(0), cap
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if feasible(mid):
                hi = mid
            else:
                lo = mid
        p.append(hi)
    return p, saturated


def improved_iterations(delta, p_fail=Fraction(9, 25)):
    """Smallest odd t with Pr[Binomial(t, p_fail) >= ceil(t/2)] <= delta."""
    delta = Fraction(delta)
    t = 1
    while True:
        need = (t + 1) // 2
        tail = sum(
            Fraction(math.comb(t, j)) * p_fail**j * (1 - p_fail) ** (t - j)
            for j in range(need, t + 1)
        )
        if tail <= delta:
            return t, tail
        t += 2


def s(x, digits=17):
    return mp.nstr(mp.mpf(x), digits)


def main():
    print("== collision products ==")
    quarter = [mp.mpf(1) / 4]
    print("q(2,1;[1/4])     =", s(q(quarter, 2, 1)))
    print("r(2,1;[1/4])     =", s(r(quarter, 2, 1)))
    print("q(3,4;dense)     =", s(q([HALF] * 4, 3, 4)))
    two = [HALF, mp.mpf(1) / 4]
    print("q(1,2;[1/2,1/4]) =", s(q(two, 1, 2)))
    print("r(1,2;[1/2,1/4]) =", s(r(two, 1, 2)))
    lsa64 = lsa_schedule(64)
    print("q(2,12;lsa64)    =", s(q(lsa64, 2, 12)))
    print("r(2,12;lsa64)    =", s(r(lsa64, 2, 12)))
    print("r(4,20;lsa64)    =", s(r(lsa64, 4, 20)))

    print("== closed-form pair bounds ==")
    for (w, n, ell) in [(1, 4, 2), (1, 1, 1), (3, 10, 5), (2, 64, 73)]:
        print(f"cs({w},{n},{ell}) =", s(cs_closed(w, n, ell)))

    print("== entropy ==")
    print("H(0.11)      =", s(entropy(mp.mpf("0.11"))))
    print("Hinv(1/2)    =", s(inv_entropy(HALF)))
    print("Hinv(1/4)    =", s(inv_entropy(mp.mpf(1) / 4)))

    print("== lsa schedule ==")
    for i in [1, 2, 11, 12, 13, 32, 64]:
        print(f"lsa p[{i}] =", s(lsa_p(i)))

    print("== theoretical schedule, k=512 ==")
    theo = theoretical_schedule(1000, 512)
    cross = next(i for i, v in enumerate(theo, 1) if v < HALF)
    print("first index below 1/2 =", cross)
    print("theo p[2]    =", s(theo[1]))
    print(f"theo p[{cross}] =", s(theo[cross - 1]))
    print("theo p[100]  =", s(theo[99]))
    print("theo p[1000] =", s(theo[999]))

    print("== dense dispersion, n=20, k=512 ==")
    dense = [HALF] * 20
    vals = [bound(dense, m, 20, 512, "closed") for m in range(1, 21)]
    print("max over m of bound =", s(max(vals)))
    print("bound(20)          =", s(vals[19]))

    print("== lsa(64) closed-form bounds, k=512, rho=1.1 ==")
    for m in [1, 11, 12, 13, 14, 20, 40, 64]:
        print(f"bound({m}) =", s(bound(lsa64, m, 64, 512, "closed"), 8))
    print("find_qs closed    =", find_qs(lsa64, 512, "1.1", "closed"))

    print("== lsa(64) tightened bounds, k=512, rho=1.1 ==")
    tvals = {m: bound(lsa64, m, 64, 512, "tightened") for m in range(1, 65)}
    print("bound(12) =", s(tvals[12]))
    print("bound(13) =", s(tvals[13]))
    print("bound(64) =", s(tvals[64]))
    print("max bound =", s(max(tvals.values())))
    print("find_qs tightened =", find_qs(lsa64, 512, "1.1", "tightened"))

    print("== solved schedule, n=64, k=512, rho=1.1, qs=1 ==")
    for kind in ["closed", "tightened"]:
        p, sat = solve_schedule(64, 512, "1.1", 1, kind)
        print(f"[{kind}] saturated rows =", sat)
        for i in [1, 2, 8, 16, 32, 64]:
            print(f"[{kind}] p[{i}] =", s(p[i - 1]))
        final = max(bound(p, m, 64, 512, kind) for m in range(1, 65))
        print(f"[{kind}] max bound over m =", s(final, 8))

    print("== improved iteration count, p_fail = 0.36 ==")
    t, tail = improved_iterations(Fraction(1, 10))
    print("t(delta=0.1) =", t, " tail =", float(tail))
    t2, tail2 = improved_iterations(Fraction(3, 4))
    print("t(delta=0.75) =", t2, " tail =", float(tail2))
    need = 10
    tail19 = sum(
        Fraction(math.comb(19, j)) * Fraction(9, 25) ** j * Fraction(16, 25) ** (19 - j)
        for j in range(need, 20)
    )
    print("tail at t=19 =", float(tail19))


if __name__ == "__main__":
    main()

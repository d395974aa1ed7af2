#!/usr/bin/env python3
"""Independent oracle for the ellcount test fixtures.

Everything here is computed without the Rust code: PARI/GP (via cypari2) for
reduction data, torsion, heights, periods and class groups; mpmath at 60
digits for the closed-form constants; plain integer brute force for the point
census. The output is frozen into crates/core/tests/fixtures/oracle.json.

    pip install cypari2 mpmath
    python3 tools/oracle/fixtures.py > crates/core/tests/fixtures/oracle.json
"""

import json
import math
from fractions import Fraction
from math import gcd, isqrt

import cypari2
import mpmath as mp

pari = cypari2.Pari()
mp.mp.dps = 60

CURVES = [
    [-1, 0], [0, 1], [-25, 0], [0, -2], [-2, 0], [2, 0], [0, 2], [1, 1],
    [-1, 1], [0, -1], [-4, 0], [4, 0], [0, 3], [-3, 3], [0, -27],
    [-43, 166], [-11, 14], [-2, 1], [-15, 22], [-36, 0], [0, 16],
    [0, -432], [-6, 9], [3, -2], [-7, 6], [-1386747, 368636886],
    [-219, 1654], [5, 0], [0, -7], [0, -8], [0, 8], [1, 0], [-59, 170],
    [0, 24], [33, 62], [-10, 8], [0, -54], [-625, 0],
]

KODAIRA = {1: "I0", 2: "II", 3: "III", 4: "IV", -1: "I0*", -2: "II*", -3: "III*", -4: "IV*"}


def kodaira(code):
    code = int(code)
    if code in KODAIRA:
        return KODAIRA[code]
    if code > 4:
        return "I%d" % (code - 4)
    return "I%d*" % (-code - 4)


def curve_record(a, b):
    E = pari.ellinit([a, b])
    g = pari.ellglobalred(E)
    N = int(g[0])
    Em = pari.ellminimalmodel(E)
    dmin = int(Em.disc())
    tors = pari.elltors(E)
    local = []
    disc = int(E.disc())
    for p in pari.factor(abs(disc))[0]:
        p = int(p)
        lr = pari.elllocalred(E, p)
        local.append({
            "prime": p,
            "kodaira": kodaira(lr[1]),
            "conductor_exponent": int(lr[0]),
            "min_disc_valuation": int(pari.valuation(dmin, p)),
            "tamagawa": int(lr[3]),
        })
    j = Fraction(str(E.j()))
    area = mp.mpf(str(pari("(E)->E.area")(Em)))
    # Faltings height of the global minimal model, then the stable version,
    # which replaces log|Delta_min| by log(denominator of j).
    h_min = -mp.log(area) / 2
    h_stable = h_min + (mp.log(j.denominator) - mp.log(abs(dmin))) / 12
    return {
        "a": a, "b": b,
        "discriminant": disc,
        "minimal_discriminant": dmin,
        "conductor": N,
        "torsion_order": int(tors[0]),
        "torsion_structure": [int(x) for x in tors[1]],
        "local": local,
        "faltings_minimal": float(h_min),
        "faltings_stable": float(h_stable),
    }


# --- canonical heights (PARI's ellheight is the x-coordinate normalisation;
# the projective-plane normalisation is 3/2 of it) --------------------------

HEIGHT_CURVES = [[-25, 0], [0, -2], [-2, 0], [0, 2], [1, 1], [-1, 1], [-3, 3],
                 [0, 3], [-7, 6], [-10, 8], [33, 62], [0, -7], [-6, 9], [5, 0]]


def height_points():
    """Every affine point of naive height <= 300 on the curves above."""
    out = []
    for a, b in HEIGHT_CURVES:
        for (m, e, n) in sorted(points_up_to(a, b, 300)):
            out.append(([a, b], [str(Fraction(m, e * e)), str(Fraction(n, e ** 3))]))
    return out


def height_record(ab, P):
    E = pari.ellinit(ab)
    hx = mp.mpf(str(pari.ellheight(E, [pari(P[0]), pari(P[1])])))
    return {"a": ab[0], "b": ab[1], "x": P[0], "y": P[1],
            "height_x": float(hx), "height": float(hx * 3 / 2)}


# --- brute-force census -------------------------------------------------------

def points_up_to(a, b, B):
    """All affine points with max(|m e|, |n|, e^3) <= B, x = m/e^2, y = n/e^3."""
    out = []
    e = 1
    while e ** 3 <= B:
        mmax = B // e
        for m in range(-mmax, mmax + 1):
            if gcd(m, e) != 1:
                continue
            rhs = m ** 3 + a * m * e ** 4 + b * e ** 6
            if rhs < 0:
                continue
            n = isqrt(rhs)
            if n * n != rhs or n > B:
                continue
            out.append((m, e, n))
            if n:
                out.append((m, e, -n))
        e += 1
    return out


def naive_height(m, e, n):
    return max(abs(m * e), abs(n), e ** 3)


def census_counts(a, b, grid, d):
    E = pari.ellinit([a, b])
    top = max(grid)
    pts = points_up_to(a, b, int(math.floor(top * math.exp(d))) + 1)
    hats = []
    for (m, e, n) in pts:
        P = [Fraction(m, e * e), Fraction(n, e ** 3)]
        h = float(mp.mpf(str(pari.ellheight(E, [pari(str(P[0])), pari(str(P[1]))])))) * 1.5
        hats.append((naive_height(m, e, n), h))
    rows = []
    for B in grid:
        N = 1 + sum(1 for (H, _) in hats if H <= B)
        Nhat = 1 + sum(1 for (_, h) in hats if h <= math.log(B))
        rows.append({"B": B, "N": N, "Nhat": Nhat})
    return rows


def zimmer_d(a, b):
    nu = 0.0
    terms = []
    if a != 0:
        terms.append(-math.log(abs(a)) / 2)
    if b != 0:
        terms.append(-math.log(abs(b)) / 3)
    if terms:
        nu = -min(0.0, min(terms))
    return nu, (3 * nu + 7 * math.log(2)) / 2


# --- constants ----------------------------------------------------------------

def constants_minus1_0():
    t, L, rho, n = 4, 1, 0, 1
    C1 = t + (mp.mpf(2) ** 11 * 104613 * (10 * n) ** mp.mpf(7.5) / mp.log(2) ** 5 + 5) * (30 * L + 2 * rho)
    c10 = 5 * (6 * L + 2 * rho)
    c11 = 2 * (1 + 1 / mp.log(13)) * (2 * L + 221456 * L * n + rho)
    C2 = t + c10 * c11
    C = max(C1, C2)
    d = (3 * 0 + 7 * n * mp.log(2)) / 2
    return {"C1": float(C1), "C2": float(C2), "c10": float(c10), "c11": float(c11),
            "C": float(C), "d": float(d), "Cprime": float((d + 1) * C)}


def petsche(lam, sigma, n):
    return lam / (mp.mpf(10) ** 15 * n ** 3 * sigma ** 6 * mp.log(104613 * n * sigma ** 2) ** 2)


def bounded_degree(c0, f, g):
    target = mp.mpf(f) ** (g + mp.mpf(1) / 2) * mp.log(f) ** g
    lo = max(mp.mpf(c0), (17 * mp.mpf(f)) ** (mp.mpf(2) / 3), mp.e ** 2)
    phi = lambda c: 2 * mp.sqrt(c) / (3 * mp.log(c))
    if phi(lo) > target:
        return lo
    hi = lo * 2
    while phi(hi) <= target:
        hi *= 2
    for _ in range(400):
        mid = (lo + hi) / 2
        if phi(mid) > target:
            hi = mid
        else:
            lo = mid
    return hi


def epsilon_threshold(eps, g):
    eps = mp.mpf(eps)
    f = lambda D: eps * mp.log(D) - 2 * g * mp.log(mp.log(D))
    dstar = mp.e ** (2 * g / eps)
    if dstar <= 3 or f(dstar) >= 0:
        # failing set is empty beyond 3 except possibly below dstar
        M = 3
        D = 3
        while D < max(dstar, 3) + 2 and D < 10 ** 6:
            if f(D) < 0:
                M = D + 1
            D += 1
        return int(M)
    lo, hi = dstar, dstar * 2
    while f(hi) < 0:
        hi *= 2
    for _ in range(2000):
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    M = int(mp.ceil(lo))
    while f(M) < 0:
        M += 1
    while M - 1 >= 3 and f(M - 1) >= 0:
        M -= 1
    return M


def phi_max_grid(gamma, lo, hi, samples=100000):
    best_x, best = lo, -mp.inf
    for i in range(samples + 1):
        x = lo + (hi - lo) * i / samples
        v = x * (math.log(gamma) - math.log(x * math.log(x)))
        if v > best:
            best, best_x = v, x
    return best_x, best


def class_groups(limit):
    out = []
    for D in range(-limit, limit + 1):
        if D in (0, 1) or not int(pari.isfundamental(D)):
            continue
        cl = pari.quadclassunit(D)
        out.append({"D": D, "h": int(cl[0]), "cyc": [int(x) for x in cl[1]]})
    return out


def main():
    curves = [curve_record(a, b) for a, b in CURVES]
    heights = [height_record(ab, P) for ab, P in height_points()]

    census = {}
    e_e = math.exp(math.e)
    for (a, b) in ([-1, 0], [0, 1], [-25, 0], [-2, 1], [-7, 6]):
        E = pari.ellinit([a, b])
        H0 = abs(int(pari.ellminimalmodel(E).disc())) ** 0.25
        grid = [e_e * k for k in range(1, 11) if H0 <= e_e * k <= 1e4]
        _, d = zimmer_d(a, b)
        census["%d,%d" % (a, b)] = census_counts(a, b, grid, d)

    small = {
        "m25_0_B50": sorted(points_up_to(-25, 0, 50)),
        "m1_0_B10": sorted(points_up_to(-1, 0, 10)),
    }

    sigma2 = mp.log(10 ** 6) / mp.log(800)
    lehmer = {
        "bounded_degree_f2_g1_c1": float(bounded_degree(1, 2, 1)),
        "bounded_degree_f3_g1_c1": float(bounded_degree(1, 3, 1)),
        "epsilon_threshold_0.1_1": str(epsilon_threshold(0.1, 1)),
        "epsilon_threshold_0.5_1": str(epsilon_threshold(0.5, 1)),
        "epsilon_threshold_1_1": str(epsilon_threshold(1, 1)),
    }
    gamma = 13 * math.log(13) * math.e ** 2 * 20
    px, pv = phi_max_grid(gamma, 13.0, 400.0)
    out = {
        "curves": curves,
        "heights": heights,
        "census": census,
        "small_census": small,
        "constants_minus1_0": constants_minus1_0(),
        "petsche_minus1_0": float(petsche(mp.log(64), mp.mpf(6) / 5, 1)),
        "petsche_log2": float(petsche(mp.log(2), 1, 1)),
        "product_lower_minus1_m25": float(petsche(mp.log(64), sigma2, 1)),
        "gr_e": float(1 / (mp.mpf(6) ** 8 * mp.e) ** 2),
        "rank_in_B_m25_1e6": float(442916 * mp.log(10 ** 6) / mp.log(mp.log(10 ** 6))),
        "lehmer": lehmer,
        "phi_grid": {"gamma": gamma, "lo": 13.0, "hi": 400.0, "xstar": px, "log_value": float(pv)},
        "class_groups": class_groups(2000),
    }
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()

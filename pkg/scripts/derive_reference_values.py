"""Recompute the frozen reference constants in the test suite with mpmath at 30 digits.

The formulas are written out again here, independently of the package, so the
frozen numbers in tests/ can be regenerated or audited.

    python3 scripts/derive_reference_values.py
"""
import mpmath as mp

mp.mp.dps = 30


def beta(t, d=1, delta=mp.mpf("0.1"), a=1, b=1, r=1):
    inner = 4 * d * a / delta
    return 2 * mp.log(2 * mp.pi**2 * t**2 / (3 * delta)) + 4 * d * mp.log(d * t * b * r * mp.sqrt(mp.log(inner)))


def constants(rho, eta, eta_ml):
    rho, eta, eta_ml = mp.mpf(rho), mp.mpf(eta), mp.mpf(eta_ml)
    eff = (eta + rho**2 * eta_ml) / (1 - rho**2)
    C1 = 8 / mp.log(1 + 1 / eff)
    C2 = 8 / mp.log(1 + 1 / eta)
    R_star = min((C2 / C1 - (1 - rho**2)) / rho**2, mp.mpf(1))
    return C1, C2, R_star


def sigma_min_sq(T, eta, eta_ml, rho, k_min=1):
    T, eta, eta_ml, rho, k_min = map(mp.mpf, (T, eta, eta_ml, rho, k_min))
    c = 1 - rho**2
    num = 1 / c + T / eta
    den = T**2 / (eta_ml * eta) + (1 / eta_ml + 1 / eta) * T / (k_min * c) + c / k_min**2
    return num / den


def design(R, T, eta, eta_ml, rho, k_min=1, delta=mp.mpf("0.1"), a=1, b=1, d=1):
    s2 = sigma_min_sq(T, eta, eta_ml, rho, k_min)
    L = b * mp.sqrt(mp.log(d * a / delta))
    eps = mp.sqrt(s2 * R / (2 * L**2 * d**2))
    return s2, L, eps, mp.ceil(2 * mp.mpf(eta_ml) / (s2 * R))


def bound(T, beta_T, C1, R, rho, gamma, C2):
    tail = mp.pi**2 / 6
    pa = mp.sqrt(C1 * beta_T * T * (1 - (1 - R) * rho**2) * gamma) + tail
    return pa, mp.sqrt(C2 * T * beta_T * gamma) + tail


def info_gain(points, ls, s2):
    n = len(points)
    K = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            K[i, j] = (1 if i == j else 0) + mp.exp(-(points[i] - points[j]) ** 2 / (2 * ls**2)) / s2
    return mp.log(mp.det(K)) / 2


def main():
    e = mp.mpf("0.01")
    C1, C2, R_star = constants("0.8", e, e)
    C1m, _, R_star_m = constants("0.5", e, mp.mpf("0.04"))
    b200 = beta(200)
    pa, van = bound(200, b200, C1, mp.mpf("0.3"), mp.mpf("0.8"), mp.mpf("12.5"), C2)
    rows = [
        ("beta_1", beta(1)),
        ("beta_200", b200),
        ("beta_d2_t7", beta(7, d=2)),
        ("C1 rho=0.8", C1),
        ("C2 eta=0.01", C2),
        ("R_star rho=0.8", R_star),
        ("C1 rho=0.5 mixed", C1m),
        ("R_star rho=0.5 mixed", R_star_m),
        ("bound PA", pa),
        ("bound Vanilla", van),
        ("gain 0,0.1,0.3", info_gain([mp.mpf(0), mp.mpf("0.1"), mp.mpf("0.3")], mp.mpf("0.1"), e)),
        ("sigma_min^2 rho=0.8 T=200", sigma_min_sq(200, e, e, "0.8")),
        ("sigma_min^2 mixed", sigma_min_sq(10, e, "0.04", "0.5", "0.7")),
    ]
    s2, L, eps, N = design(1, 1, 1, 1, 0)
    rows += [("L (d=a=b=1)", L), ("eps unit", eps), ("N unit", N)]
    _, _, eps_h, N_h = design(mp.mpf("0.5"), 200, e, e, "0.8")
    rows += [("eps rho=0.8 R=0.5", eps_h), ("N rho=0.8 R=0.5", N_h)]
    for name, v in rows:
        print(f"{name:28s} {mp.nstr(v, 30)}")


if __name__ == "__main__":
    main()

"""Symmetry algebra of the model z' = (y^(m))^2 on the chart (x, p0..pm, q0).

Builds the candidate fields, checks that they preserve D = span{X1, X2}
and prints the bracket table in the frame basis.  The integer tables
printed here are frozen into tests/frames_test.cpp.
"""
import sys
import sympy as sp


def model(m):
    x = sp.Symbol("x")
    p = sp.symbols(f"p0:{m + 1}")
    q0 = sp.Symbol("q0")
    coords = [x, *p, q0]
    n = len(coords)

    def field(d):
        return sp.Matrix([sp.expand(d.get(c, 0)) for c in coords])

    X1 = field({x: 1, **{p[i]: p[i + 1] for i in range(m)}, q0: p[m] ** 2})
    X2 = field({p[m]: 1})
    T = field({x: 1})
    S = field({x: x, **{p[i]: -i * p[i] for i in range(m + 1)}, q0: (1 - 2 * m) * q0})
    Ysc = field({**{p[i]: p[i] for i in range(m + 1)}, q0: 2 * q0})
    P = {x: x ** 2, q0: m ** 2 * p[m - 1] ** 2}
    for i in range(m + 1):
        P[p[i]] = (2 * m - 1 - 2 * i) * x * p[i] + (i * (2 * m - i) * p[i - 1] if i > 0 else 0)
    P = field(P)
    Y = []
    for j in range(2 * m):
        d = {p[i]: sp.diff(x ** j, x, i) for i in range(m + 1)}
        c = sp.diff(x ** j, x, m)
        zeta = 2 * sum((-1) ** l * sp.diff(c, x, l) * p[m - 1 - l] for l in range(0, j - m + 1)) if j >= m else 0
        d[q0] = zeta
        Y.append(field(d))
    Z = field({q0: 1})
    return coords, X1, X2, T, S, Ysc, P, Y, Z


def bracket(coords, X, Y):
    J = lambda V: V.jacobian(coords)
    return sp.expand(J(Y) * X - J(X) * Y)


def main(m):
    coords, X1, X2, T, S, Ysc, P, Y, Z = model(m)
    g0 = Ysc
    g1 = 2 * S + (2 * m - 1) * Ysc
    h = T
    g2 = -P
    eps = [Y[2 * m - 1]]
    for i in range(1, 2 * m):
        eps.append(bracket(coords, h, eps[-1]))
    eta = bracket(coords, eps[0], eps[-1])
    frame = [("h", h), ("g0", g0), ("g1", g1), ("g2", g2)] + [(f"e{i + 1}", e) for i, e in enumerate(eps)] + [("eta", eta)]
    # symmetry check: [F, Xi] in span{X1, X2}
    for name, F in frame:
        for Xi in (X1, X2):
            B = bracket(coords, F, Xi)
            M = sp.Matrix.hstack(X1, X2, B)
            assert all(sp.simplify(mi) == 0 for mi in M[1:, :].rref()[0][2:, :]) or M.rank(simplify=True) == 2, name
    # express brackets in the frame using generic sample points (constant coefficients)
    import random
    random.seed(1)
    pts = [{c: sp.Rational(random.randint(-9, 9), random.randint(1, 5)) for c in coords} for _ in range(6)]
    basis = [F for _, F in frame]
    A = sp.Matrix.vstack(*[sp.Matrix.hstack(*[F.subs(pt) for F in basis]) for pt in pts])
    out = []
    for a, (na, Fa) in enumerate(frame):
        for b, (nb, Fb) in enumerate(frame):
            if b <= a:
                continue
            B = bracket(coords, Fa, Fb)
            rhs = sp.Matrix.vstack(*[B.subs(pt) for pt in pts])
            sol = (A.T * A).LUsolve(A.T * rhs)
            assert sp.simplify(A * sol - rhs) == sp.zeros(*rhs.shape), (na, nb)
            terms = [f"{sol[k]}*{frame[k][0]}" for k in range(len(frame)) if sol[k] != 0]
            if terms:
                out.append(f"[{na},{nb}] = " + " + ".join(terms))
    print(f"m={m} eta={list(eta)}")
    print("\n".join(out))


if __name__ == "__main__":
    for m in map(int, sys.argv[1:] or ["2", "3"]):
        main(m)

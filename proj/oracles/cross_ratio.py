"""Which number cross-ratio makes the log-ratio expansion hold?

For psi with psi(t+x) = x + a2 x^2 + a3 x^3 + ... (enough by affine
invariance) expand ln([psi(t_i)] / [t_i]) at the diagonal and compare
with c * Spsi * (x1 - x3)(x2 - x4), Spsi = psi'''/(2psi') - 3/4 (psi''/psi')^2.
Also prints frozen values used by tests/projective_test.cpp.
"""
import sympy as sp

e, a2, a3, a4 = sp.symbols("e a2 a3 a4")
x = sp.symbols("x1:5")
u = sp.symbols("u1:5")


def psi(s):
    return s + a2 * s**2 + a3 * s**3 + a4 * s**4


conventions = {
    "displayed": lambda t: (t[0] - t[1]) * (t[1] - t[2]) / ((t[2] - t[3]) * (t[0] - t[3])),
    "adopted": lambda t: (t[1] - t[0]) * (t[3] - t[2]) / ((t[0] - t[3]) * (t[2] - t[1])),
}

schwarz = sp.Rational(1, 2) * 6 * a3 - sp.Rational(3, 4) * (2 * a2) ** 2
target = schwarz * (x[0] - x[2]) * (x[1] - x[3])

for name, cr in conventions.items():
    t = [e * xi for xi in x]
    f = sp.log(cr([psi(ti) for ti in t]) / cr(t))
    ser = sp.series(f, e, 0, 3).removeO()
    c1 = sp.simplify(ser.coeff(e, 1))
    c2 = sp.simplify(ser.coeff(e, 2))
    ratio = sp.simplify(c2 / target)
    print(f"{name}: first-order term {c1}; second-order / (Spsi (x1-x3)(x2-x4)) = {ratio}")

# frozen numbers
cr = conventions["adopted"]
print("cross-ratio(0,1,2,3) =", cr([0, 1, 2, 3]))
print("cross-ratio(0.5,1.5,-1,2) =", sp.nsimplify(cr([sp.Rational(1, 2), sp.Rational(3, 2), -1, 2])))
s = sp.Symbol("s")
f = sp.exp(2 * s)
S = sp.simplify(sp.diff(f, s, 3) / (2 * sp.diff(f, s)) - sp.Rational(3, 4) * (sp.diff(f, s, 2) / sp.diff(f, s)) ** 2)
print("S exp(2t) =", S)
g = sp.tan(s)
S = sp.simplify(sp.diff(g, s, 3) / (2 * sp.diff(g, s)) - sp.Rational(3, 4) * (sp.diff(g, s, 2) / sp.diff(g, s)) ** 2)
print("S tan(t) =", S)

# Regenerates faddeeva_table.inc with mpmath at 50 digits.
import mpmath as mp

mp.mp.dps = 50

def fmt(q):
    return '0.0' if abs(q) < mp.mpf('1e-300') else mp.nstr(q, 20)

def w(z):
    return mp.exp(-z * z) * mp.erfc(-1j * z)

pts = []
radii = [0.01, 0.3, 0.99, 1.0, 2.0, 2.9, 3.0, 3.1, 4.0, 5.0, 5.9, 6.0, 6.1, 7.0, 8.0, 10.0, 20.0, 50.0, 200.0]
for r in radii:
    for j in range(13):
        th = mp.pi * j / 12
        pts.append(mp.mpc(r * mp.cos(th), r * mp.sin(th)))
for x in [0.5, 2.5, 3.5, 4.5, 5.5, 5.99, 7.5]:
    for y in [1e-8, 0.01, 0.3, 1.0, 1.49, 1.51, 2.5]:
        pts.append(mp.mpc(x, y))
        pts.append(mp.mpc(-x, y))
for z in [mp.mpc(1, -1), mp.mpc(2, -0.5), mp.mpc(-3, -2), mp.mpc(0.3, -4), mp.mpc(10, -0.1), mp.mpc(-5, -5.5)]:
    pts.append(z)

erf_pts = [mp.mpc(1, 1), mp.mpc(0.2, 0.1), mp.mpc(-2, 0.7), mp.mpc(3, -4), mp.mpc(0.1, 5),
           mp.mpc(6, 6.2), mp.mpc(-0.4, -0.3), mp.mpc(12, 3), mp.mpc(1e-6, 2e-6), mp.mpc(4, 0.01)]

with open("faddeeva_table.inc", "w") as f:
    f.write("// z_re, z_im, w_re, w_im\n")
    f.write("static const double kFaddeevaTable[][4] = {\n")
    for z in pts:
        z = mp.mpc(float(z.real), float(z.imag))
        v = w(z)
        f.write("    {%s, %s, %s, %s},\n" % tuple(fmt(q) for q in (z.real, z.imag, v.real, v.imag)))
    f.write("};\n\n")
    f.write("static const double kErfTable[][4] = {\n")
    for z in erf_pts:
        z = mp.mpc(float(z.real), float(z.imag))
        v = mp.erf(z)
        f.write("    {%s, %s, %s, %s},\n" % tuple(fmt(q) for q in (z.real, z.imag, v.real, v.imag)))
    f.write("};\n")

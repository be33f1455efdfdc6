"""Independent oracle: MHB edge-measure ratio of A_M for K_3 packed on the 5x1 rectangle.

Carrier edges (0,1)-(1,1), (2,1)-(3,1), (4,1)-(5,1) hold the K_3 edges ab, bc, ca.
Boundary wiring: a = {(0,1),(5,1)}, b = {(1,1),(2,1)}, c = {(3,1),(4,1)}.
A_M = {largest K_3 component <= T} and {at most M blocks joined off the carriers}.
"""
import sys

p, q, T, M = 0.5, 5.0, 2, 1
if len(sys.argv) > 1:
    p, q, T, M = float(sys.argv[1]), float(sys.argv[2]), int(sys.argv[3]), int(sys.argv[4])

W, H = 5, 1
V = [(x, y) for y in range(H + 1) for x in range(W + 1)]
E = [((x, y), (x + 1, y)) for y in range(H + 1) for x in range(W)]
E += [((x, y), (x, y + 1)) for y in range(H) for x in range(W + 1)]
carriers = [((0, 1), (1, 1)), ((2, 1), (3, 1)), ((4, 1), (5, 1))]
kidx = [E.index(c) for c in carriers]
block_of = {(0, 1): 0, (5, 1): 0, (1, 1): 1, (2, 1): 1, (3, 1): 2, (4, 1): 2}
k3 = [(0, 1), (1, 2), (2, 0)]
m = len(E)


def find(par, v):
    while par[v] != v:
        par[v] = par[par[v]]
        v = par[v]
    return v


def components(state):
    par = {v: v for v in V}
    for (a, b) in [((0, 1), (5, 1)), ((1, 1), (2, 1)), ((3, 1), (4, 1))]:
        par[find(par, a)] = find(par, b)
    for i, (a, b) in enumerate(E):
        if state >> i & 1:
            par[find(par, a)] = find(par, b)
    return len({find(par, v) for v in V})


def in_a(state):
    par = list(range(3))
    for j, i in enumerate(kidx):
        if state >> i & 1:
            a, b = k3[j]
            ra, rb = find(par, a), find(par, b)
            par[ra] = rb
    sizes = {}
    for v in range(3):
        r = find(par, v)
        sizes[r] = sizes.get(r, 0) + 1
    if max(sizes.values()) > T:
        return False
    vp = {v: v for v in V}
    for i, (a, b) in enumerate(E):
        if i not in kidx and state >> i & 1:
            vp[find(vp, a)] = find(vp, b)
    groups = {}
    for v, blk in block_of.items():
        groups.setdefault(find(vp, v), set()).add(blk)
    joined = set()
    for g in groups.values():
        if len(g) > 1:
            joined |= g
    return len(joined) <= M


n_states = 1 << m
comp = [components(s) for s in range(n_states)]
w = [p ** bin(s).count("1") * (1 - p) ** (m - bin(s).count("1")) * q ** comp[s] for s in range(n_states)]
Z = sum(w)
pi = [x / Z for x in w]
A = [in_a(s) for s in range(n_states)]
lmask = sum(1 << i for i in kidx)

# Conditional law of the off-carrier edges given the carrier restriction.
cls_total, cls_out = {}, {}
for s in range(n_states):
    c = s & lmask
    cls_total[c] = cls_total.get(c, 0.0) + pi[s]
    if not A[s]:
        cls_out[c] = cls_out.get(c, 0.0) + pi[s]

flow = mass = 0.0
for s in range(n_states):
    if not A[s]:
        continue
    mass += pi[s]
    for i in kidx:
        up, down = s | (1 << i), s & ~(1 << i)
        # heat bath: open with prob pi(up) / (pi(up) + pi(down))
        po = pi[up] / (pi[up] + pi[down])
        if not A[up]:
            flow += pi[s] / m * po
        if not A[down]:
            flow += pi[s] / m * (1 - po)
    flow += pi[s] * (m - len(kidx)) / m * cls_out.get(s & lmask, 0.0) / cls_total[s & lmask]

print(f"phi={flow / mass:.12f} phi_c={flow / (1 - mass):.12f} mass={mass:.12f}")

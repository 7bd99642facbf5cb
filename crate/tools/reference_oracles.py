"""Reference values for the integration tests, computed independently of the
Rust code: brute-force enumeration for exact quantities and a constrained
Newton method for maxima of the reweighted objective (valid when the weights
make it concave).

Tables are row-major over their sorted scope; binary state 0 is spin -1.
Run: python3 tools/reference_oracles.py
"""
import itertools

import numpy as np
from scipy.linalg import null_space

SPIN = np.array([-1.0, 1.0])


def ising_tables(n, edges, gs, gst):
    regions = [(v,) for v in range(n)] + [tuple(e) for e in edges]
    theta = [gs[v] * SPIN for v in range(n)]
    theta += [g * np.outer(SPIN, SPIN).ravel() for g in gst]
    return regions, theta


def brute_force(n, regions, theta):
    energies, states = [], list(itertools.product([0, 1], repeat=n))
    for x in states:
        e = 0.0
        for r, t in zip(regions, theta):
            idx = 0
            for v in r:
                idx = idx * 2 + x[v]
            e += t[idx]
        energies.append(e)
    energies = np.array(energies)
    log_z = np.logaddexp.reduce(energies)
    p = np.exp(energies - log_z)
    entropy = -np.sum(p * np.log(p))
    marg = [sum(p[i] for i, x in enumerate(states) if x[v] == 1) for v in range(n)]
    return log_z, entropy, marg


def constraints(regions):
    """Normalization of every table and consistency of every contained pair."""
    offsets = np.cumsum([0] + [2 ** len(r) for r in regions])
    rows, rhs = [], []
    total = offsets[-1]
    for i, r in enumerate(regions):
        row = np.zeros(total)
        row[offsets[i]:offsets[i + 1]] = 1
        rows.append(row)
        rhs.append(1.0)
    for i, big in enumerate(regions):
        for j, small in enumerate(regions):
            if i == j or not set(small) < set(big):
                continue
            pos = [big.index(v) for v in small]
            for y in itertools.product([0, 1], repeat=len(small)):
                row = np.zeros(total)
                for x in itertools.product([0, 1], repeat=len(big)):
                    if all(x[p] == yy for p, yy in zip(pos, y)):
                        row[offsets[i] + int("".join(map(str, x)), 2)] += 1
                row[offsets[j] + int("".join(map(str, y)), 2)] -= 1
                rows.append(row)
                rhs.append(0.0)
    return np.array(rows), np.array(rhs), offsets


def reweighted_max(regions, theta, rho, iters=200):
    a, _, offsets = constraints(regions)
    basis = null_space(a)
    w = np.concatenate([np.full(2 ** len(r), p) for r, p in zip(regions, rho)])
    th = np.concatenate(theta)
    tau = np.concatenate([np.full(2 ** len(r), 2.0 ** -len(r)) for r in regions])

    def f(t):
        return th @ t - np.sum(w * t * np.log(t))

    for _ in range(iters):
        g = th - w * (np.log(t := tau) + 1)
        h = -w / t
        rg = basis.T @ g
        rh = basis.T @ (h[:, None] * basis)
        step = basis @ np.linalg.solve(rh, -rg)
        s = 1.0
        while np.any(tau + s * step <= 0) or f(tau + s * step) < f(tau) - 1e-15:
            s /= 2
            if s < 1e-12:
                break
        tau = tau + s * step
        if np.linalg.norm(rg) < 1e-13:
            break
    assert np.linalg.norm(basis.T @ (th - w * (np.log(tau) + 1))) < 1e-10
    marg = [tau[offsets[i] + 1] for i, r in enumerate(regions) if len(r) == 1]
    return f(tau), marg


def report(name, value):
    if isinstance(value, list):
        value = [v.tolist() if isinstance(v, np.ndarray) else float(v) for v in value]
    else:
        value = float(value)
    print(f"{name} = {value!r}")


k4_edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
k4_gs = [0.05, -0.02, 0.08, 0.01]
k4_gst = [0.9, -1.3, 0.4, 1.1, -0.7, 1.6]
regions, theta = ising_tables(4, k4_edges, k4_gs, k4_gst)
lz, ent, marg = brute_force(4, regions, theta)
report("K4 log Z", lz)
report("K4 entropy", ent)
report("K4 P(x0=+1)", marg[0])
for r in (0.4, 0.6):
    rho = [1 - 3 * r] * 4 + [r] * 6
    val, m = reweighted_max(regions, theta, rho)
    report(f"K4 reweighted max rho={r}", val)
    report(f"K4 reweighted tau0(+1) rho={r}", m[0])

c4_edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
regions, theta = ising_tables(4, c4_edges, [0.1, -0.2, 0.05, 0.0], [1.2, -0.8, 0.5, 1.5])
val, m = reweighted_max(regions, theta, [-1] * 4 + [1] * 4)
report("C4 Bethe max", val)
report("C4 Bethe tau", m)
report("C4 log Z", brute_force(4, regions, theta)[0])


def literal_theta(regions, seed):
    rng = np.random.default_rng(seed)
    return [np.round(rng.uniform(-1, 1, 2 ** len(r)), 2) for r in regions]


plaquette = [(0,), (1,), (2,), (3,), (0, 1), (0, 2), (1, 3), (2, 3), (0, 1, 2, 3)]
theta = literal_theta(plaquette, 1)
report("plaquette theta", theta)
val, m = reweighted_max(plaquette, theta, [1.0] * 9)
report("plaquette unit-weight max", val)
report("plaquette unit-weight tau", m)

chain = [(0,), (1,), (2,), (3,), (4,), (0, 1, 2), (1, 2, 3), (2, 3, 4)]
theta = literal_theta(chain, 2)
report("chain theta", theta)
val, m = reweighted_max(chain, theta, [1.0] * 8)
report("chain unit-weight max", val)
report("chain unit-weight tau", m)
lz, ent, marg = brute_force(5, chain, theta)
report("chain log Z", lz)
report("chain entropy", ent)

# symmetric slice entropy, pair table at (q1, q2) = (0, 1/2)
t = np.array([1.5, 0.5, 0.5, 1.5]) / 4
report("pair slice entropy", -np.sum(t * np.log(t)))

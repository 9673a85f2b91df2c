"""From-scratch reference implementation used only by the tests.

Nothing is stored incrementally: out-degrees, popularities, pheromone sums and
energies are recomputed from the full history at every step, in the direct
(non-log) domain, with plain Python loops.
"""
import math


def pair_energy(x, coupling, field):
    """O(N^2) double sum over ordered pairs."""
    n = len(x)
    sig = [2 * v - 1 for v in x]
    e = -sum(field * s for s in sig)
    e -= sum(coupling * sig[i] * sig[j] for i in range(n) for j in range(n) if i != j) / (n - 1)
    return e


def out_degrees(r, ref_history, t):
    """k_out(i, t) for i < t rebuilt from the complete graph and all reference sets."""
    k = [0] * t
    for i in range(r + 1):
        k[i] = r - i
    for refs in ref_history:
        for i in refs:
            k[i] += 1
    return k


def draw_references(r, omega, kout, uniforms):
    weights = [max(r + omega * k, 0.0) for k in kout]
    chosen = []
    for u in uniforms:
        avail = [0.0 if i in chosen else w for i, w in enumerate(weights)]
        target = u * sum(avail)
        acc = 0.0
        for i, w in enumerate(avail):
            acc += w
            if acc > target:
                chosen.append(i)
                break
    return sorted(chosen)


def run(n_spins, coupling, field, r, omega, alpha, n_ants, rng, shift=False):
    """Full history of one colony run.

    With ``shift`` the Boltzmann weights are exp(-(E - E_min)) over the
    reference set; the ratios are unchanged mathematically, and for dyadic
    parameters they become exactly representable in the same way as in the
    engine, so the two can be compared bit for bit.
    """
    choices = (rng.random((r + 1, n_spins)) < 0.5).astype(int).tolist()
    energies = [pair_energy(x, coupling, field) for x in choices]
    ref_history, ratios = [], []
    for t in range(r + 1, n_ants):
        kout = out_degrees(r, ref_history, t)
        refs = draw_references(r, omega, kout, rng.random(r).tolist())
        e0 = min(energies[s] for s in refs) if shift else 0.0
        w = {s: math.exp(-energies[s] + e0) for s in refs}
        total = 0.0
        for s in refs:
            total += w[s]
        z = []
        for k in range(n_spins):
            acc = 0.0
            for s in refs:
                if choices[s][k]:
                    acc += w[s]
            z.append(acc / total)
        u = rng.random(n_spins)
        x = [1 if u[k] < (1 - alpha) / 2 + alpha * z[k] else 0 for k in range(n_spins)]
        choices.append(x)
        energies.append(pair_energy(x, coupling, field))
        ref_history.append(refs)
        ratios.append(z)
    return {"refs": ref_history, "ratios": ratios, "choices": choices, "energies": energies}

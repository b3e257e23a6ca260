"""Find symplectic spreads for the prime-power MUB tables (d = 4, 8, 9).

Each spread is a partition of the non-identity generalized Pauli operators on
k qudits of prime dimension p into p^k + 1 commuting classes.  Prints the
generator exponent vectors (x_1..x_k, z_1..z_k) used in measurements.py.
"""
import itertools


def symp(u, v, p, k):
    return (sum(u[i] * v[k + i] - u[k + i] * v[i] for i in range(k))) % p


def span(vecs, p, k):
    out = set()
    for coeffs in itertools.product(range(p), repeat=len(vecs)):
        out.add(tuple(sum(c * v[i] for c, v in zip(coeffs, vecs)) % p for i in range(2 * k)))
    out.discard((0,) * (2 * k))
    return frozenset(out)


def lagrangians(p, k):
    nonzero = [v for v in itertools.product(range(p), repeat=2 * k) if any(v)]
    found = {}

    def grow(basis, sp):
        if len(basis) == k:
            found.setdefault(sp, tuple(basis))
            return
        for v in nonzero:
            if v in sp or v <= (basis[-1] if basis else ()):
                continue
            if all(symp(v, b, p, k) == 0 for b in basis):
                grow(basis + [v], span(basis + [v], p, k))

    grow([], frozenset())
    return found, nonzero


def spread(p, k):
    subspaces, nonzero = lagrangians(p, k)
    z_type = next(s for s in subspaces if all(not any(v[:k]) for v in s))
    chosen = [z_type]
    covered = set(z_type)

    def solve():
        missing = [v for v in nonzero if v not in covered]
        if not missing:
            return True
        target = missing[0]
        for s in subspaces:
            if target in s and not (s & covered):
                chosen.append(s)
                covered.update(s)
                if solve():
                    return True
                chosen.pop()
                covered.difference_update(s)
        return False

    assert solve()
    return [subspaces[s] for s in chosen]


if __name__ == "__main__":
    for d, p, k in [(4, 2, 2), (8, 2, 3), (9, 3, 2)]:
        print(d, [list(b) for b in spread(p, k)])

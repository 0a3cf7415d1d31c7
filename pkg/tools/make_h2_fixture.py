"""Build the H2/STO-3G Jordan-Wigner fixture from OpenFermion molecular data.

Usage: python tools/make_h2_fixture.py H2_sto-3g_singlet_0.7414.hdf5 > tests/data/h2_sto3g_jw.txt

The HDF5 file ships inside the ``openfermion`` wheel under
``openfermion/testing/data``. Only ``h5py`` and ``numpy`` are needed here.
Spin orbitals are interleaved (2p = alpha, 2p+1 = beta). The nuclear
repulsion is left out so the ground energy is the electronic energy.
"""
import itertools
import sys
from functools import reduce

import h5py
import numpy as np

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_all(mats):
    return reduce(np.kron, mats)


def annihilator(p, n):
    # Z-string on qubits < p, (X + iY)/2 on p; qubit 0 is the leftmost factor.
    return kron_all([Z] * p + [(X + 1j * Y) / 2] + [I2] * (n - p - 1))


def main(path):
    with h5py.File(path, "r") as f:
        one = f["one_body_integrals"][()]
        two = f["two_body_integrals"][()]
        fci = float(f["fci_energy"][()])
        nuc = float(f["nuclear_repulsion"][()])
    n_orb = one.shape[0]
    n = 2 * n_orb
    a = [annihilator(p, n) for p in range(n)]
    ad = [m.conj().T for m in a]
    H = np.zeros((2**n, 2**n), dtype=complex)
    for p, q in itertools.product(range(n_orb), repeat=2):
        for s in range(2):
            H += one[p, q] * ad[2 * p + s] @ a[2 * q + s]
    for p, q, r, s in itertools.product(range(n_orb), repeat=4):
        for s1, s2 in itertools.product(range(2), repeat=2):
            H += 0.5 * two[p, q, r, s] * (
                ad[2 * p + s1] @ ad[2 * q + s2] @ a[2 * r + s2] @ a[2 * s + s1]
            )
    e0 = np.linalg.eigvalsh(H)[0]
    if abs(e0 + nuc - fci) > 1e-8:
        raise SystemExit(f"ground energy {e0 + nuc} does not match FCI {fci}")
    print("# H2 STO-3G, bond length 0.7414 A, Jordan-Wigner, interleaved spin orbitals")
    print("# source: OpenFermion testing data H2_sto-3g_singlet_0.7414.hdf5")
    print(f"# electronic energy (no nuclear repulsion): {float(e0)!r}")
    for word in itertools.product("IXYZ", repeat=n):
        P = kron_all([PAULI[c] for c in word])
        c = np.trace(P @ H).real / 2**n
        if abs(c) > 1e-12:
            print(f"{c:.17g} {''.join(word)}")


if __name__ == "__main__":
    main(sys.argv[1])

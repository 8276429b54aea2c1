"""Compare the numba and numpy state-vector kernels.

Runs the same random gate sequence through both kernel sets, checks that the
final states agree and prints the time per gate. Usage::

    python3 benchmarks/bench_simulator.py --qubits 20 --gates 400
"""
import argparse
import time

import numpy as np

from qcflow.backends import _kernels as K


def make_gates(rng, n, count):
    gates = []
    for _ in range(count):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, _ = np.linalg.qr(m)
        t = int(rng.integers(n))
        c = int(rng.integers(n))
        cmask = 0 if c == t or rng.random() < 0.5 else 1 << c
        gates.append((t, complex(q[0, 0]), complex(q[0, 1]), complex(q[1, 0]), complex(q[1, 1]), cmask))
    return gates


def run(apply, state, gates):
    t0 = time.perf_counter()
    for g in gates:
        apply(state, *g)
    return time.perf_counter() - t0


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--qubits", type=int, default=20)
    p.add_argument("--gates", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    gates = make_gates(rng, args.qubits, args.gates)
    psi = rng.normal(size=1 << args.qubits) + 1j * rng.normal(size=1 << args.qubits)
    psi /= np.linalg.norm(psi)

    a = psi.copy()
    t_np = run(K.apply_1q_np, a, gates)
    print(f"numpy: {1e3 * t_np / len(gates):8.3f} ms/gate")
    if not K.HAVE_NUMBA:
        print("numba: unavailable (QCFLOW_DISABLE_NUMBA set or numba missing)")
        return
    K.apply_1q_nb(psi.copy(), *gates[0])  # compile outside the timing
    b = psi.copy()
    t_nb = run(K.apply_1q_nb, b, gates)
    print(f"numba: {1e3 * t_nb / len(gates):8.3f} ms/gate")
    print(f"speedup: {t_np / t_nb:.2f}x, max |diff| = {np.max(np.abs(a - b)):.1e}")


if __name__ == "__main__":
    main()

"""Exact-diagonalization oracle for Majorana size distributions.

N Majorana fermions with {chi_j, chi_k} = 2 delta_jk live on N/2 qubits via
the Jordan-Wigner construction chi_{2k-1} = Z..Z X_k, chi_{2k} = Z..Z Y_k.
A q-body Hamiltonian with Gaussian couplings is assembled directly from
Pauli strings (each Majorana monomial is a single signed Pauli string, so the
build is a scatter-add rather than a chain of matrix products).  The dressed
operator rho^{1/2} chi_k(t) is decomposed over the 4^{N/2} Pauli strings with
a Walsh-Hadamard-style transform in O(4^{N/2} N) operations, and each string
maps back to a unique Majorana monomial whose length is the operator size.

Sizes are accumulated into P(n) = sum |c|^2 and Q(n) = sum c^2 with c the
coefficients on the Hermitian basis i^{floor(n/2)} chi_{j1}..chi_{jn}.
Because those basis elements are real multiples of the bare Pauli strings,
Q is insensitive to the sign bookkeeping and P, Q follow directly from the
transform output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from joblib import Parallel, delayed

_DENSE_QUBIT_GUARD = 13   # 2^13 = 8192 is the largest dense dimension allowed


@dataclass(frozen=True)
class SykParams:
    """Ensemble parameters: size, interaction order, scale, temperature, seed."""

    n_majorana: int
    q: int = 4
    script_j: float = 3.206758 / (2 * math.pi)
    beta: float = 2 * math.pi
    base_seed: int = 0

    def __post_init__(self):
        n, q = self.n_majorana, self.q
        if n <= 0 or n % 2:
            raise ValueError(f"n_majorana must be even and positive, got {n}")
        if q < 2 or q % 2:
            raise ValueError(f"q must be even and >= 2, got {q}")
        if q > n:
            raise ValueError(f"q = {q} exceeds n_majorana = {n}")
        if n // 2 > _DENSE_QUBIT_GUARD:
            raise ValueError(
                f"dense methods are guarded to 2^{_DENSE_QUBIT_GUARD}; "
                f"n_majorana = {n} needs dimension 2^{n // 2}")
        if self.script_j <= 0:
            raise ValueError(f"script_j must be positive, got {self.script_j}")
        if self.beta < 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    @property
    def dim(self) -> int:
        return 1 << (self.n_majorana // 2)

    def coupling_std(self) -> float:
        """Standard deviation of each coupling: sqrt((q-1)! J^2 / (2 q N^{q-1}))."""
        n, q = self.n_majorana, self.q
        var = math.factorial(q - 1) * self.script_j ** 2 / (2 * q * n ** (q - 1))
        return math.sqrt(var)


@dataclass(frozen=True)
class CouplingTensor:
    """Couplings for every ordered q-tuple, in lexicographic tuple order."""

    n_majorana: int
    q: int
    values: np.ndarray
    seed_key: tuple[int, int]

    def __post_init__(self):
        expect = math.comb(self.n_majorana, self.q)
        if len(self.values) != expect:
            raise ValueError(
                f"expected {expect} couplings for (N={self.n_majorana}, "
                f"q={self.q}), got {len(self.values)}")

    def as_dict(self) -> dict[tuple[int, ...], float]:
        keys = combinations(range(1, self.n_majorana + 1), self.q)
        return {k: float(v) for k, v in zip(keys, self.values)}


@dataclass(frozen=True)
class SizeDistribution:
    """Discrete size data P(n), Q(n) for one realization and time."""

    n_values: np.ndarray
    p: np.ndarray
    q: np.ndarray
    t: float
    beta: float
    seed_key: tuple[int, int] | None = None
    k_probe: int = 1

    @property
    def n_majorana(self) -> int:
        return int(self.n_values[-1])

    def total_q(self) -> complex:
        return complex(np.sum(self.q))

    def mean_size(self) -> float:
        return float(np.sum(self.n_values * self.p))


@dataclass(frozen=True)
class EnsembleResult:
    """Disorder ensemble of size distributions on a common time list."""

    params: SykParams
    t_list: tuple[float, ...]
    realizations: tuple  # realization-major tuple of per-time SizeDistribution tuples
    mean_p: np.ndarray   # shape (len(t_list), N + 1)
    mean_q: np.ndarray
    stderr_p: np.ndarray
    stderr_abs_q: np.ndarray
    realization_seeds: tuple[int, ...]
    v_expectations: np.ndarray    # per realization
    mean_v_expectation: float
    k_probe: int = 1

    def mean_distribution(self, t_index: int) -> SizeDistribution:
        n = self.params.n_majorana
        return SizeDistribution(
            n_values=np.arange(n + 1), p=self.mean_p[t_index],
            q=self.mean_q[t_index], t=self.t_list[t_index],
            beta=self.params.beta, seed_key=None, k_probe=self.k_probe)


# ---------------------------------------------------------------------------
# Pauli-string algebra (symplectic (x, z) masks with an explicit phase)
# ---------------------------------------------------------------------------

def _pauli_mul(p1, p2):
    """Product of X^x Z^z strings: reordering Z^z1 X^x2 costs (-1)^{z1.x2}."""
    x1, z1, ph1 = p1
    x2, z2, ph2 = p2
    sign = -1.0 if bin(z1 & x2).count("1") % 2 else 1.0
    return x1 ^ x2, z1 ^ z2, ph1 * ph2 * sign


def majorana_strings(n_majorana: int):
    """(x, z, phase) triples for chi_1 .. chi_N on N/2 qubits.

    chi_{2k-1} = Z_1..Z_{k-1} X_k and chi_{2k} = Z_1..Z_{k-1} Y_k with
    Y = i X Z; qubit k occupies bit k-1.
    """
    out = []
    for k in range(1, n_majorana // 2 + 1):
        tail = (1 << (k - 1)) - 1
        out.append((1 << (k - 1), tail, 1.0 + 0.0j))
        out.append((1 << (k - 1), tail | (1 << (k - 1)), 1j))
    return out


def _string_matrix(n_qubits: int, x: int, z: int, phase: complex) -> np.ndarray:
    dim = 1 << n_qubits
    cols = np.arange(dim)
    rows = cols ^ x
    signs = 1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)
    mat = np.zeros((dim, dim), dtype=complex)
    mat[rows, cols] = phase * signs
    return mat


def build_majorana_ops(n_majorana: int) -> list[np.ndarray]:
    """Dense Hermitian Majorana matrices, dimension 2^{N/2}.

    Guarded to N <= 26; each matrix squares to the identity and distinct
    matrices anticommute exactly by construction.
    """
    if n_majorana <= 0 or n_majorana % 2:
        raise ValueError(f"n_majorana must be even and positive, got {n_majorana}")
    if n_majorana > 2 * _DENSE_QUBIT_GUARD:
        raise ValueError(f"n_majorana = {n_majorana} exceeds the dense guard "
                         f"{2 * _DENSE_QUBIT_GUARD}")
    m = n_majorana // 2
    return [_string_matrix(m, x, z, ph) for x, z, ph in majorana_strings(n_majorana)]


def parity_operator(n_majorana: int) -> np.ndarray:
    """Fermion parity i^{N/2} chi_1 .. chi_N = (-1)^{N/2} Z^{otimes N/2}."""
    m = n_majorana // 2
    dim = 1 << m
    diag = (-1.0) ** m * (1.0 - 2.0 * (np.bitwise_count(np.arange(dim)) & 1))
    return np.diag(diag.astype(complex))


def realization_seed(base_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(index,))


def sample_couplings(params: SykParams, realization_index: int) -> CouplingTensor:
    """Gaussian couplings for one disorder realization.

    Deterministic in (base_seed, realization_index); tuple order is the
    lexicographic order of itertools.combinations.
    """
    if realization_index < 0:
        raise ValueError(f"realization index must be >= 0, got {realization_index}")
    count = math.comb(params.n_majorana, params.q)
    rng = np.random.default_rng(realization_seed(params.base_seed,
                                                 realization_index))
    values = rng.normal(0.0, params.coupling_std(), size=count)
    return CouplingTensor(n_majorana=params.n_majorana, q=params.q,
                          values=values,
                          seed_key=(params.base_seed, realization_index))


def build_hamiltonian(couplings: CouplingTensor) -> np.ndarray:
    """Dense Hamiltonian sum_J J chi_{j1}..chi_{jq} from a coupling tensor.

    Each Majorana monomial reduces to one signed Pauli string, accumulated by
    vectorized scatter-add.  For q = 2 (mod 4) the bare monomials are
    anti-Hermitian, so an extra factor i keeps H Hermitian; at q = 0 (mod 4),
    which includes the q = 4 working point, the factor is 1.
    """
    n, q = couplings.n_majorana, couplings.q
    m = n // 2
    dim = 1 << m
    chi = majorana_strings(n)
    herm_fix = 1j if (q * (q - 1) // 2) % 2 else 1.0 + 0.0j

    h = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    pop = np.bitwise_count
    for coupling, subset in zip(couplings.values,
                                combinations(range(n), q)):
        x, z, ph = chi[subset[0]]
        for j in subset[1:]:
            x, z, ph = _pauli_mul((x, z, ph), chi[j])
        signs = 1.0 - 2.0 * (pop(cols & z) & 1)
        h[cols ^ x, cols] += (coupling * herm_fix * ph) * signs
    return h


@lru_cache(maxsize=8)
def _size_labels(n_qubits: int) -> np.ndarray:
    """Majorana-string length for every base-4 Pauli index on n_qubits.

    Walks qubits from the top down, undoing the Jordan-Wigner Z tails: a
    pending odd number of single-Majorana sites above qubit j flips its
    letter by Z (I<->Z, X<->Y, i.e. the index XOR 3).  The corrected letter
    then reads off the site content: I empty, X or Y one Majorana, Z both.
    """
    count = 1 << (2 * n_qubits)
    idx = np.arange(count)
    sizes = np.zeros(count, dtype=np.int64)
    tail_parity = np.zeros(count, dtype=np.int64)
    for axis in range(n_qubits):          # axis 0 = topmost qubit
        shift = 2 * (n_qubits - 1 - axis)
        letter = (idx >> shift) & 3
        letter = letter ^ (3 * tail_parity)
        single = (letter == 1) | (letter == 2)
        sizes += single + 2 * (letter == 3)
        tail_parity ^= single
    return sizes


_PAULI_COEFF_MAP = 0.5 * np.array(
    [[1, 0, 0, 1],         # identity: (a + d)/2
     [0, 1, 1, 0],         # X: (b + c)/2
     [0, 1j, -1j, 0],      # Y: i(b - c)/2
     [1, 0, 0, -1]],       # Z: (a - d)/2
    dtype=complex)


def pauli_transform(mat: np.ndarray) -> np.ndarray:
    """Normalized-trace Pauli coefficients of a 2^m x 2^m matrix.

    Returns the flattened coefficient tensor indexed base-4 with the top
    qubit as the most significant digit; cost O(4^m m).
    """
    dim = mat.shape[0]
    m = dim.bit_length() - 1
    if mat.shape != (dim, dim) or (1 << m) != dim:
        raise ValueError(f"matrix must be square with power-of-two size, "
                         f"got {mat.shape}")
    t = mat.reshape((2,) * (2 * m))
    perm = [ax for pair in ((k, m + k) for k in range(m)) for ax in pair]
    t = t.transpose(perm).reshape((4,) * m)
    for axis in range(m):
        t = np.moveaxis(np.tensordot(_PAULI_COEFF_MAP, t, axes=([1], [axis])),
                        0, axis)
    return t.ravel()


def size_decompose(mat: np.ndarray, n_majorana: int,
                   t: float = 0.0, beta: float = 0.0,
                   seed_key=None, k_probe: int = 1) -> SizeDistribution:
    """Size and winding-size distributions of an operator given as a matrix.

    P(n) collects |c|^2 and Q(n) collects c^2 over the Hermitian Majorana
    basis at length n.  Those basis elements are +/-1 times bare Pauli
    strings, so both follow from the Pauli coefficients directly: the sign
    squares away in c^2 and cancels in |c|^2.
    """
    m = n_majorana // 2
    if mat.shape != (1 << m, 1 << m):
        raise ValueError(f"matrix shape {mat.shape} does not match "
                         f"n_majorana = {n_majorana}")
    w = pauli_transform(mat)
    labels = _size_labels(m)
    p = np.bincount(labels, weights=np.abs(w) ** 2, minlength=n_majorana + 1)
    w2 = w * w
    q = (np.bincount(labels, weights=w2.real, minlength=n_majorana + 1)
         + 1j * np.bincount(labels, weights=w2.imag, minlength=n_majorana + 1))
    return SizeDistribution(n_values=np.arange(n_majorana + 1), p=p, q=q,
                            t=t, beta=beta, seed_key=seed_key, k_probe=k_probe)


def thermal_sqrt(h: np.ndarray, beta: float):
    """(evals, U, rho_tilde^{1/2}) with rho normalized under the trace/dim."""
    evals, u = np.linalg.eigh(h)
    dim = h.shape[0]
    boltz_half = np.exp(-beta * (evals - evals.min()) / 2.0)
    trace_norm = np.sum(boltz_half ** 2) / dim
    rho_half = (u * (boltz_half / math.sqrt(trace_norm))) @ u.conj().T
    return evals, u, rho_half


def heisenberg_op(evals, u, op: np.ndarray, t: float) -> np.ndarray:
    """exp(iHt) op exp(-iHt) via the cached eigendecomposition."""
    in_eig = u.conj().T @ op @ u
    phases = np.exp(1j * evals * t)
    return u @ (phases[:, None] * in_eig * phases[None, :].conj()) @ u.conj().T


def dressed_operator(h: np.ndarray, beta: float, t: float, k: int,
                     majorana_ops) -> np.ndarray:
    """rho_tilde^{1/2} chi_k(t), normalized so tr(M^dag M)/dim = 1.

    ``k`` is the 1-based fermion flavor.  The normalization uses the trace
    divided by the dimension, matching the orthonormality of the Hermitian
    Majorana string basis.
    """
    if not 1 <= k <= len(majorana_ops):
        raise ValueError(f"probe flavor k = {k} out of range")
    evals, u, rho_half = thermal_sqrt(h, beta)
    chi_t = heisenberg_op(evals, u, majorana_ops[k - 1], t)
    return rho_half @ chi_t


def _one_realization(params: SykParams, index: int, t_list, k_probe: int,
                     average_k: bool):
    couplings = sample_couplings(params, index)
    h = build_hamiltonian(couplings)
    chi = build_majorana_ops(params.n_majorana)
    evals, u, rho_half = thermal_sqrt(h, params.beta)
    seed_key = (params.base_seed, index)

    rho_dist = size_decompose(rho_half, params.n_majorana, t=0.0,
                              beta=params.beta, seed_key=seed_key,
                              k_probe=k_probe)
    v_exp = -params.n_majorana + 2.0 * rho_dist.mean_size()

    probes = tuple(range(1, params.n_majorana + 1)) if average_k else (k_probe,)
    dists = []
    for t in t_list:
        acc_p = np.zeros(params.n_majorana + 1)
        acc_q = np.zeros(params.n_majorana + 1, dtype=complex)
        for k in probes:
            chi_t = heisenberg_op(evals, u, chi[k - 1], t)
            d = size_decompose(rho_half @ chi_t, params.n_majorana, t=t,
                               beta=params.beta, seed_key=seed_key,
                               k_probe=k)
            acc_p += d.p
            acc_q += d.q
        dists.append(SizeDistribution(
            n_values=np.arange(params.n_majorana + 1),
            p=acc_p / len(probes), q=acc_q / len(probes),
            t=t, beta=params.beta, seed_key=seed_key, k_probe=k_probe))
    return dists, v_exp


def run_ensemble(params: SykParams, t_list, realizations: int,
                 k_probe: int = 1, average_k: bool = False,
                 n_jobs: int = 1) -> EnsembleResult:
    """Disorder ensemble of size distributions, deterministic in the seed.

    Each realization derives its own generator from (base_seed, index), so
    results are independent of worker count and scheduling; means and
    standard errors are reduced in realization order at the end.
    """
    if realizations < 1:
        raise ValueError(f"need at least one realization, got {realizations}")
    t_list = tuple(float(t) for t in t_list)
    indices = list(range(realizations))
    if n_jobs != 1 and realizations > 1:
        work = Parallel(n_jobs=n_jobs)(
            delayed(_one_realization)(params, i, t_list, k_probe, average_k)
            for i in indices)
    else:
        work = [_one_realization(params, i, t_list, k_probe, average_k)
                for i in indices]

    all_p = np.array([[d.p for d in dists] for dists, _ in work])
    all_q = np.array([[d.q for d in dists] for dists, _ in work])
    v_exps = np.array([v for _, v in work])
    r = realizations
    mean_p = all_p.mean(axis=0)
    mean_q = all_q.mean(axis=0)
    stderr_p = all_p.std(axis=0, ddof=1) / math.sqrt(r) if r > 1 \
        else np.zeros_like(mean_p)
    stderr_abs_q = (np.abs(all_q).std(axis=0, ddof=1) / math.sqrt(r) if r > 1
                    else np.zeros_like(mean_p))
    seeds = tuple(int(realization_seed(params.base_seed, i).generate_state(1)[0])
                  for i in indices)
    return EnsembleResult(
        params=params, t_list=t_list,
        realizations=tuple(tuple(dists) for dists, _ in work),
        mean_p=mean_p, mean_q=mean_q, stderr_p=stderr_p,
        stderr_abs_q=stderr_abs_q, realization_seeds=seeds,
        v_expectations=v_exps, mean_v_expectation=float(v_exps.mean()),
        k_probe=k_probe)

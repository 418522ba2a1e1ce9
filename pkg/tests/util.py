import numpy as np

from coulomb2d.elasticity import ElasticModulus

SQRT2 = np.sqrt(2.0)


def random_modulus(rng, floor: float = 0.2) -> ElasticModulus:
    """Random elliptic Mandel matrix ``X X^T + floor I`` with O(1) entries."""
    X = rng.normal(size=(3, 3))
    return ElasticModulus.from_matrix(X @ X.T + floor * np.eye(3))


def stroh_n2d(m: ElasticModulus) -> np.ndarray:
    """Independent ``H / pi`` from the eigenvectors of the sextic (Stroh) problem.

    Roots ``p`` of ``det(M0 + p M1 + p^2 M2) = 0`` with ``Im p < 0`` give
    decaying modes ``v exp(i xi (x + p y))`` in ``y < 0``; matching their
    surface traction to a unit load gives the surface displacement.
    """
    L11, L12, L13, L22, L23, L33 = m.as_tuple()
    r2 = SQRT2
    M0 = np.array([[L11, r2 * L13 / 2], [r2 * L13 / 2, L33 / 2]])
    M1 = np.array([[r2 * L13, L33 / 2 + L12], [L33 / 2 + L12, r2 * L23]])
    M2 = np.array([[L33 / 2, r2 * L23 / 2], [r2 * L23 / 2, L22]])
    import scipy.linalg as sl

    A = np.block([[np.zeros((2, 2)), np.eye(2)], [-M0, -M1]])
    B = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), M2]])
    w, V = sl.eig(A, B)
    keep = [i for i in range(4) if w[i].imag < 0]
    lam, v = w[keep], V[:2, keep]
    B0 = np.array([[L13 / r2, L33 / 2], [L12, L23 / r2]])
    B1 = np.array([[L33 / 2, L23 / r2], [L23 / r2, L22]])
    W = np.column_stack([1j * (B0 + lam[k] * B1) @ v[:, k] for k in range(2)])
    return v @ np.linalg.inv(W) / np.pi

"""
Matrix-product representation of the augmented density tensor

Site 0 carries the Liouville index of the newest Trotter interval, site j
the index j intervals earlier. Every site tensor has shape
(left bond, 4, right bond); the outer bonds have dimension 1.
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy import linalg

LIOUVILLE_DIM = 4

_CARRY = np.eye(LIOUVILLE_DIM)


@dataclass
class TruncationStats:
    """Bookkeeping of one compression sweep"""

    max_bond: int = 1
    cap_hit: bool = False
    max_discarded_weight: float = 0.0


@dataclass
class AugmentedDensityTensor:
    """Open-ended path sum over the intervals still inside the memory window"""

    sites: List[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.sites)

    @property
    def bond_dimensions(self) -> List[int]:
        return [site.shape[2] for site in self.sites[:-1]]

    @classmethod
    def initial(cls, weights: np.ndarray) -> "AugmentedDensityTensor":
        """Single site holding the weights of the first interval index"""
        return cls([np.asarray(weights, dtype=complex).reshape(1, LIOUVILLE_DIM, 1)])

    def extend(
        self,
        transfer: np.ndarray,
        diagonal: np.ndarray,
        memory: np.ndarray,
        drop_oldest: bool,
    ) -> "AugmentedDensityTensor":
        """
        Add the next interval index

        transfer[c, a] is the system propagator from the previous midpoint to
        the new one, diagonal[c] the self factor I_0 and memory[k-1][c, a] the
        factor I_k between the new index c and the index a from k intervals
        back. The new index travels along the bonds as a carry. With
        drop_oldest the last site is summed out after its factor is applied.
        """
        first = np.diag(diagonal).reshape(1, LIOUVILLE_DIM, LIOUVILLE_DIM)
        grown = [first]
        for j, site in enumerate(self.sites):
            factor = memory[j] * transfer if j == 0 else memory[j]
            dl, _, dr = site.shape
            weighted = np.einsum("ca,lar->clar", factor, site)
            carried = weighted[:, :, :, None, :] * _CARRY[:, None, None, :, None]
            grown.append(carried.reshape(LIOUVILLE_DIM * dl, LIOUVILLE_DIM, LIOUVILLE_DIM * dr))

        last = grown.pop()
        dl = last.shape[0]
        # Right boundary: the carry ends and the outer bond is 1
        last = last.reshape(dl, LIOUVILLE_DIM, LIOUVILLE_DIM, 1).sum(axis=2)
        if drop_oldest:
            closing = last.sum(axis=1)[:, 0]
            grown[-1] = np.tensordot(grown[-1], closing, axes=(2, 0))[:, :, None]
        else:
            grown.append(last)
        return AugmentedDensityTensor(grown)

    def compress(self, svd_tol: float, max_bond: int) -> TruncationStats:
        """
        Left-to-right QR sweep, then right-to-left SVD truncation

        Singular values below svd_tol times the largest one are dropped and at
        most max_bond are kept. Leaves site 0 as the orthogonality centre.
        """
        stats = TruncationStats()
        sites = self.sites
        for i in range(len(sites) - 1):
            dl, d, dr = sites[i].shape
            q, r = linalg.qr(sites[i].reshape(dl * d, dr), mode="economic")
            sites[i] = q.reshape(dl, d, -1)
            sites[i + 1] = np.tensordot(r, sites[i + 1], axes=(1, 0))

        for i in range(len(sites) - 1, 0, -1):
            dl, d, dr = sites[i].shape
            u, s, vh = _svd(sites[i].reshape(dl, d * dr))
            if s.size == 0 or s[0] == 0.0:
                keep = 1
            else:
                keep = int(np.count_nonzero(s > svd_tol * s[0]))
                if keep > max_bond:
                    stats.cap_hit = True
                    keep = max_bond
                keep = max(1, keep)
                total = float(np.sum(s ** 2))
                if total > 0:
                    stats.max_discarded_weight = max(
                        stats.max_discarded_weight, float(np.sum(s[keep:] ** 2)) / total
                    )
            stats.max_bond = max(stats.max_bond, keep)
            sites[i] = vh[:keep].reshape(keep, d, dr)
            sites[i - 1] = np.tensordot(sites[i - 1], u[:, :keep] * s[:keep], axes=(2, 0))
        return stats

    def newest_marginal(self) -> np.ndarray:
        """Sum over every index but the newest one, shape (4,)"""
        right = np.ones(1, dtype=complex)
        for site in reversed(self.sites[1:]):
            right = site.sum(axis=1) @ right
        return self.sites[0][0] @ right


def _svd(matrix: np.ndarray):
    try:
        return linalg.svd(matrix, full_matrices=False, lapack_driver="gesdd")
    except linalg.LinAlgError:
        return linalg.svd(matrix, full_matrices=False, lapack_driver="gesvd")

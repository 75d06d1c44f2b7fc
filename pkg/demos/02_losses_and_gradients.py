"""
The three losses on a toy pair of views
=======================================

Build two random embedding views, evaluate each loss term and compare the
analytic gradient with central differences.
"""

import numpy as np
import scipy.sparse as sp

from neucgc.afc import afc_loss, infonce_upper_bound
from neucgc.contrast import cross_view_similarity, nca_loss
from neucgc.distributions import gda_loss, pairwise_skl_matrix
from neucgc.trainer import objective_and_grad

rng = np.random.default_rng(0)
n, d = 8, 4
z1, z2 = rng.standard_normal((2, n, d))

# a ring graph and a sparse neutral-pair graph
ring = np.roll(np.eye(n), 1, axis=1)
adj = sp.csr_matrix(ring + ring.T)
h = np.zeros((n, n))
h[0, 1] = h[1, 0] = 1.0

k = pairwise_skl_matrix(z1, z2)
s = cross_view_similarity(z1, z2)
print(f"GDA {gda_loss(z1, z2):.4f}")
for eta in (0.0, 0.5, 1.0):
    print(f"NCA eta={eta} {nca_loss(k, adj, eta):.4f}")
print(f"AFC {afc_loss(s, h):.4f}, InfoNCE bound on -AFC {infonce_upper_bound(s):.4f}")

terms, g1, _ = objective_and_grad(z1, z2, adj, h, eta=0.5, lambda1=0.1, lambda2=1.0)


def total():
    return (nca_loss(pairwise_skl_matrix(z1, z2), adj, 0.5)
            + 0.1 * afc_loss(cross_view_similarity(z1, z2), h) + gda_loss(z1, z2))


eps = 1e-6
z1[2, 3] += eps
up = total()
z1[2, 3] -= 2 * eps
down = total()
z1[2, 3] += eps
print(f"d total / d z1[2,3]: analytic {g1[2, 3]:.8f}, numeric {(up - down) / (2 * eps):.8f}")

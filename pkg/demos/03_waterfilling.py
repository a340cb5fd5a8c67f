#!/usr/bin/env python3
"""Water-filling gain design and why it already picks the best order.

Water-filling pours a power budget into the channel's eigenvalues,
strongest first. The resulting gains are ranked exactly like the
eigenvalues, and by the rearrangement inequality that ranking minimizes
the transmit-power functional sum k^2/lambda over all assignments, so
the search over orders collapses to the identity.
"""

from itertools import permutations

import numpy as np

from dpc_perm import (
    ChannelSpec,
    generate_channel,
    min_power_order_closed_form,
    svd_decompose,
    waterfill,
    waterfill_powers,
)

n = 5
h = generate_channel(ChannelSpec(n_users=n, seed=31))
sigma = svd_decompose(h).sigma
lam = sigma**2

print("=== Water-filling over the eigenchannels ===")
print(f"eigenvalues lambda: {np.round(lam, 3)}")
for budget in (0.5, 2.0, 10.0):
    p, mu = waterfill_powers(sigma, budget)
    k = waterfill(sigma, budget)
    active = int(np.count_nonzero(p))
    print(
        f"P = {budget:5.1f}: water level {mu:7.3f}, powers {np.round(p, 3)}"
        f" ({active}/{n} active), sum k^2/lambda = {np.sum(k**2 / lam):.6f}"
    )

print("\n=== The designed gains already sit in the minimal-power order ===")
budget = 2.0
k = waterfill(sigma, budget)
closed = min_power_order_closed_form(k, sigma)
print(f"closed-form optimal order: {tuple(closed.tolist())}")

values = {
    order: float(np.sum(k**2 / lam[list(order)])) for order in permutations(range(n))
}
best = min(values, key=values.get)
print(f"exhaustive argmin over {len(values)} orders: {best} (value {values[best]:.6f})")
print(f"identity value: {values[tuple(range(n))]:.6f}")
worst = max(values, key=values.get)
print(f"worst order {worst} would cost {values[worst]:.6f}")

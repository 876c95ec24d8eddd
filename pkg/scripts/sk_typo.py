#!/usr/bin/env python3
"""Show the one term where the printed SK Ω_{2,1;1,0} differs from the computed entry."""
from mrtau.exactalg import weight_of
from mrtau.goldens import omega_golden
from mrtau.kmrealize import get_model
from mrtau.taustruct import omega_table

computed = omega_table(get_model("sk"), 1).get(2, 1, 1, 0)
printed = omega_golden("sk", 2, 1, corrected=False)
print("computed - printed =", (computed - printed).to_text())
print("weight of computed entry:", weight_of(computed))
print("matches after the correction:", computed == omega_golden("sk", 2, 1))

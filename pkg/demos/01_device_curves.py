"""
Device curves under synthetic STDP
==================================

Each variable synapse carries a charge q in [0, q_max].  A potentiating STDP
event adds q_max/1000, a depressing one removes it.  The three kinds map the
same charge to very different weights.
"""
from memevo.synapse import Kind, MemristorParams, characterize

p = MemristorParams()
print(f"q_max = {p.q_max:.4f}, one event moves q by {p.dq:.6f}")

rows = list(characterize(p))
curve = {k.name: [r for r in rows if r[0] == k.name] for k in (Kind.HP, Kind.PEO, Kind.LIN)}

# HP-like devices stay almost flat until the last ~10% of potentiating events
for step in (0, 500, 900, 950, 1000):
    print(f"HP   step {step:4d}: W = {curve['HP'][step][4]:.4f}")

# PEO-like devices do most of their travel in the first hundred events
for step in (0, 10, 50, 90, 1000):
    print(f"PEO  step {step:4d}: W = {curve['PEO'][step][4]:.4f}")

# the linear resistor is the control: W = n / 1000
print(f"LIN  step  250: W = {curve['LIN'][250][4]:.4f}")

# the down-sweep retraces the same path
print("HP   after 1000 up and 1000 down events: W =", round(curve["HP"][2000][4], 6))

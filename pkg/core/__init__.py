"""
Numerical core: spectral fields, the Q-tensor model, time stepping,
Littlewood-Paley tools and audits.
"""

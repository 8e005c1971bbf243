"""Numerical laboratory for boundary blow-up solutions of weighted
p-Laplacian problems in radial geometry.

Modules
-------
karamata      boundary weight generators and their limit structure
nonlinearity  regularly varying absorption terms and growth classification
transform     the decreasing profile map phi and its identities
radial        shooting solver, blow-up detection, Dirichlet scaffold
asymptotics   closed-form rate constants and proof-level limit evaluation
ratefit       empirical exponent/constant extraction and verdicts
cli           scenario-driven command line surface
"""

__version__ = "0.1.0"

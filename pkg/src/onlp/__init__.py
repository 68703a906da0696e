"""Privacy-preserving outsourcing of nonlinear programs.

A client masks a quadratically constrained problem with secret row scales,
an affine shift, and permutations; an untrusted worker solves the masked
problem with a generalized reduced gradient method; the client unmasks the
answer and verifies first-order optimality before accepting it.

Submodules are imported on demand so that server-side code never touches the
key material helpers: ``model`` and ``solver`` carry the problem types and
the solver, ``transform`` and ``kkt`` the client-side masking and checking,
``documents``/``wire``/``server``/``client``/``service`` the exchange
formats and transports, and ``generator``/``bench``/``distcheck``/``cli``
the tooling.
"""

__version__ = "0.1.0"

"""zesst: zero-energy stationary scattering toolkit.

Constructs eikonal charts by geodesic shooting in the conformal metric
K dx^2, realizes the flow-limit distorted Fourier transforms and the
scattering matrix down to zero energy, and cross-validates everything
against an independent radial partial-wave oracle.
"""

__version__ = "0.1.0"

"""cubicdyn: the Markoff-type group action on the cubic surfaces S_{A,B,C,D}.

    x^2 + y^2 + z^2 + xyz = Ax + By + Cz + D

Modules follow the layers of the toolkit: ``words`` (exact word and matrix
algebra), ``surface`` and ``action`` (numerics on the surface), the
certifiers ``fibers``, ``fatou``, ``cascade``, ``infinity``, ``picard`` and
``fixed_points``, and ``scan`` for parameter-space atlases.
"""

__version__ = "0.1.0"

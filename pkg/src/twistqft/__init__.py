"""Numerical experiments with wedge-local deformations of a free scalar field.

The package is organized bottom-up:

* :mod:`twistqft.geometry` -- metric, boosts, wedges, deformation matrices;
* :mod:`twistqft.funcspace` -- test functions, transforms, norm estimates;
* :mod:`twistqft.star` -- deformed products and momentum-space phases;
* :mod:`twistqft.wick` -- on-shell quadrature and free-field correlators;
* :mod:`twistqft.deform` -- deformed correlators and commutator elements;
* :mod:`twistqft.experiments` -- end-to-end scans with JSON/CSV reports;
* :mod:`twistqft.cli` -- command line entry point.
"""

__version__ = "0.1.0"

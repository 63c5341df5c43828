"""Cylinder diagrams, REL deformations, and Kontsevich-Zorich monodromy.

Subpackage map:

* flat_core    -- origamis, cylinder diagrams, cylinder surfaces
* homology     -- integer homology bases and the intersection form
* diagrams     -- diagram enumeration, pinching, configuration classifier
* rel_deform   -- REL twists/stretches, collapse detection, direction search
* kz_monodromy -- SL(2,Z) orbits, monodromy, Forni reports, Lyapunov
* census       -- origami enumeration, the zero-Forni census, pipelines
"""

__version__ = "0.1.0"

#!/usr/bin/python3

"""
LaminateColloc - homogenized isogeometric collocation of laminated plates
with equilibrium-based recovery of the out-of-plane stresses
"""

import laminate_colloc.spline
import laminate_colloc.material
import laminate_colloc.collocation
import laminate_colloc.recovery
import laminate_colloc.pagano
import laminate_colloc.bench
import laminate_colloc.util

"""tetherplan: collaborative four-arm planning for tethered tools.

A master dual-arm robot picks, places, and hands over a tool whose cable is
kept taut by a balancer or motorized pulley; an assistant dual-arm robot
repositions a cable slider so the two straight cable segments never collide
with robots or the environment.
"""

__version__ = "0.1.0"

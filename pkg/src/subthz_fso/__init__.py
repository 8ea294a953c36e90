"""Monte Carlo simulation of hybrid sub-THz + FSO multi-hop backhaul links."""

__version__ = "0.1.0"

"""Simulation toolkit for Bell tests on inflated quantum networks.

Submodules
----------
tensor        states, operators, partial traces, Schmidt decompositions
states        GHZ, EPR, Werner and triangle-network sources
measurements  POVMs, Bell bases and the two-qubit CHSH oracle
born          Born-rule distributions, post-selection, no-signalling checks
network       inflated networks and their Bell-type tests
swapping      post-selected collapse of the activated pair
nsmodel       biseparable no-signalling box model and local-content LP
audit         CHSH audits of the inflated tests
optimize      CHSH maximization and visibility thresholds
cli           command-line runner
"""

__version__ = "0.1.0"

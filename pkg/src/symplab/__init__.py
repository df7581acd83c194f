"""symplab: a numerical laboratory for 2-D area-preserving dynamics.

Core quantities: Bowen separated-orbit entropy estimates, Lyapunov exponents
of periodic orbits and the growth functionals s_n, the snake-horseshoe model
with certified symbolic coding, and the pendulum-on-sphere flow whose time-t
map has zero entropy but a hyperbolic fixed point.
"""

__version__ = "0.1.0"

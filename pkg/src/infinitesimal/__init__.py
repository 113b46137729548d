"""Fisher infinitesimal model with quadratic selection: grid solver, Gaussian oracle, tree Monte Carlo."""

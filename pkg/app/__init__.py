"""cstar-learn: C*-algebraic kernels and neural networks."""

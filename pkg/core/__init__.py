# Numerical core: weights, measures, transforms, averages, Jacobi operators, oracle

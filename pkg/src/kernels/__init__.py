# Kernels package

"""EP operators, Moore-Penrose inverses and product theorems on finite-dimensional models."""

import potentials as _

"""Zeta-regularized determinants of regular singular Sturm-Liouville operators on [0, 1]."""

"""Augmented ensemble MCMC for binary sequence models and factorial HMMs."""
from augmc._backend import BACKEND

__version__ = "0.1.0"

"""Gradient-guided failure search for neural OFDM receivers."""

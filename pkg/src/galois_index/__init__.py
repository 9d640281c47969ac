"""Possible indices of adelic Galois images of non-CM elliptic curves over Q,
computed from the genus 0 and 1 congruence subgroups."""

__version__ = "0.1.0"

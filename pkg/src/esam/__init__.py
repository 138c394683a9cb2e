"""Cycle-accurate simulator and analytical PPA model of a multiport-SRAM
compute-in-memory spiking neural network accelerator."""

__version__ = "0.1.0"

"""Harvest-maximizing MIMO precoding under a minimum-rate constraint."""

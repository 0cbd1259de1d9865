"""Robust task assignment against an attacker who disables workers."""

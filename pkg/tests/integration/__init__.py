"""End-to-end tests for the phaselab command line"""

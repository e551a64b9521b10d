"""Ambient backscatter link simulator with Manchester energy detectors"""

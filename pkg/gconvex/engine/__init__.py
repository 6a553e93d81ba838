"""Exact and numerical mathematics behind the commands"""
